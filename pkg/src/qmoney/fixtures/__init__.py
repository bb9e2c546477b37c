"""Bundled fixture data: the worked hidden-subspace demo instance and the
externally published level-11 cusp form coefficients used as cross-checks."""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from ..f2core import BitMatrix, BitVector, Subspace, enumerate_elements, membership
from ..f2poly import F2Poly, PolySystem, evaluate, parse_poly

__all__ = ["HSDemoFixture", "load_hs_demo", "load_level11_cusp_coefficients", "DEMO_NAMES"]

# CLI fixture tokens -> bundled files
DEMO_NAMES = {"paper84": "hs_n8_demo.txt"}


@dataclass(frozen=True)
class HSDemoFixture:
    n: int
    d: int
    m: int
    subspace: Subspace
    generator_matrix: BitMatrix
    linear_forms: PolySystem
    point: BitVector
    system: PolySystem
    expected_jacobian: BitMatrix
    p5_variant: str


def _read_text(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text(encoding="utf-8")


def _sections(raw: str) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    current = None
    for line in raw.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1]
            out[current] = []
            continue
        if current is None:
            raise ValueError("content before the first section header")
        out[current].append(stripped)
    return out


def _join_polynomials(lines: list[str]) -> dict[str, str]:
    """Stitch continuation lines back onto their 'name:' headers."""
    polys: dict[str, str] = {}
    name = None
    for line in lines:
        if ":" in line.split("*")[0].split("+")[0]:
            name, _, rest = line.partition(":")
            polys[name.strip()] = rest.strip()
        else:
            if name is None:
                raise ValueError("polynomial continuation before any header")
            polys[name] += " " + line
    return polys


def load_hs_demo(name: str = "paper84") -> HSDemoFixture:
    """Load the worked demo instance, resolving the recorded p5 ambiguity.

    Exactly one of the two recorded p5 readings vanishes on the hidden
    subspace; that reading is kept.
    """
    try:
        filename = DEMO_NAMES[name]
    except KeyError:
        raise ValueError(f"unknown fixture {name!r}; available: {sorted(DEMO_NAMES)}")
    sec = _sections(_read_text(filename))

    params = dict(
        kv.replace(" ", "").split("=") for kv in sec["params"]
    )
    n, d, m = int(params["n"]), int(params["d"]), int(params["m"])

    gen = BitMatrix.from_text("\n".join(sec["generators"]))
    subspace = Subspace(n, gen)
    point = BitVector([int(c) for c in sec["point"][0]])
    if not membership(subspace, point):
        raise ValueError("fixture point is not in the hidden subspace")

    forms = PolySystem(n, 1, (parse_poly(t, n) for t in sec["linear_forms"]))

    named = _join_polynomials(sec["polynomials"])
    variants = {}
    polys: dict[int, F2Poly] = {}
    for key, text in named.items():
        poly = parse_poly(text, n)
        if key in ("p5a", "p5b"):
            variants[key] = poly
        else:
            polys[int(key[1:])] = poly

    chosen = None
    for key in ("p5a", "p5b"):
        cand = variants[key]
        if all(evaluate(cand, v) == 0 for v in enumerate_elements(subspace)):
            chosen = key
            break
    if chosen is None:
        raise ValueError("neither p5 reading vanishes on the subspace")
    polys[5] = variants[chosen]

    ordered = [polys[i] for i in range(1, m + 1)]
    system = PolySystem(n, max(p.degree() for p in ordered), ordered)

    expected = BitMatrix.from_text("\n".join(sec["jacobian"]))
    return HSDemoFixture(
        n=n,
        d=d,
        m=m,
        subspace=subspace,
        generator_matrix=gen,
        linear_forms=forms,
        point=point,
        system=system,
        expected_jacobian=expected,
        p5_variant=chosen,
    )


def load_level11_cusp_coefficients() -> dict[int, int]:
    """Externally published prime coefficients a_l of the level-11 cusp form."""
    data = json.loads(_read_text("level11_cusp_an.json"))
    return {int(k): int(v) for k, v in data["prime_coefficients"].items()}

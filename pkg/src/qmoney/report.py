"""Report assembly and emission: canonical JSON, per-trial CSV, figures.

Reports are schema-versioned and fully deterministic for a fixed seed: no
timestamps, sorted keys, and repr-stable floats, so byte-identical reruns are
part of the contract.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

SCHEMA_VERSION = 1

__all__ = ["Report", "InvariantCheck", "render_figure"]


@dataclass
class InvariantCheck:
    name: str
    passed: bool
    value: object = None
    oracle: str = ""


@dataclass
class Report:
    command: str
    config: dict
    trials: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)
    invariants: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def check(self, name: str, passed: bool, value=None, oracle: str = "") -> bool:
        self.invariants.append(
            InvariantCheck(name=name, passed=bool(passed), value=value, oracle=oracle)
        )
        return bool(passed)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.invariants)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tool": {"name": "qmoney", "version": __version__},
            "command": self.command,
            "config": _jsonable(self.config),
            "trials": _jsonable(self.trials),
            "aggregate": _jsonable(self.aggregate),
            "invariants": [
                {
                    "name": c.name,
                    "passed": c.passed,
                    "value": _jsonable(c.value),
                    "oracle": c.oracle,
                }
                for c in self.invariants
            ],
            "notes": list(self.notes),
        }

    def to_json_bytes(self) -> bytes:
        payload = json.dumps(
            self.to_dict(), sort_keys=True, indent=2, ensure_ascii=True
        )
        return (payload + "\n").encode("ascii")

    def write_json(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_json_bytes())

    def write_csv(self, path) -> None:
        """Delimited per-trial records; one row per trial, sorted columns."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        rows = [_flatten(_jsonable(t)) for t in self.trials]
        fields = sorted({k for r in rows for k in r})
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            for r in rows:
                writer.writerow(r)

    def summary_text(self) -> str:
        lines = [f"qmoney {self.command}"]
        for key, value in sorted(self.config.items()):
            lines.append(f"  config {key} = {value}")
        for key, value in sorted(self.aggregate.items()):
            lines.append(f"  {key}: {_jsonable(value)}")
        for c in self.invariants:
            status = "pass" if c.passed else "FAIL"
            oracle = f" [{c.oracle}]" if c.oracle else ""
            lines.append(f"  {status}: {c.name} = {_jsonable(c.value)}{oracle}")
        for note in self.notes:
            lines.append(f"  note: {note}")
        lines.append("  result: " + ("ok" if self.all_passed else "INVARIANT FAILURE"))
        return "\n".join(lines)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def _flatten(record, prefix: str = "") -> dict:
    if isinstance(record, dict):
        out = {}
        for k, v in record.items():
            key = f"{prefix}.{k}" if prefix else str(k)
            out.update(_flatten(v, key))
        return out
    if isinstance(record, list):
        return {prefix: json.dumps(record)}
    return {prefix: record}


FIGURE_STYLE = {
    "figure.figsize": (7.0, 4.2),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
}


def render_figure(kind: str, data: dict, path) -> None:
    """Render one figure per driver to a file (Agg backend)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with plt.rc_context(FIGURE_STYLE):
        if kind == "hs-bench":
            fig, (ax1, ax2) = plt.subplots(1, 2)
            dims = data["recovered_dims"]
            ax1.hist(dims, bins=range(min(dims), max(dims) + 2), align="left", rwidth=0.8)
            ax1.set_xlabel("recovered dimension")
            ax1.set_ylabel("trials")
            ax1.set_title("kernel dimension")
            rate = data["running_success"]
            ax2.plot(range(1, len(rate) + 1), rate)
            ax2.axhline(data["bound"], color="tab:red", ls="--", label="1 - 2^(n-m)")
            ax2.set_ylim(min(0.9, min(rate) - 0.02), 1.002)
            ax2.set_xlabel("trial")
            ax2.set_ylabel("running exact-recovery rate")
            ax2.legend()
            ax2.set_title("attack success")
        elif kind == "zhandry":
            fig, (ax1, ax2) = plt.subplots(1, 2)
            counts = data["census"]
            ax1.bar(range(len(counts)), counts)
            ax1.set_xlabel("serial y")
            ax1.set_ylabel("preimage count C_y")
            ax1.set_title("preimage census")
            ax2.plot(range(1, len(data["running_rate"]) + 1), data["running_rate"])
            ax2.axhline(data["predicted_rate"], color="tab:red", ls="--", label="C_y/(C_0+C_y)")
            ax2.set_xlabel("iteration")
            ax2.set_ylabel("running success rate")
            ax2.legend()
            ax2.set_title("per-iteration acceptance")
        elif kind == "brandt":
            fig, (ax1, ax2) = plt.subplots(1, 2)
            mat = np.array(data["matrix"])
            im = ax1.imshow(mat, cmap="viridis")
            fig.colorbar(im, ax=ax1, shrink=0.8)
            ax1.set_title(f"B({data['n']}) at p={data['p']}")
            ns = data["trace_ns"]
            ax2.plot(ns, data["traces"], "o-", label="trace")
            ax2.plot(ns, data["sigma"], "s--", label="Eisenstein part")
            ax2.set_xlabel("n")
            ax2.legend()
            ax2.set_title("Hecke traces")
        elif kind == "hecke":
            fig, (ax1, ax2) = plt.subplots(1, 2)
            forms = data["forms"]
            ax1.bar([str(f) for f in forms], data["fidelities"])
            ax1.set_ylim(0, 1.05)
            ax1.set_xlabel("cusp form")
            ax1.set_ylabel("reconstruction fidelity")
            ax1.set_title(f"p={data['p']}, eps={data['eps']}")
            for ell, vals in data["spectra"].items():
                ax2.plot([float(ell)] * len(vals), vals, "o", alpha=0.7)
            ax2.set_xlabel("prime")
            ax2.set_ylabel("eigenvalue")
            ax2.set_title("Hecke spectra")
        else:
            raise ValueError(f"unknown figure kind {kind!r}")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)

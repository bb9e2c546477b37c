"""Multivariate polynomials over GF(2).

Polynomials are formal: exponents above 1 are kept and matter for formal
derivatives, even though evaluation on GF(2) points factors through the
squarefree reduction.  Monomials are exponent tuples, one entry per variable;
the serialization order is graded lexicographic.
"""
from __future__ import annotations

import re

import numpy as np

from .f2core import BitMatrix, BitVector, Subspace, orthogonal_complement, _rref

__all__ = [
    "F2Poly",
    "PolySystem",
    "VanishingSampler",
    "evaluate",
    "evaluate_many",
    "formal_derivative",
    "jacobian_at",
    "sample_vanishing",
    "vanishing_space_basis",
    "parse_poly",
    "format_poly",
]

MAX_VARS = 28
MAX_DEGREE = 3

Monomial = tuple[int, ...]


def monomial_degree(m: Monomial) -> int:
    return sum(m)


def reduce_monomial(m: Monomial) -> Monomial:
    """Squarefree reduction: cap every exponent at 1."""
    return tuple(min(e, 1) for e in m)


def _grlex_key(m: Monomial):
    # descending total degree, then ascending lexicographic
    return (-sum(m), m)


class F2Poly:
    """Polynomial over GF(2) as a set of monomials, each with coefficient 1."""

    __slots__ = ("_n", "_terms", "_expmat")

    def __init__(self, n_vars: int, terms=()):
        if n_vars <= 0:
            raise ValueError("n_vars must be positive")
        tset = set()
        for m in terms:
            m = tuple(int(e) for e in m)
            if len(m) != n_vars or any(e < 0 for e in m):
                raise ValueError(f"bad monomial {m} for {n_vars} variables")
            tset.symmetric_difference_update({m})
        self._n = n_vars
        self._terms = frozenset(tset)
        self._expmat = None

    @classmethod
    def _unchecked(cls, n_vars: int, terms: frozenset) -> "F2Poly":
        obj = cls.__new__(cls)
        obj._n = n_vars
        obj._terms = terms
        obj._expmat = None
        return obj

    @property
    def n_vars(self) -> int:
        return self._n

    @property
    def terms(self) -> frozenset:
        return self._terms

    def degree(self) -> int:
        return max((sum(m) for m in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other: "F2Poly") -> "F2Poly":
        if self._n != other._n:
            raise ValueError("variable count mismatch")
        return F2Poly(self._n, self._terms ^ other._terms)

    def monomial_multiple(self, m: Monomial) -> "F2Poly":
        """Multiply by a single monomial (exponents add)."""
        if len(m) != self._n:
            raise ValueError("variable count mismatch")
        return F2Poly(
            self._n, (tuple(a + b for a, b in zip(t, m)) for t in self._terms)
        )

    def reduce_squarefree(self) -> "F2Poly":
        return F2Poly(self._n, (reduce_monomial(t) for t in self._terms))

    def linear_part(self) -> "F2Poly":
        return F2Poly(self._n, (t for t in self._terms if sum(t) == 1))

    def exponent_matrix(self) -> np.ndarray:
        """Terms as an (n_terms x n_vars) int8 array, in serialization order."""
        if self._expmat is None:
            ordered = sorted(self._terms, key=_grlex_key)
            mat = (
                np.array(ordered, dtype=np.int8)
                if ordered
                else np.zeros((0, self._n), dtype=np.int8)
            )
            mat.flags.writeable = False
            self._expmat = mat
        return self._expmat

    def __eq__(self, other) -> bool:
        if not isinstance(other, F2Poly):
            return NotImplemented
        return self._n == other._n and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self._n, self._terms))

    def __repr__(self) -> str:
        return f"F2Poly({format_poly(self)!r})"


class PolySystem:
    """Ordered list of polynomials sharing a variable count and degree bound."""

    __slots__ = ("n_vars", "degree", "polys")

    def __init__(self, n_vars: int, degree: int, polys):
        polys = tuple(polys)
        for p in polys:
            if p.n_vars != n_vars:
                raise ValueError("variable count mismatch")
            if p.degree() > degree:
                raise ValueError("polynomial exceeds the degree bound")
        self.n_vars = n_vars
        self.degree = degree
        self.polys = polys

    def __len__(self) -> int:
        return len(self.polys)

    def __iter__(self):
        return iter(self.polys)

    def __getitem__(self, i: int) -> F2Poly:
        return self.polys[i]


def evaluate(p: F2Poly, x: BitVector) -> int:
    """Value of p at x; any exponent >= 1 contributes the plain coordinate."""
    if x.length != p.n_vars:
        raise ValueError("dimension mismatch")
    E = p.exponent_matrix()
    if E.shape[0] == 0:
        return 0
    zero_hit = (E > 0) & (x.bits == 0)[None, :]
    return int((~zero_hit.any(axis=1)).sum() & 1)


def evaluate_many(p: F2Poly, points: np.ndarray) -> np.ndarray:
    """Evaluate p on each row of a (N x n) 0/1 matrix; returns uint8 values."""
    E = p.exponent_matrix()
    n_pts = points.shape[0]
    if E.shape[0] == 0:
        return np.zeros(n_pts, dtype=np.uint8)
    mask = (E > 0).astype(np.float32)
    zeros = (points == 0).astype(np.float32)
    # term vanishes at a point iff the point has a zero in the term's support
    hits = zeros @ mask.T
    alive = hits < 0.5
    return (alive.sum(axis=1).astype(np.int64) & 1).astype(np.uint8)


def formal_derivative(p: F2Poly, j: int) -> F2Poly:
    """Formal partial derivative with respect to variable j (0-based).

    An exponent e on variable j contributes coefficient e mod 2 and exponent
    e - 1, so even exponents annihilate the term.
    """
    if not 0 <= j < p.n_vars:
        raise ValueError("variable index out of range")
    terms = []
    for m in p.terms:
        e = m[j]
        if e % 2 == 1:
            terms.append(m[:j] + (e - 1,) + m[j + 1 :])
    return F2Poly(p.n_vars, terms)


def _jacobian_row(p: F2Poly, x01: np.ndarray) -> np.ndarray:
    """Gradient of p at a point, as a length-n uint8 row."""
    n = p.n_vars
    E = p.exponent_matrix()
    if E.shape[0] == 0:
        return np.zeros(n, dtype=np.uint8)
    support = E > 0
    dead = support & (x01 == 0)[None, :]
    dead_count = dead.sum(axis=1)
    # product over the other variables survives iff removing column j clears
    # every zero-valued variable in the term's support
    others_alive = (dead_count[:, None] - dead) == 0
    odd = (E & 1).astype(bool)
    # x_j^(e-1) evaluates to x_j when e >= 2 and to 1 when e == 1
    power_factor = np.where(E >= 2, x01[None, :], 1).astype(bool)
    contrib = odd & power_factor & others_alive
    return (contrib.sum(axis=0) & 1).astype(np.uint8)


def jacobian_at(system: PolySystem, x: BitVector) -> BitMatrix:
    """Matrix of formal partial derivatives evaluated at x, one row per polynomial."""
    if x.length != system.n_vars:
        raise ValueError("dimension mismatch")
    x01 = x.bits
    rows = [_jacobian_row(p, x01) for p in system]
    return BitMatrix(np.array(rows, dtype=np.uint8))


def monomials_of_degree_at_most(n_vars: int, d: int) -> list[Monomial]:
    """All exponent tuples with total degree <= d, graded lexicographic order."""
    out: list[Monomial] = []

    def rec(prefix, remaining, slots):
        if slots == 0:
            out.append(tuple(prefix))
            return
        for e in range(remaining + 1):
            rec(prefix + [e], remaining - e, slots - 1)

    for deg in range(d + 1):
        block: list[Monomial] = []

        def exact(prefix, remaining, slots):
            if slots == 1:
                block.append(tuple(prefix + [remaining]))
                return
            for e in range(remaining, -1, -1):
                exact(prefix + [e], remaining - e, slots - 1)

        exact([], deg, n_vars)
        out.extend(sorted(block))
    return out


class VanishingSampler:
    """Uniform sampler for the degree-<=d polynomials cutting out a subspace.

    The subspace A is the zero locus of n/2 independent linear forms H_a; the
    sampled space is the span of {m * H_a : deg(m) <= d-1}.  Sampling draws a
    uniform coefficient for every (a, m) pair, which pushes forward to the
    uniform distribution on the span.  Tangent spaces of the sampled
    polynomials at points of A therefore always contain A.
    """

    def __init__(self, space: Subspace, d: int):
        n = space.ambient_dim
        if n > MAX_VARS:
            raise ValueError(f"n > {MAX_VARS} not supported")
        if d < 1:
            raise ValueError("degree must be at least 1")
        if d > MAX_DEGREE:
            raise ValueError(f"degree > {MAX_DEGREE} rejected (cost guard)")
        self.space = space
        self.n_vars = n
        self.degree = d
        comp = orthogonal_complement(space)
        self.h_rows = comp.basis.array.copy()
        self.h_polys = tuple(
            F2Poly(n, (_unit_monomial(n, j) for j in np.nonzero(row)[0]))
            for row in self.h_rows
        )
        self.low_monomials = monomials_of_degree_at_most(n, d - 1)
        self._lowmon_matrix = np.array(self.low_monomials, dtype=np.int8)
        self._supports = [np.nonzero(row)[0] for row in self.h_rows]
        self._units = np.eye(n, dtype=np.int8)
        reduced: dict[Monomial, int] = {}
        fold = []
        for m in self.low_monomials:
            key = reduce_monomial(m)
            fold.append(reduced.setdefault(key, len(reduced)))
        self._fold = np.array(fold)
        self._reduced_lowmons = list(reduced)

    def sample(self, rng: np.random.Generator) -> F2Poly:
        poly, _ = self.sample_with_parts(rng)
        return poly

    def sample_with_parts(self, rng: np.random.Generator):
        """Sample one polynomial plus its cofactor coefficient matrix.

        Returns (poly, coeffs) where coeffs[a, i] is the GF(2) coefficient of
        low_monomials[i] in the cofactor of the a-th linear form; the
        polynomial equals sum_a cofactor_a * H_a with duplicate monomials
        cancelled mod 2.
        """
        n_forms = len(self.h_polys)
        coeffs = rng.integers(
            0, 2, size=(n_forms, len(self.low_monomials)), dtype=np.uint8
        )
        blocks = []
        for a in range(n_forms):
            idx = np.nonzero(coeffs[a])[0]
            if idx.size:
                prods = (
                    self._lowmon_matrix[idx][:, None, :]
                    + self._units[self._supports[a]][None, :, :]
                )
                blocks.append(prods.reshape(-1, self.n_vars))
        if not blocks:
            return F2Poly(self.n_vars), coeffs
        rows = np.concatenate(blocks)
        # exponents are at most MAX_DEGREE = 3: two bits per variable
        weights = np.int64(1) << (2 * np.arange(self.n_vars, dtype=np.int64))
        codes = rows.astype(np.int64) @ weights
        uniq, counts = np.unique(codes, return_counts=True)
        kept = uniq[counts & 1 == 1]
        n = self.n_vars
        terms = frozenset(
            tuple((int(c) >> (2 * j)) & 3 for j in range(n)) for c in kept
        )
        return F2Poly._unchecked(n, terms), coeffs

    def sample_system(self, count: int, rng: np.random.Generator) -> PolySystem:
        return PolySystem(
            self.n_vars, self.degree, (self.sample(rng) for _ in range(count))
        )

    def reduced_columns(self, points: np.ndarray) -> np.ndarray:
        """Value of each distinct squarefree-reduced low monomial at each point."""
        cols = np.ones((points.shape[0], len(self._reduced_lowmons)), dtype=np.uint8)
        for r, key in enumerate(self._reduced_lowmons):
            support = [j for j, e in enumerate(key) if e]
            if support:
                cols[:, r] = points[:, support].all(axis=1)
        return cols

    def evaluate_parts(
        self, coeffs: np.ndarray, points: np.ndarray, columns: np.ndarray | None = None
    ) -> np.ndarray:
        """Evaluate sum_a cofactor_a * H_a at 0/1 points from the parts matrix."""
        if columns is None:
            columns = self.reduced_columns(points)
        n_forms = coeffs.shape[0]
        folded = np.zeros((n_forms, columns.shape[1]), dtype=np.int64)
        for a in range(n_forms):
            np.add.at(folded[a], self._fold, coeffs[a].astype(np.int64))
        folded &= 1
        cols_f = columns.astype(np.float32, copy=False)
        pts_f = points.astype(np.float32, copy=False)
        g_vals = (cols_f @ folded.T.astype(np.float32)).astype(np.int64) & 1
        h_vals = (pts_f @ self.h_rows.T.astype(np.float32)).astype(np.int64) & 1
        return ((g_vals & h_vals).sum(axis=1) & 1).astype(np.uint8)


def _unit_monomial(n: int, j: int) -> Monomial:
    m = [0] * n
    m[j] = 1
    return tuple(m)


def sample_vanishing(
    space: Subspace, d: int, count: int, rng: np.random.Generator
) -> PolySystem:
    """Independent uniform draws from the degree-<=d vanishing span of the subspace."""
    return VanishingSampler(space, d).sample_system(count, rng)


def vanishing_space_basis(space: Subspace, d: int) -> list[F2Poly]:
    """Row-reduced basis of the sampled span, for oracles and span tests."""
    sampler = VanishingSampler(space, d)
    all_mons = monomials_of_degree_at_most(sampler.n_vars, d)
    index = {m: i for i, m in enumerate(all_mons)}
    gens = []
    for h in sampler.h_polys:
        for m in sampler.low_monomials:
            gens.append(h.monomial_multiple(m))
    mat = np.zeros((len(gens), len(all_mons)), dtype=np.uint8)
    for r, g in enumerate(gens):
        for t in g.terms:
            mat[r, index[t]] = 1
    reduced, pivots = _rref(mat)
    basis = []
    for r in range(len(pivots)):
        terms = [all_mons[i] for i in np.nonzero(reduced[r])[0]]
        basis.append(F2Poly(sampler.n_vars, terms))
    return basis


_FACTOR_RE = re.compile(r"^T(\d+)(?:\^(\d+))?$")


def parse_poly(text: str, n_vars: int) -> F2Poly:
    """Parse '+'-separated monomials of '*'-separated T<i>^<e> factors.

    Whitespace is ignored everywhere; a bare '1' is the constant monomial and
    '0' is the zero polynomial.
    """
    compact = "".join(text.split())
    if compact in ("", "0"):
        return F2Poly(n_vars)
    terms = []
    for chunk in compact.split("+"):
        if chunk == "1":
            terms.append(tuple([0] * n_vars))
            continue
        exps = [0] * n_vars
        for factor in chunk.split("*"):
            m = _FACTOR_RE.match(factor)
            if not m:
                raise ValueError(f"bad factor {factor!r}")
            idx = int(m.group(1)) - 1
            if not 0 <= idx < n_vars:
                raise ValueError(f"variable T{idx + 1} out of range")
            exps[idx] += int(m.group(2) or 1)
        terms.append(tuple(exps))
    return F2Poly(n_vars, terms)


def format_poly(p: F2Poly) -> str:
    if p.is_zero():
        return "0"
    chunks = []
    for m in sorted(p.terms, key=_grlex_key):
        if sum(m) == 0:
            chunks.append("1")
            continue
        factors = []
        for j, e in enumerate(m):
            if e == 0:
                continue
            factors.append(f"T{j + 1}" if e == 1 else f"T{j + 1}^{e}")
        chunks.append("*".join(factors))
    return " + ".join(chunks)

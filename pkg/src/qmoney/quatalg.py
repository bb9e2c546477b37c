"""Exact arithmetic in the rational quaternion algebra ramified at p and infinity.

Specialized to p = 3 (mod 4), where i^2 = -1, j^2 = -p gives the closed-form
maximal order with basis {1, i, (i+j)/2, (1+k)/2}.  Everything in this module
is exact: quaternions carry Fraction coefficients, lattices are Hermite normal
forms of integer matrices over a common denominator, and lattice-point
enumeration runs Fincke-Pohst with a rational Cholesky and outward rounding.
No floating point is used anywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "QuaternionAlgebra",
    "Quaternion",
    "QuatLattice",
    "ClassSet",
    "BrandtTable",
    "algebra_setup",
    "maximal_order",
    "left_order",
    "right_order",
    "ideal_inverse",
    "ideal_mul",
    "ideal_conjugate",
    "reduced_norm",
    "trd_gram",
    "is_equivalent",
    "is_invertible",
    "enumerate_classes",
    "unit_count",
    "brandt_matrix",
    "theta_coefficients",
    "sigma_prime",
    "short_vectors",
]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class QuaternionAlgebra:
    """B_{p,infinity} with i^2 = -1, j^2 = -p, k = ij = -ji."""

    p: int

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError("p must be prime")
        if self.p % 4 != 3:
            raise ValueError("only p = 3 (mod 4) is supported")

    def quaternion(self, t, x=0, y=0, z=0) -> "Quaternion":
        return Quaternion(self, Fraction(t), Fraction(x), Fraction(y), Fraction(z))

    def one(self) -> "Quaternion":
        return self.quaternion(1)

    def basis_units(self) -> tuple["Quaternion", ...]:
        return (
            self.quaternion(1, 0, 0, 0),
            self.quaternion(0, 1, 0, 0),
            self.quaternion(0, 0, 1, 0),
            self.quaternion(0, 0, 0, 1),
        )


@dataclass(frozen=True)
class Quaternion:
    alg: QuaternionAlgebra
    t: Fraction
    x: Fraction
    y: Fraction
    z: Fraction

    def coeffs(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.t, self.x, self.y, self.z)

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(
            self.alg, self.t + other.t, self.x + other.x, self.y + other.y, self.z + other.z
        )

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(
            self.alg, self.t - other.t, self.x - other.x, self.y - other.y, self.z - other.z
        )

    def __neg__(self) -> "Quaternion":
        return Quaternion(self.alg, -self.t, -self.x, -self.y, -self.z)

    def scale(self, c) -> "Quaternion":
        c = Fraction(c)
        return Quaternion(self.alg, self.t * c, self.x * c, self.y * c, self.z * c)

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        p = self.alg.p
        t1, x1, y1, z1 = self.coeffs()
        t2, x2, y2, z2 = other.coeffs()
        return Quaternion(
            self.alg,
            t1 * t2 - x1 * x2 - p * (y1 * y2 + z1 * z2),
            t1 * x2 + x1 * t2 + p * (y1 * z2 - z1 * y2),
            t1 * y2 + y1 * t2 - x1 * z2 + z1 * x2,
            t1 * z2 + z1 * t2 + x1 * y2 - y1 * x2,
        )

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.alg, self.t, -self.x, -self.y, -self.z)

    def trd(self) -> Fraction:
        return 2 * self.t

    def nrd(self) -> Fraction:
        p = self.alg.p
        return self.t**2 + self.x**2 + p * (self.y**2 + self.z**2)

    def is_zero(self) -> bool:
        return not (self.t or self.x or self.y or self.z)

    def inverse(self) -> "Quaternion":
        n = self.nrd()
        if n == 0:
            raise ZeroDivisionError("zero quaternion")
        return self.conjugate().scale(Fraction(1, 1) / n)


# ---------------------------------------------------------------------------
# integer row HNF


def _hnf_insert(pivots: dict[int, list[int]], row: list[int], ncols: int) -> None:
    while True:
        lead = next((j for j in range(ncols) if row[j]), None)
        if lead is None:
            return
        if row[lead] < 0:
            row = [-v for v in row]
        piv = pivots.get(lead)
        if piv is None:
            pivots[lead] = row
            return
        q = row[lead] // piv[lead]
        row = [a - q * b for a, b in zip(row, piv)]
        if row[lead]:
            # smaller positive leading entry becomes the new pivot
            pivots[lead] = row
            row = piv


def _hnf_rows(rows: list[list[int]], ncols: int) -> list[list[int]]:
    pivots: dict[int, list[int]] = {}
    for r in rows:
        if any(r):
            _hnf_insert(pivots, list(r), ncols)
    cols = sorted(pivots)
    ordered = [pivots[c] for c in cols]
    # reduce above-pivot entries left to right; pivot rows are zero before
    # their pivot column, so earlier reductions stay intact
    for k in range(len(ordered)):
        for i in range(k + 1, len(ordered)):
            c = cols[i]
            q = ordered[k][c] // ordered[i][c]
            if q:
                ordered[k] = [a - q * b for a, b in zip(ordered[k], ordered[i])]
    return ordered


def _int_kernel(rows: list[list[int]], ncols: int) -> list[list[int]]:
    """Basis of {u : u M = 0} for the integer matrix with the given rows."""
    nrows = len(rows)
    aug = [list(r) + [int(i == j) for j in range(nrows)] for i, r in enumerate(rows)]
    reduced = _hnf_rows(aug, ncols + nrows)
    return [r[ncols:] for r in reduced if not any(r[:ncols])]


# ---------------------------------------------------------------------------
# lattices


class QuatLattice:
    """Rank-4 lattice in the algebra: rows of mat/den span it over Z (HNF)."""

    __slots__ = ("alg", "den", "mat")

    def __init__(self, alg: QuaternionAlgebra, den: int, mat):
        rows = [[int(v) for v in r] for r in mat]
        if len(rows) != 4 or any(len(r) != 4 for r in rows):
            raise ValueError("lattice must have a 4x4 basis")
        if den <= 0:
            raise ValueError("denominator must be positive")
        g = den
        for r in rows:
            for v in r:
                g = math.gcd(g, abs(v))
        den //= g
        rows = [[v // g for v in r] for r in rows]
        self.alg = alg
        self.den = den
        self.mat = tuple(tuple(r) for r in rows)

    @classmethod
    def from_generators(cls, alg: QuaternionAlgebra, quats) -> "QuatLattice":
        quats = list(quats)
        if not quats:
            raise ValueError("no generators")
        den = 1
        for q in quats:
            for c in q.coeffs():
                den = den * c.denominator // math.gcd(den, c.denominator)
        rows = [[int(c * den) for c in q.coeffs()] for q in quats]
        hnf = _hnf_rows(rows, 4)
        if len(hnf) != 4:
            raise ValueError("generators do not span a rank-4 lattice")
        return cls(alg, den, hnf)

    def basis(self) -> list[Quaternion]:
        return [
            Quaternion(self.alg, *(Fraction(v, self.den) for v in row))
            for row in self.mat
        ]

    def contains(self, q: Quaternion) -> bool:
        scaled = [c * self.den for c in q.coeffs()]
        if any(c.denominator != 1 for c in scaled):
            return False
        vec = [int(c) for c in scaled]
        for row in self.mat:
            lead = next(j for j in range(4) if row[j])
            if vec[lead] % row[lead]:
                return False
            f = vec[lead] // row[lead]
            if f:
                vec = [a - f * b for a, b in zip(vec, row)]
        return not any(vec)

    def scaled(self, c) -> "QuatLattice":
        c = Fraction(c)
        if c <= 0:
            raise ValueError("scale must be positive")
        num, den = c.numerator, c.denominator
        return QuatLattice(
            self.alg, self.den * den, [[v * num for v in row] for row in self.mat]
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuatLattice):
            return NotImplemented
        return self.alg == other.alg and self.den == other.den and self.mat == other.mat

    def __hash__(self) -> int:
        return hash((self.alg.p, self.den, self.mat))

    def __repr__(self) -> str:
        return f"QuatLattice(p={self.alg.p}, den={self.den})"


def _right_mul_matrix(b: Quaternion) -> list[list[Fraction]]:
    """Rows are the coefficient vectors of e_t * b; coeffs(q*b) = coeffs(q) @ M."""
    return [list((e * b).coeffs()) for e in b.alg.basis_units()]


def _left_mul_matrix(b: Quaternion) -> list[list[Fraction]]:
    """Rows are the coefficient vectors of b * e_t; coeffs(b*q) = coeffs(q) @ M."""
    return [list((b * e).coeffs()) for e in b.alg.basis_units()]


def _frac_inv(m: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(m)
    aug = [
        [Fraction(m[i][j]) for j in range(n)]
        + [Fraction(1 if i == j else 0) for j in range(n)]
        for i in range(n)
    ]
    for c in range(n):
        pivot = next((r for r in range(c, n) if aug[r][c] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        aug[c], aug[pivot] = aug[pivot], aug[c]
        pv = aug[c][c]
        aug[c] = [v / pv for v in aug[c]]
        for r in range(n):
            if r != c and aug[r][c]:
                f = aug[r][c]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[c])]
    return [row[n:] for row in aug]


def _transform_lattice(lat: QuatLattice, matrix: list[list[Fraction]]) -> QuatLattice:
    """Lattice with basis rows (row_i / den) @ matrix."""
    quats = []
    for row in lat.mat:
        coeffs = [
            sum(Fraction(row[k], lat.den) * matrix[k][j] for k in range(4))
            for j in range(4)
        ]
        quats.append(Quaternion(lat.alg, *coeffs))
    return QuatLattice.from_generators(lat.alg, quats)


def _intersect(a: QuatLattice, b: QuatLattice) -> QuatLattice:
    d = a.den * b.den // math.gcd(a.den, b.den)
    fa, fb = d // a.den, d // b.den
    rows_a = [[v * fa for v in r] for r in a.mat]
    rows_b = [[-v * fb for v in r] for r in b.mat]
    kernel = _int_kernel(rows_a + rows_b, 4)
    gens = []
    for u in kernel:
        vec = [sum(u[i] * rows_a[i][j] for i in range(4)) for j in range(4)]
        gens.append(Quaternion(a.alg, *(Fraction(v, d) for v in vec)))
    return QuatLattice.from_generators(a.alg, gens)


def ideal_mul(a: QuatLattice, b: QuatLattice) -> QuatLattice:
    """Product lattice, generated by pairwise products of the bases."""
    gens = [x * y for x in a.basis() for y in b.basis()]
    return QuatLattice.from_generators(a.alg, gens)


def ideal_conjugate(a: QuatLattice) -> QuatLattice:
    return QuatLattice.from_generators(a.alg, [q.conjugate() for q in a.basis()])


def reduced_norm(a: QuatLattice) -> Fraction:
    """Positive generator of the Z-module generated by element norms.

    Computed as the gcd of nrd over the four basis vectors and their six
    pairwise sums.
    """
    basis = a.basis()
    values = [q.nrd() for q in basis]
    for i in range(4):
        for j in range(i + 1, 4):
            values.append((basis[i] + basis[j]).nrd())
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    num = 0
    for v in values:
        num = math.gcd(num, int(v * den))
    if num == 0:
        raise ValueError("zero lattice")
    return Fraction(num, den)


def ideal_inverse(a: QuatLattice) -> QuatLattice:
    """Inverse via the conjugate: conj(I) / nrd(I)."""
    n = reduced_norm(a)
    return ideal_conjugate(a).scaled(Fraction(1, 1) / n)


def left_order(a: QuatLattice) -> QuatLattice:
    """{alpha : alpha I <= I}, via intersection of transformed copies."""
    out = None
    for b in a.basis():
        transformed = _transform_lattice(a, _frac_inv(_right_mul_matrix(b)))
        out = transformed if out is None else _intersect(out, transformed)
    return out


def right_order(a: QuatLattice) -> QuatLattice:
    """{alpha : I alpha <= I}."""
    out = None
    for b in a.basis():
        transformed = _transform_lattice(a, _frac_inv(_left_mul_matrix(b)))
        out = transformed if out is None else _intersect(out, transformed)
    return out


def is_invertible(a: QuatLattice) -> bool:
    return ideal_mul(a, ideal_inverse(a)) == left_order(a)


def trd_gram(a: QuatLattice) -> list[list[Fraction]]:
    """Matrix trd(b_i * conj(b_j)); its determinant equals p^2 * nrd^4."""
    basis = a.basis()
    return [[(bi * bj.conjugate()).trd() for bj in basis] for bi in basis]


def _frac_det(m: list[list[Fraction]]) -> Fraction:
    work = [[Fraction(v) for v in row] for row in m]
    n = len(work)
    det = Fraction(1)
    for c in range(n):
        pivot = next((r for r in range(c, n) if work[r][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            work[c], work[pivot] = work[pivot], work[c]
            det = -det
        det *= work[c][c]
        inv = Fraction(1) / work[c][c]
        for r in range(c + 1, n):
            if work[r][c]:
                f = work[r][c] * inv
                work[r] = [a - f * b for a, b in zip(work[r], work[c])]
    return det


def gram_det(a: QuatLattice) -> Fraction:
    return _frac_det(trd_gram(a))


# ---------------------------------------------------------------------------
# Fincke-Pohst enumeration


def _bilinear(u: Quaternion, v: Quaternion) -> Fraction:
    """Polarization of nrd: B(u, v) = trd(u * conj(v)) / 2."""
    return (u * v.conjugate()).trd() / 2


def _round_half_to_even(f: Fraction) -> int:
    return round(f)


def _reduced_basis(lat: QuatLattice) -> list[Quaternion]:
    """Greedy pairwise size reduction of the basis (exact, unimodular).

    HNF bases of product lattices can be extremely skew; nearest-integer
    reduction against shorter vectors shrinks norms monotonically, which keeps
    the enumeration boxes small.  Rank 4 needs no LLL machinery for this.
    """
    basis = list(lat.basis())
    for _ in range(10_000):
        basis.sort(key=lambda q: q.nrd())
        changed = False
        for i in range(1, 4):
            for j in range(i):
                nj = basis[j].nrd()
                q = _round_half_to_even(_bilinear(basis[i], basis[j]) / nj)
                if q:
                    basis[i] = basis[i] - basis[j].scale(q)
                    changed = True
        if not changed:
            return basis
    raise ArithmeticError("basis reduction failed to converge")


def _reduced_gram(lat: QuatLattice) -> tuple[list[Quaternion], list[list[Fraction]]]:
    basis = _reduced_basis(lat)
    gram = [[_bilinear(u, v) for v in basis] for u in basis]
    return basis, gram


def _isqrt_upper(f: Fraction) -> Fraction:
    """A rational upper bound on sqrt(f) for f >= 0 (outward rounding)."""
    if f < 0:
        raise ValueError("negative radicand")
    num, den = f.numerator, f.denominator
    return Fraction(math.isqrt(num * den) + 1, den)


def _cholesky(gram: list[list[Fraction]]):
    """Lagrange decomposition Q(x) = sum_i d_i (x_i + sum_{j>i} u_ij x_j)^2."""
    n = len(gram)
    c = [[Fraction(gram[i][j]) for j in range(n)] for i in range(n)]
    d = [Fraction(0)] * n
    u = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        d[i] = c[i][i]
        if d[i] <= 0:
            raise ValueError("form is not positive definite")
        for j in range(i + 1, n):
            u[i][j] = c[i][j] / d[i]
        for k in range(i + 1, n):
            for l in range(k, n):
                c[k][l] -= c[i][k] * c[i][l] / d[i]
                c[l][k] = c[k][l]
    return d, u


def short_vectors(gram: list[list[Fraction]], bound: Fraction):
    """Yield (coords, value) with 0 < Q(coords) <= bound, one per +/- pair.

    Exact rational Cholesky with outward-rounded coordinate ranges; every
    candidate is re-checked exactly, so rounding never changes the output.
    """
    n = len(gram)
    bound = Fraction(bound)
    if bound <= 0:
        return
    d, u = _cholesky(gram)
    x = [0] * n

    def rec(i: int, remaining: Fraction, acc: Fraction, all_outer_zero: bool):
        center = sum(u[i][j] * x[j] for j in range(i + 1, n))
        radius = _isqrt_upper(remaining / d[i])
        lo = math.ceil(-center - radius)
        hi = math.floor(-center + radius)
        if all_outer_zero:
            lo = max(lo, 0)
        for xi in range(lo, hi + 1):
            term = d[i] * (xi + center) ** 2
            if term > remaining:
                continue
            x[i] = xi
            if i == 0:
                value = acc + term
                if value > 0:
                    yield (tuple(x), value)
            else:
                yield from rec(i - 1, remaining - term, acc + term, all_outer_zero and xi == 0)
        x[i] = 0

    yield from rec(n - 1, bound, Fraction(0), True)


def count_by_norm(lat: QuatLattice, n_max: int) -> list[int]:
    """r(n) = #{alpha in L : nrd(alpha) = n * nrd(L)} for n = 0..n_max.

    Fincke-Pohst route; each +/- pair counts twice, r(0) counts only zero.
    """
    nl = reduced_norm(lat)
    _, gram = _reduced_gram(lat)
    counts = [0] * (n_max + 1)
    counts[0] = 1
    for _, value in short_vectors(gram, n_max * nl):
        ratio = value / nl
        if ratio.denominator != 1:
            raise ArithmeticError("element norm is not a multiple of the lattice norm")
        counts[int(ratio)] += 2
    return counts


def minimal_vector(lat: QuatLattice) -> tuple[Quaternion, Fraction]:
    """A nonzero lattice element of minimal reduced norm."""
    nl = reduced_norm(lat)
    basis, gram = _reduced_gram(lat)
    bound = nl
    while True:
        best = None
        for coords, value in short_vectors(gram, bound):
            if best is None or value < best[1]:
                best = (coords, value)
        if best is not None:
            coords, value = best
            q = basis[0].scale(coords[0])
            for i in range(1, 4):
                q = q + basis[i].scale(coords[i])
            return q, value
        bound *= 2


def unit_count(order: QuatLattice) -> int:
    """Number of units (reduced norm 1) in an order."""
    _, gram = _reduced_gram(order)
    hits = sum(1 for _, value in short_vectors(gram, Fraction(1)) if value == 1)
    count = 2 * hits
    if count not in (2, 4, 6, 8, 12, 24):
        raise ArithmeticError(f"implausible unit count {count}")
    return count


def is_equivalent(a: QuatLattice, b: QuatLattice) -> bool:
    """Right-ideal equivalence: I = alpha J for some unit alpha of the algebra.

    Holds iff the lattice I * conj(J) contains an element of reduced norm
    nrd(I) * nrd(J), the minimal possible value.
    """
    prod = ideal_mul(a, ideal_conjugate(b))
    target = reduced_norm(a) * reduced_norm(b)
    _, gram = _reduced_gram(prod)
    for _, value in short_vectors(gram, target):
        if value == target:
            return True
    return False


# ---------------------------------------------------------------------------
# maximal order and class set


@lru_cache(maxsize=None)
def algebra_setup(p: int) -> tuple[QuaternionAlgebra, QuatLattice]:
    """The algebra and a maximal order with basis {1, i, (i+j)/2, (1+k)/2}.

    Maximality is certified by the discriminant: det trd-gram = p^2.
    """
    alg = QuaternionAlgebra(p)
    half = Fraction(1, 2)
    gens = [
        alg.quaternion(1),
        alg.quaternion(0, 1),
        alg.quaternion(0, half, half, 0),
        alg.quaternion(half, 0, 0, half),
    ]
    order = QuatLattice.from_generators(alg, gens)
    if gram_det(order) != p * p:
        raise ArithmeticError("constructed order is not maximal")
    return alg, order


def maximal_order(p: int) -> QuatLattice:
    return algebra_setup(p)[1]


@dataclass(frozen=True)
class ClassSet:
    """Right ideal classes of the maximal order, with unit-group weights.

    Termination certificate: sum of 1/w_i equals (p-1)/24 exactly.
    """

    p: int
    reps: tuple[QuatLattice, ...]
    weights: tuple[int, ...]

    def __post_init__(self):
        mass = sum(Fraction(1, w) for w in self.weights)
        if mass != Fraction(self.p - 1, 24):
            raise ValueError("class weights violate the mass formula")

    @property
    def h(self) -> int:
        return len(self.reps)


def _dim2_subspaces() -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Canonical bases of the 35 two-dimensional subspaces of GF(2)^4."""
    seen = set()
    out = []
    vecs = [tuple((v >> (3 - b)) & 1 for b in range(4)) for v in range(1, 16)]
    for i, u in enumerate(vecs):
        for w in vecs[i + 1 :]:
            full = frozenset(
                tuple((c * u[t] ^ d * w[t]) & 1 for t in range(4))
                for c in (0, 1)
                for d in (0, 1)
            )
            if full in seen:
                continue
            seen.add(full)
            out.append((u, w))
    if len(out) != 35:
        raise AssertionError("subspace enumeration is broken")
    return out


_DIM2 = _dim2_subspaces()


def _norm2_neighbors(lat: QuatLattice, order: QuatLattice) -> list[QuatLattice]:
    """The three right-ideal neighbors of index 4 with doubled reduced norm."""
    basis = lat.basis()
    order_basis = order.basis()
    target = 2 * reduced_norm(lat)
    found = []
    for u, w in _DIM2:
        g1 = _combine(basis, u)
        g2 = _combine(basis, w)
        gens = [g1, g2] + [b.scale(2) for b in basis]
        cand = QuatLattice.from_generators(lat.alg, gens)
        stable = all(
            cand.contains(g * e) for g in (g1, g2) for e in order_basis
        )
        if not stable:
            continue
        if reduced_norm(cand) != target:
            continue
        if cand not in found:
            found.append(cand)
    if len(found) != 3:
        raise ArithmeticError(f"expected 3 norm-2 neighbors, found {len(found)}")
    return found


def _combine(basis: list[Quaternion], coeffs) -> Quaternion:
    q = basis[0].scale(coeffs[0])
    for i in range(1, 4):
        if coeffs[i]:
            q = q + basis[i].scale(coeffs[i])
    return q


def _reduce_class_rep(lat: QuatLattice) -> QuatLattice:
    """Equivalent ideal of minimal reduced norm: (conj(alpha)/nrd) * I."""
    alpha, _ = minimal_vector(lat)
    n = reduced_norm(lat)
    factor = alpha.conjugate()
    gens = [(factor * b).scale(Fraction(1, 1) / n) for b in lat.basis()]
    return QuatLattice.from_generators(lat.alg, gens)


@lru_cache(maxsize=None)
def enumerate_classes(p: int) -> ClassSet:
    """BFS over norm-2 neighbors, terminating on the exact mass (p-1)/24."""
    alg, order = algebra_setup(p)
    target = Fraction(p - 1, 24)
    reps = [order]
    weights = [unit_count(order)]
    mass = Fraction(1, weights[0])
    if mass > target:
        raise ArithmeticError("mass overshoot at the trivial class")
    queue = [0]
    while queue and mass < target:
        current = reps[queue.pop(0)]
        for neighbor in _norm2_neighbors(current, order):
            cand = _reduce_class_rep(neighbor)
            if any(is_equivalent(cand, r) for r in reps):
                continue
            w = unit_count(left_order(cand))
            reps.append(cand)
            weights.append(w)
            mass += Fraction(1, w)
            queue.append(len(reps) - 1)
            if mass > target:
                raise ArithmeticError("mass overshoot: equivalence test is broken")
        if mass == target:
            break
    if mass != target:
        raise ArithmeticError("class enumeration incomplete (mass shortfall)")
    return ClassSet(p=p, reps=tuple(reps), weights=tuple(weights))


def sigma_prime(n: int, p: int) -> int:
    """Sum of divisors of n coprime to p."""
    return sum(d for d in range(1, n + 1) if n % d == 0 and math.gcd(d, p) == 1)


class BrandtTable:
    """Integer matrices of the Hecke action on ideal classes.

    The raw count matrix R(n)_{ij} = #{alpha in I_j I_i^{-1} : nrd = n nrd}
    is symmetric; the weight division that satisfies the row-sum and
    weighted-symmetry invariants is by the column weight w_j, which is
    checked (against the alternative row division) on first use.
    """

    def __init__(self, class_set: ClassSet):
        self.class_set = class_set
        self.p = class_set.p
        self.weights = class_set.weights
        self._pair_lattices = {}
        self._pair_counts: dict[tuple[int, int], list[int]] = {}
        self._matrices: dict[int, np.ndarray] = {}
        self.convention = None
        self._resolve_convention()

    def pair_lattice(self, i: int, j: int) -> QuatLattice:
        if (i, j) not in self._pair_lattices:
            cs = self.class_set
            self._pair_lattices[(i, j)] = ideal_mul(
                cs.reps[j], ideal_inverse(cs.reps[i])
            )
        return self._pair_lattices[(i, j)]

    def _counts(self, i: int, j: int, n_max: int) -> list[int]:
        have = self._pair_counts.get((i, j))
        if have is None or len(have) <= n_max:
            self._pair_counts[(i, j)] = count_by_norm(self.pair_lattice(i, j), n_max)
        return self._pair_counts[(i, j)]

    def raw_counts(self, n: int) -> np.ndarray:
        h = self.class_set.h
        out = np.zeros((h, h), dtype=np.int64)
        for i in range(h):
            for j in range(h):
                out[i, j] = self._counts(i, j, n)[n]
        return out

    def _candidates(self, n: int):
        raw = self.raw_counts(n)
        w = np.array(self.weights, dtype=np.int64)
        by_col = raw // w[None, :]
        by_row = raw // w[:, None]
        ok_col = (by_col * w[None, :] == raw).all()
        ok_row = (by_row * w[:, None] == raw).all()
        return raw, (by_col if ok_col else None), (by_row if ok_row else None)

    def _invariants_hold(self, mat: np.ndarray, n: int) -> bool:
        if mat is None:
            return False
        if not (mat.sum(axis=1) == sigma_prime(n, self.p)).all():
            return False
        # weighted symmetry: diag(1/w) B symmetric, i.e. B_ij w_j == B_ji w_i
        w = self.weights
        h = mat.shape[0]
        for i in range(h):
            for j in range(h):
                if mat[i, j] * w[j] != mat[j, i] * w[i]:
                    return False
        return True

    def _resolve_convention(self):
        n = 2  # coprime to p since p = 3 (mod 4)
        raw, by_col, by_row = self._candidates(n)
        col_ok = self._invariants_hold(by_col, n)
        row_ok = self._invariants_hold(by_row, n)
        if col_ok and row_ok and not np.array_equal(by_col, by_row):
            raise ArithmeticError("weight conventions disagree yet both pass")
        if col_ok:
            self.convention = "column-weight"
        elif row_ok:
            self.convention = "row-weight"
        else:
            raise ArithmeticError("no weight convention satisfies the Brandt invariants")

    def matrix(self, n: int) -> np.ndarray:
        if n < 1:
            raise ValueError("n must be positive")
        if math.gcd(n, self.p) != 1:
            raise ValueError("n must be coprime to p")
        if n not in self._matrices:
            raw, by_col, by_row = self._candidates(n)
            mat = by_col if self.convention == "column-weight" else by_row
            if mat is None:
                raise ArithmeticError("weight division is not integral")
            if not self._invariants_hold(mat, n):
                raise ArithmeticError(f"Brandt invariants fail at n = {n}")
            mat.flags.writeable = False
            self._matrices[n] = mat
        return self._matrices[n]


@lru_cache(maxsize=None)
def brandt_table(p: int) -> BrandtTable:
    return BrandtTable(enumerate_classes(p))


def brandt_matrix(class_set: ClassSet, n: int) -> np.ndarray:
    table = brandt_table(class_set.p)
    if table.class_set != class_set:
        table = BrandtTable(class_set)
    return table.matrix(n)


def theta_coefficients(class_set: ClassSet, i: int, j: int, n_max: int) -> list[int]:
    """Representation numbers of the pair quadratic form, by box enumeration.

    Independent of the Fincke-Pohst route used for Brandt matrices: bounds
    come from the inverse Gram diagonal and every point in the box is tested
    with exact integer arithmetic.
    """
    lat = ideal_mul(class_set.reps[j], ideal_inverse(class_set.reps[i]))
    nl = reduced_norm(lat)
    _, gram = _reduced_gram(lat)
    inv = _frac_inv(gram)
    bound = n_max * nl

    # integer-scaled form: x G x^T * scale is integral
    den = 1
    for row in gram:
        for v in row:
            den = den * v.denominator // math.gcd(den, v.denominator)
    gi = [[int(v * den) for v in row] for row in gram]
    target_scale = bound * den
    if (nl * den).denominator != 1:
        raise ArithmeticError("unexpected denominator in scaled norms")
    nl_int = int(nl * den)

    ranges = []
    for t in range(4):
        r = _isqrt_upper(bound * inv[t][t])
        ranges.append(math.floor(r) + 1)

    counts = [0] * (n_max + 1)
    counts[0] = 1
    b0, b1, b2, b3 = ranges
    for x0 in range(-b0, b0 + 1):
        for x1 in range(-b1, b1 + 1):
            for x2 in range(-b2, b2 + 1):
                for x3 in range(-b3, b3 + 1):
                    if not (x0 or x1 or x2 or x3):
                        continue
                    v = _q_int(gi, x0, x1, x2, x3)
                    if v <= target_scale and v % nl_int == 0:
                        n = v // nl_int
                        if 1 <= n <= n_max:
                            counts[n] += 1
    return counts


def _q_int(g, x0, x1, x2, x3):
    return (
        g[0][0] * x0 * x0
        + g[1][1] * x1 * x1
        + g[2][2] * x2 * x2
        + g[3][3] * x3 * x3
        + 2 * (g[0][1] * x0 * x1 + g[0][2] * x0 * x2 + g[0][3] * x0 * x3)
        + 2 * (g[1][2] * x1 * x2 + g[1][3] * x1 * x3)
        + 2 * (g[2][3] * x2 * x3)
    )

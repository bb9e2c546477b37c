"""Quaternion quantum money (simulated) and the eigenform-reconstruction attack.

Money states are unit vectors over the ideal-class basis; Hecke eigenvalues
play serial numbers.  The attack rebuilds the eigenvector from approximate
prime eigenvalues by solving the linear system whose matrix pairs Hecke
translates of a pivot class against all classes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quatalg import BrandtTable, sigma_prime
from .statevec import StateVector, tensor, trace_distance_pure

__all__ = [
    "EigenBasis",
    "QMBanknote",
    "ReductionSystem",
    "SingularReductionError",
    "DegenerateSpectrumError",
    "compute_eigenbasis",
    "mint",
    "verify",
    "build_reduction",
    "attack_reconstruct",
    "eigenvalue_of",
    "prime_factorization",
    "tensor_eigenvalue_state",
    "direct_eigenvalue_state",
]

RESIDUAL_TOL = 1e-9
CONDITION_LIMIT = 1e12


class DegenerateSpectrumError(RuntimeError):
    """Random Hecke combinations failed to split the spectrum."""


class SingularReductionError(RuntimeError):
    """The reduction matrix is singular or numerically unusable."""

    def __init__(self, message: str, condition: float = math.inf):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class EigenBasis:
    """Simultaneous eigenvectors of the Brandt matrices.

    vectors[t] is a unit vector (plain Euclidean norm) over the class basis;
    eigentable[(t, l)] is its eigenvalue under the l-th Hecke operator.
    """

    p: int
    vectors: np.ndarray
    eigentable: dict[tuple[int, int], float]
    eisenstein_index: int
    primes: tuple[int, ...]
    brandt: BrandtTable = field(repr=False)

    @property
    def h(self) -> int:
        return self.vectors.shape[0]

    @property
    def cusp_indices(self) -> tuple[int, ...]:
        return tuple(t for t in range(self.h) if t != self.eisenstein_index)

    @property
    def weights(self) -> tuple[int, ...]:
        return self.brandt.weights


def _symmetrized(bt: BrandtTable, n: int) -> np.ndarray:
    w = np.array(bt.weights, dtype=np.float64)
    scale = np.sqrt(w)
    return bt.matrix(n).astype(np.float64) * (scale[None, :] / scale[:, None])


def compute_eigenbasis(
    bt: BrandtTable, primes, rng: np.random.Generator, tol: float = RESIDUAL_TOL
) -> EigenBasis:
    """Joint diagonalization of the Hecke action on class-coefficient vectors.

    Eigenforms are coefficient vectors of formal class sums, i.e. eigenvectors
    of the transposed Brandt matrices; the weight symmetrization makes one
    symmetric matrix serve both sides.  A random positive combination of the
    symmetrized operators splits degeneracies; per-prime eigenvalues come out
    as Rayleigh quotients.  Retries the combination up to three times and
    reports residual degeneracy instead of guessing.
    """
    primes = tuple(primes)
    if len(primes) < 2:
        raise ValueError("need at least two primes")
    for ell in primes:
        if ell % bt.p == 0:
            raise ValueError("primes must be coprime to p")
    h = bt.class_set.h
    w = np.array(bt.weights, dtype=np.float64)
    sym = {ell: _symmetrized(bt, ell) for ell in primes}
    mats = {ell: bt.matrix(ell).astype(np.float64) for ell in primes}

    for _ in range(3):
        coeffs = rng.uniform(0.5, 1.5, size=len(primes))
        combo = sum(c * sym[ell] for c, ell in zip(coeffs, primes))
        vals, vecs = np.linalg.eigh(combo)
        gaps = np.diff(np.sort(vals))
        if h > 1 and gaps.size and gaps.min() < 1e-8 * max(1.0, np.abs(vals).max()):
            continue

        vectors = np.empty((h, h))
        table: dict[tuple[int, int], float] = {}
        ok = True
        for t in range(h):
            phi = vecs[:, t] / np.sqrt(w)
            phi = phi / np.linalg.norm(phi)
            if phi[np.argmax(np.abs(phi))] < 0:
                phi = -phi
            vectors[t] = phi
            v = vecs[:, t]
            for ell in primes:
                a = float(v @ sym[ell] @ v)
                if np.linalg.norm(mats[ell].T @ phi - a * phi) > tol:
                    ok = False
                    break
                table[(t, ell)] = a
            if not ok:
                break
        if not ok:
            continue

        eis = 2.0 / w
        eis = eis / np.linalg.norm(eis)
        overlaps = np.abs(vectors @ eis)
        eidx = int(np.argmax(overlaps))
        if overlaps[eidx] < 1.0 - 1e-9:
            continue
        for ell in primes:
            if abs(table[(eidx, ell)] - sigma_prime(ell, bt.p)) > 1e-6:
                raise AssertionError("Eisenstein eigenvalue mismatch")
        return EigenBasis(
            p=bt.p,
            vectors=vectors,
            eigentable=table,
            eisenstein_index=eidx,
            primes=primes,
            brandt=bt,
        )
    raise DegenerateSpectrumError(
        "failed to split the Hecke spectrum with three random combinations"
    )


def prime_factorization(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    f = 2
    while f * f <= n:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def eigenvalue_of(basis: EigenBasis, form: int, n: int) -> float:
    """Eigenvalue of the n-th Hecke operator via multiplicativity.

    Coprime factors multiply; prime powers follow the weight-2 recursion
    a(l^(r+1)) = a(l^r) a(l) - l a(l^(r-1)).
    """
    if n < 1:
        raise ValueError("n must be positive")
    if math.gcd(n, basis.p) != 1:
        raise ValueError("n must be coprime to p")
    value = 1.0
    for ell, power in prime_factorization(n).items():
        if (form, ell) not in basis.eigentable:
            raise KeyError(f"prime {ell} not in the eigenvalue table")
        a1 = basis.eigentable[(form, ell)]
        prev, cur = 1.0, a1
        for _ in range(power - 1):
            prev, cur = cur, cur * a1 - ell * prev
        value *= cur
    return value


@dataclass(frozen=True)
class QMBanknote:
    """Serial of approximate eigenvalues plus the simulated money vector."""

    operators: tuple[int, ...]
    serial: tuple[float, ...]
    money: np.ndarray
    signature: None = None  # classical signature layer is out of scope

    def __post_init__(self):
        if abs(np.linalg.norm(self.money) - 1.0) > 1e-9:
            raise ValueError("money vector must be a unit vector")


def mint(
    basis: EigenBasis, operators, noise: float, rng: np.random.Generator
) -> QMBanknote:
    """Issue a banknote for a random cusp eigenform with bounded serial noise."""
    if noise < 0:
        raise ValueError("noise must be non-negative")
    operators = tuple(int(n) for n in operators)
    form = int(rng.choice(basis.cusp_indices))
    serial = tuple(
        eigenvalue_of(basis, form, n) + (rng.uniform(-noise, noise) if noise else 0.0)
        for n in operators
    )
    return QMBanknote(operators=operators, serial=serial, money=basis.vectors[form].copy())


def _petersson_rayleigh(basis: EigenBasis, money: np.ndarray, n: int) -> float:
    """Rayleigh quotient of the Hecke action in the Petersson inner product.

    The action on coefficient vectors is the transposed Brandt matrix, which
    is Hermitian for <u, v> = sum_j u_j v_j w_j / 2.
    """
    w = np.array(basis.weights, dtype=np.float64)
    bn = basis.brandt.matrix(n).astype(np.float64)
    num = float((money * w / 2.0) @ (bn.T @ money))
    den = float((money * w / 2.0) @ money)
    return num / den


def verify(basis: EigenBasis, note: QMBanknote, tol: float) -> bool:
    """Accept iff every recomputed Rayleigh quotient matches its serial entry."""
    for n, b in zip(note.operators, note.serial):
        if abs(_petersson_rayleigh(basis, note.money, n) - b) > tol:
            return False
    return True


@dataclass(frozen=True)
class ReductionSystem:
    """Linear system pairing Hecke translates of a pivot class with all classes.

    Row j uses the operator index n_j = prod(l_t ^ b_t) where b_1 ... b_s are
    the binary digits of j, most significant first, so row 0 is the Petersson
    row of the identity operator.
    """

    pivot: int
    primes: tuple[int, ...]
    indices: tuple[int, ...]
    matrix: np.ndarray
    condition: float
    weights: tuple[int, ...]


def reduction_indices(h: int, primes) -> tuple[int, ...]:
    primes = tuple(primes)
    s = max(1, math.ceil(math.log2(h))) if h > 1 else 1
    if len(primes) < s:
        raise ValueError(f"need at least {s} primes for h = {h}")
    out = []
    for j in range(h):
        n = 1
        for t in range(s):
            bit = (j >> (s - 1 - t)) & 1
            if bit:
                n *= primes[t]
        out.append(n)
    return tuple(out)


def build_reduction(basis: EigenBasis, bt: BrandtTable, pivot: int) -> ReductionSystem:
    """Assemble the system matrix A[i][j] = <T_{n_i}[I_pivot], [I_j]>."""
    h = bt.class_set.h
    if not 0 <= pivot < h:
        raise ValueError("pivot out of range")
    s = max(1, math.ceil(math.log2(h))) if h > 1 else 1
    indices = reduction_indices(h, basis.primes[:s])
    for n in indices:
        if math.gcd(n, bt.p) != 1:
            raise ValueError("operator index shares a factor with p")
    w = np.array(bt.weights, dtype=np.float64)
    rows = []
    for n in indices:
        bn = bt.matrix(n).astype(np.float64)
        rows.append(bn[pivot, :] * w / 2.0)
    a = np.array(rows)
    condition = float(np.linalg.cond(a))
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise SingularReductionError(
            f"reduction matrix unusable (condition {condition:.3e})", condition
        )
    return ReductionSystem(
        pivot=pivot,
        primes=tuple(basis.primes[:s]),
        indices=indices,
        matrix=a,
        condition=condition,
        weights=bt.weights,
    )


def _product_values(rs: ReductionSystem, prime_values: dict[int, float]) -> np.ndarray:
    out = []
    s = len(rs.primes)
    for j in range(len(rs.indices)):
        v = 1.0
        for t in range(s):
            if (j >> (s - 1 - t)) & 1:
                v *= prime_values[rs.primes[t]]
        out.append(v)
    return np.array(out)


def attack_reconstruct(
    rs: ReductionSystem,
    prime_values: dict[int, float],
    reference_values: dict[int, float] | None = None,
) -> tuple[np.ndarray, dict]:
    """Solve for the money vector from (approximate) prime eigenvalues.

    Right-hand side entries are products of prime eigenvalue estimates per
    the squarefree operator indices.  The solve is a rank-revealing least
    squares with one step of iterative refinement; the normalized solution is
    the reconstructed state.  Diagnostics report the residual, the condition
    number and, when reference values are supplied, the tensor-state trace
    distances of the serial-state construction.
    """
    if not np.isfinite(rs.condition) or rs.condition > CONDITION_LIMIT:
        raise SingularReductionError(
            f"reduction system is ill-conditioned ({rs.condition:.3e})", rs.condition
        )
    a = rs.matrix
    rhs = _product_values(rs, prime_values)
    x, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    resid = rhs - a @ x
    dx, *_ = np.linalg.lstsq(a, resid, rcond=None)
    x = x + dx
    norm = np.linalg.norm(x)
    if norm < 1e-12:
        raise SingularReductionError("reconstructed vector vanished", rs.condition)
    phi = x / norm
    if phi[np.argmax(np.abs(phi))] < 0:
        phi = -phi
    diagnostics = {
        "residual": float(np.linalg.norm(a @ x - rhs)),
        "condition": rs.condition,
        "indices": rs.indices,
    }
    if reference_values is not None:
        noisy = tensor_eigenvalue_state(rs.primes, prime_values)
        exact = tensor_eigenvalue_state(rs.primes, reference_values)
        per_factor = [
            trace_distance_pure(
                _single_qubit_value_state(prime_values[ell]),
                _single_qubit_value_state(reference_values[ell]),
            )
            for ell in rs.primes
        ]
        diagnostics["product_trace_distance"] = trace_distance_pure(noisy, exact)
        diagnostics["factor_trace_distances"] = per_factor
        diagnostics["subadditivity_slack"] = sum(per_factor) - diagnostics[
            "product_trace_distance"
        ]
    return phi, diagnostics


def _single_qubit_value_state(a: float) -> StateVector:
    amp = np.array([1.0, a], dtype=np.complex128)
    return StateVector(amp / np.linalg.norm(amp))


def tensor_eigenvalue_state(primes, values: dict[int, float]) -> StateVector:
    """Product state over one qubit per prime: (|0> + a_l |1>) normalized."""
    factors = [_single_qubit_value_state(values[ell]) for ell in primes]
    return tensor(*factors)


def direct_eigenvalue_state(primes, values_by_index: dict[int, float]) -> StateVector:
    """State proportional to sum_j a_{n_j} |j> over the full product grid."""
    s = len(tuple(primes))
    amps = np.array(
        [values_by_index[j] for j in range(1 << s)], dtype=np.complex128
    )
    return StateVector(amps / np.linalg.norm(amps))

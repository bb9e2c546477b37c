"""Multivariate-hash quantum money at desk scale and the bolt-cloning attack.

The hash is x -> (x^T A_1 x, ..., x^T A_n x) over GF(2) with upper-triangular
A_i.  Every quantity has a brute-force oracle: the full hash table over the
2^m inputs drives the preimage census, exact bolt components, the phi-basis
states, and the verifier's span projector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .f2core import BitMatrix, BitVector, enumerate_elements, kernel_basis
from .statevec import RegisterLayout, StateVector, compute_into, measure_register

__all__ = [
    "MVHashKey",
    "PreimageCensus",
    "BoltComponent",
    "CloneResult",
    "RankDefectError",
    "mv_keygen",
    "mv_hash",
    "mv_hash_bilinear",
    "census",
    "bolt_component",
    "make_phi",
    "phi_matrix",
    "phi_gram",
    "recover_r",
    "mv_verify",
    "mv_verify_ancilla",
    "verify_profile",
    "verify_profile_ancilla",
    "attack_clone",
    "full_bolt",
    "validate_scheme_params",
]

CENSUS_CAP = 22
ANCILLA_QUBIT_CAP = 14
RECOVER_MIN_OVERLAP = 0.9
GRAM_TOL = 1e-9


class RankDefectError(RuntimeError):
    """The phi states are not an orthonormal family for this key."""


class MVHashKey:
    """n upper-triangular m x m GF(2) matrices defining the quadratic hash."""

    def __init__(self, m: int, n: int, matrices):
        if not m > n:
            raise ValueError("need m > n")
        mats = []
        for a in matrices:
            arr = (np.asarray(a) & 1).astype(np.uint8)
            if arr.shape != (m, m):
                raise ValueError("matrix shape mismatch")
            if np.tril(arr, -1).any():
                raise ValueError("matrices must be upper triangular")
            arr.flags.writeable = False
            mats.append(arr)
        if len(mats) != n:
            raise ValueError("need exactly n matrices")
        self.m = m
        self.n = n
        self.matrices = tuple(mats)
        self._table = None
        self._phi = None

    def hash_table(self) -> np.ndarray:
        """f(x) for every x in GF(2)^m, indexed big-endian; cached."""
        if self._table is None:
            m, n = self.m, self.n
            if m > CENSUS_CAP:
                raise ValueError(f"m > {CENSUS_CAP} exceeds the enumeration cap")
            shifts = m - 1 - np.arange(m, dtype=np.int64)
            X = ((np.arange(1 << m, dtype=np.int64)[:, None] >> shifts) & 1).astype(
                np.int64
            )
            table = np.zeros(1 << m, dtype=np.int64)
            for i, A in enumerate(self.matrices):
                bits = ((X @ A.astype(np.int64)) * X).sum(axis=1) & 1
                table = (table << 1) | bits
            table.flags.writeable = False
            self._table = table
        return self._table


def mv_keygen(m: int, n: int, rng: np.random.Generator) -> MVHashKey:
    mats = []
    for _ in range(n):
        a = rng.integers(0, 2, size=(m, m), dtype=np.uint8)
        mats.append(np.triu(a))
    return MVHashKey(m, n, mats)


def mv_hash(key: MVHashKey, x: BitVector) -> BitVector:
    """Hash output bit i is the quadratic form x^T A_i x over GF(2)."""
    if x.length != key.m:
        raise ValueError("input length mismatch")
    xb = x.bits.astype(np.int64)
    bits = [int((xb @ A.astype(np.int64) @ xb) & 1) for A in key.matrices]
    return BitVector(bits)


def mv_hash_bilinear(key: MVHashKey, x: BitVector) -> BitVector:
    """Independent oracle: explicit sum of a_jk x_j x_k over j <= k."""
    if x.length != key.m:
        raise ValueError("input length mismatch")
    bits = []
    for A in key.matrices:
        acc = 0
        for j, k in zip(*np.nonzero(A)):
            acc ^= int(x[int(j)]) & int(x[int(k)])
        bits.append(acc)
    return BitVector(bits)


@dataclass(frozen=True)
class PreimageCensus:
    """Exact preimage counts C_y for every output y."""

    m: int
    n: int
    counts: np.ndarray

    def __post_init__(self):
        if int(self.counts.sum()) != 1 << self.m:
            raise ValueError("census counts must sum to 2^m")
        self.counts.flags.writeable = False

    def count_of(self, y: BitVector) -> int:
        return int(self.counts[y.to_index()])

    @property
    def surjective(self) -> bool:
        return bool((self.counts > 0).all())


def census(key: MVHashKey) -> PreimageCensus:
    table = key.hash_table()
    counts = np.bincount(table, minlength=1 << key.n)
    return PreimageCensus(m=key.m, n=key.n, counts=counts)


@dataclass(frozen=True)
class BoltComponent:
    """One bolt factor: a uniform superposition over the preimages of the serial."""

    serial: BitVector
    state: StateVector


def bolt_component(key: MVHashKey, y: BitVector) -> BoltComponent:
    """Exact bolt component built from the hash table."""
    table = key.hash_table()
    idx = np.nonzero(table == y.to_index())[0]
    if idx.size == 0:
        raise ValueError("serial has no preimages for this key")
    amps = np.zeros(1 << key.m, dtype=np.complex128)
    amps[idx] = 1.0 / math.sqrt(idx.size)
    return BoltComponent(serial=y, state=StateVector(amps))


def make_phi(key: MVHashKey, r: BitVector) -> StateVector:
    """Phase state 2^(-m/2) sum_x (-1)^(r.f(x)) |x>."""
    if r.length != key.n:
        raise ValueError("r must have n bits")
    table = key.hash_table()
    parity = _parity_table(key.n)
    signs = 1.0 - 2.0 * parity[np.bitwise_and(table, r.to_index())]
    return StateVector(signs.astype(np.complex128) / math.sqrt(1 << key.m))


def _parity_table(bits: int) -> np.ndarray:
    size = 1 << bits
    t = np.arange(size, dtype=np.int64)
    parity = np.zeros(size, dtype=np.int64)
    while t.any():
        parity ^= t & 1
        t >>= 1
    return parity


def phi_matrix(key: MVHashKey) -> np.ndarray:
    """(2^n x 2^m) matrix whose rows are the phi states; cached on the key."""
    if key._phi is None:
        rows = [
            make_phi(key, BitVector.from_index(ri, key.n)).amplitudes
            for ri in range(1 << key.n)
        ]
        phi = np.array(rows)
        phi.flags.writeable = False
        key._phi = phi
    return key._phi


def phi_gram(key: MVHashKey) -> np.ndarray:
    phi = phi_matrix(key)
    return phi @ phi.conj().T


def recover_r(key: MVHashKey, psi: StateVector) -> BitVector:
    """Recover r from a state close to |phi_r> by exhaustive overlap search.

    Desk-scale oracle standing in for the published recovery algorithm; valid
    because n is small.  Raises if no candidate reaches overlap 0.9.
    """
    overlaps = np.abs(phi_matrix(key) @ psi.amplitudes.conj())
    best = int(np.argmax(overlaps))
    if overlaps[best] < RECOVER_MIN_OVERLAP:
        raise ValueError(
            f"no phi state has overlap >= {RECOVER_MIN_OVERLAP} (best {overlaps[best]:.3f})"
        )
    return BitVector.from_index(best, key.n)


def _span_projection(key: MVHashKey, amps: np.ndarray) -> np.ndarray:
    """Project onto the span of the bolt components (= span of the phi states)."""
    table = key.hash_table()
    counts = np.bincount(table, minlength=1 << key.n).astype(np.float64)
    sums = np.zeros(1 << key.n, dtype=np.complex128)
    np.add.at(sums, table, amps)
    means = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    return means[table]


def verify_profile(key: MVHashKey, y: BitVector, psi: StateVector):
    """Deterministic acceptance data for the two-step verifier.

    Returns (pass_probability, outcome_distribution, post_states) where the
    distribution is over measured serials conditioned on passing the span
    projection.
    """
    amps = psi.amplitudes
    projected = _span_projection(key, amps)
    p_pass = float(np.vdot(projected, projected).real)
    outcomes = {}
    posts = {}
    if p_pass > 1e-15:
        normalized = projected / math.sqrt(p_pass)
        table = key.hash_table()
        weights = np.abs(normalized) ** 2
        dist = np.bincount(table, weights=weights, minlength=1 << key.n)
        for y_idx in np.nonzero(dist > 1e-15)[0]:
            sel = table == y_idx
            post = np.where(sel, normalized, 0.0)
            post = post / math.sqrt(float(np.vdot(post, post).real))
            outcomes[int(y_idx)] = float(dist[y_idx])
            posts[int(y_idx)] = post
    return p_pass, outcomes, posts


def mv_verify(
    key: MVHashKey, y: BitVector, psi: StateVector, rng: np.random.Generator
) -> tuple[bool, StateVector | None]:
    """Two-step verification: project onto the bolt span, then measure the serial.

    The span projection is realized exactly (the compute-r/uncompute sequence
    collapses to it at desk scale); the serial measurement is Born-sampled.
    """
    p_pass, outcomes, posts = verify_profile(key, y, psi)
    if rng.random() >= p_pass:
        return False, None
    y_indices = sorted(outcomes)
    probs = np.array([outcomes[i] for i in y_indices])
    probs = probs / probs.sum()
    drawn = int(rng.choice(len(y_indices), p=probs))
    y_idx = y_indices[drawn]
    post = StateVector(posts[y_idx])
    return y_idx == y.to_index(), post


def _require_orthonormal_phi(key: MVHashKey) -> None:
    gram = phi_gram(key)
    defect = np.max(np.abs(gram - np.eye(gram.shape[0])))
    if defect > GRAM_TOL:
        raise RankDefectError(
            f"phi states are not orthonormal (gram defect {defect:.3e}); "
            f"rank {np.linalg.matrix_rank(phi_matrix(key))} of {1 << key.n}"
        )


def verify_profile_ancilla(key: MVHashKey, y: BitVector, psi: StateVector):
    """Register-level variant of the verifier profile.

    Simulates the compute-r / uncompute-state / measure-zero / recompute
    sequence explicitly.  Only defined when the phi family is orthonormal;
    otherwise the compute-r step has no unitary extension and a rank-defect
    error is raised.
    """
    m, n = key.m, key.n
    if m + n > ANCILLA_QUBIT_CAP:
        raise ValueError("register simulation exceeds the ancilla qubit cap")
    _require_orthonormal_phi(key)

    phi = phi_matrix(key)
    alphas = phi.conj() @ psi.amplitudes
    residual = psi.amplitudes - phi.T @ alphas

    # joint (r-register, state-register) after computing r and uncomputing the
    # state register: sum_r alpha_r |r>|0> + |0>|P_0 residual>, with P_0 any
    # unitary sending phi_0 to |0...0>; the residual never reaches outcome 0
    # of the state measurement because it is orthogonal to phi_0.
    p_pass = float(np.sum(np.abs(alphas) ** 2))
    outcomes = {}
    posts = {}
    if p_pass > 1e-15:
        kept = alphas / math.sqrt(p_pass)
        projected = phi.T @ kept  # recompute phi_r and uncompute r
        table = key.hash_table()
        weights = np.abs(projected) ** 2
        dist = np.bincount(table, weights=weights, minlength=1 << n)
        for y_idx in np.nonzero(dist > 1e-15)[0]:
            sel = table == y_idx
            post = np.where(sel, projected, 0.0)
            post = post / math.sqrt(float(np.vdot(post, post).real))
            outcomes[int(y_idx)] = float(dist[y_idx])
            posts[int(y_idx)] = post
    return p_pass, outcomes, posts


def mv_verify_ancilla(
    key: MVHashKey, y: BitVector, psi: StateVector, rng: np.random.Generator
) -> tuple[bool, StateVector | None]:
    p_pass, outcomes, posts = verify_profile_ancilla(key, y, psi)
    if rng.random() >= p_pass:
        return False, None
    y_indices = sorted(outcomes)
    probs = np.array([outcomes[i] for i in y_indices])
    probs = probs / probs.sum()
    drawn = int(rng.choice(len(y_indices), p=probs))
    y_idx = y_indices[drawn]
    return y_idx == y.to_index(), StateVector(posts[y_idx])


@dataclass(frozen=True)
class CloneResult:
    component: BoltComponent
    iterations: int


def _prepare_two_fiber_state(key: MVHashKey, y: BitVector) -> np.ndarray:
    """Steps 1-3 of the cloning loop: the normalized sum of phi_r over r.y = 0.

    Builds the (r, state) joint register, uncomputes r branch-by-branch with
    recover_r, and normalizes per the explicit normalization constant of the
    uncompute step.  Exact phi collisions among the kernel branches make the
    uncompute merge distinct r values and are reported as rank defects.
    """
    m, n = key.m, key.n
    ker = kernel_basis(BitMatrix([y.bits]))
    branches = enumerate_elements(ker)
    scale = 1.0 / math.sqrt(len(branches))
    joint = np.zeros((1 << n, 1 << m), dtype=np.complex128)
    for r in branches:
        joint[r.to_index()] = make_phi(key, r).amplitudes * scale

    landed = np.zeros((1 << n, 1 << m), dtype=np.complex128)
    seen = {}
    for r in branches:
        ri = r.to_index()
        branch = joint[ri]
        r_hat = recover_r(key, StateVector(branch / np.linalg.norm(branch)))
        if r_hat.to_index() in seen and seen[r_hat.to_index()] != ri:
            raise RankDefectError("phi collision among kernel branches")
        seen[r_hat.to_index()] = ri
        landed[ri ^ r_hat.to_index()] += branch
    summed = landed[0]
    norm = np.linalg.norm(summed)
    if norm < 1e-12:
        raise RankDefectError("uncompute step annihilated the state")
    return summed / norm


def attack_clone(
    key: MVHashKey, y: BitVector, rng: np.random.Generator, max_iterations: int = 10_000
) -> CloneResult:
    """Clone the bolt component for a nonzero serial via the verifier circuit.

    Loops: prepare the two-fiber superposition, compute the hash into an
    ancilla, measure; on outcome y the post-measurement state is the bolt
    component, otherwise retry.
    """
    if y.to_index() == 0:
        raise ValueError("serial must be nonzero")
    cns = census(key)
    if cns.count_of(y) == 0:
        raise ValueError("C_y = 0: the retry loop cannot terminate for this serial")

    m, n = key.m, key.n
    layout = RegisterLayout.of(state=m, serial=n)
    table = key.hash_table()
    psi_y = _prepare_two_fiber_state(key, y)

    for iteration in range(1, max_iterations + 1):
        joint = np.kron(psi_y, _basis_block(n, 0))
        state = StateVector(joint)
        state = compute_into(state, table, layout, "serial")
        outcome, collapsed = measure_register(state, layout, "serial", rng)
        if outcome == y:
            block = collapsed.amplitudes.reshape(1 << m, 1 << n)[:, y.to_index()]
            return CloneResult(
                component=BoltComponent(serial=y, state=StateVector(block)),
                iterations=iteration,
            )
    raise RuntimeError("clone retry limit exceeded")


def _basis_block(bits: int, index: int) -> np.ndarray:
    v = np.zeros(1 << bits, dtype=np.complex128)
    v[index] = 1.0
    return v


def full_bolt(
    key: MVHashKey, y: BitVector, rng: np.random.Generator, k: int = 2
) -> list[BoltComponent]:
    """A full bolt is k+1 independent clones of the component."""
    if k < 1:
        raise ValueError("k must be positive")
    return [attack_clone(key, y, rng).component for _ in range(k + 1)]


def validate_scheme_params(m: int, n: int, k: int) -> dict:
    """Parameter sanity for the published regime (k = 2n, m = k*n)."""
    report = {
        "m": m,
        "n": n,
        "k": k,
        "namcr_bound_ok": m < (k + 0.5) * n,
        "published_regime": k == 2 * n and m == k * n,
    }
    if not report["namcr_bound_ok"]:
        raise ValueError("parameters violate m < (k + 1/2) n")
    return report

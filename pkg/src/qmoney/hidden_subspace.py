"""Hidden-subspace quantum money (simulated) and the tangent-space attack.

The money state is carried classically as the hidden subspace itself; the
state-vector path exists to validate the projective verifier and measurement
semantics at small n.  The attack consumes one measurement outcome, which a
classical uniform sample reproduces exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .f2core import (
    BitVector,
    Subspace,
    element_matrix,
    enumerate_elements,
    kernel_basis,
    membership,
    orthogonal_complement,
    random_subspace,
    sample_uniform,
)
from .f2poly import PolySystem, VanishingSampler, evaluate, evaluate_many, jacobian_at
from .statevec import StateVector, fwht, prepare_uniform, qubit_cap

__all__ = [
    "HSParams",
    "HSBanknote",
    "hs_gen",
    "hs_measure",
    "hs_attack",
    "hs_verify_state",
    "money_state",
    "subspace_indices",
]

OPERATOR_TOL = 1e-9


@dataclass(frozen=True)
class HSParams:
    """Scheme parameters: n-bit space, degree-d obfuscation, m = floor(beta*n) polynomials."""

    n: int
    d: int
    beta: Fraction

    def __post_init__(self):
        if self.n <= 0 or self.n % 2:
            raise ValueError("n must be even and positive")
        if self.d < 3:
            raise ValueError("d must be at least 3")
        beta = Fraction(self.beta)
        object.__setattr__(self, "beta", beta)
        if beta <= 1:
            raise ValueError("beta must exceed 1")

    @property
    def m(self) -> int:
        return math.floor(self.beta * self.n)


@dataclass(frozen=True)
class HSBanknote:
    """Serial polynomials plus the classical stand-in for the money state."""

    serial: PolySystem
    money: Subspace

    def __post_init__(self):
        if 2 * self.money.dim != self.money.ambient_dim:
            raise ValueError("money subspace must have dimension n/2")
        if self.money.dim <= 12:  # exhaustive check is affordable at desk scale
            pts = element_matrix(self.money)
            for p in self.serial:
                if evaluate_many(p, pts).any():
                    raise ValueError("serial polynomial does not vanish on the money subspace")


def hs_gen(params: HSParams, rng: np.random.Generator) -> tuple[Subspace, HSBanknote]:
    """Key generation: a random subspace and a banknote hiding it."""
    secret = random_subspace(params.n, rng)
    sampler = VanishingSampler(secret, params.d)
    serial = sampler.sample_system(params.m, rng)
    return secret, HSBanknote(serial=serial, money=secret)


def hs_measure(note: HSBanknote, rng: np.random.Generator) -> BitVector:
    """Computational-basis measurement of the money state: uniform over the subspace."""
    return sample_uniform(note.money, rng)


def hs_attack(serial: PolySystem, x: BitVector) -> Subspace:
    """Recover the hidden subspace from the serial and one measured point.

    Returns the kernel of the matrix of formal partial derivatives at x.  The
    result always contains the hidden subspace; it equals it except with
    probability at most 2^(n-m) over the serial's randomness.
    """
    for p in serial:
        if evaluate(p, x) != 0:
            raise ValueError("x is not a common root of the serial polynomials")
    return kernel_basis(jacobian_at(serial, x))


def subspace_indices(space: Subspace) -> np.ndarray:
    """Basis-state indices of the subspace elements (big-endian)."""
    mat = element_matrix(space).astype(np.int64)
    n = space.ambient_dim
    weights = 1 << (n - 1 - np.arange(n, dtype=np.int64))
    return mat @ weights


def hs_verify_state(note: HSBanknote, psi: StateVector) -> float:
    """Acceptance probability of the projective verifier on psi.

    Applies project-onto-A, Hadamard-all, project-onto-A-perp, Hadamard-all
    and confirms the composite acts as the rank-one projector |A><A| before
    returning |<A|psi>|^2.
    """
    n = note.money.ambient_dim
    if n > qubit_cap():
        raise ValueError("state dimension exceeds the qubit cap")
    if psi.num_qubits != n:
        raise ValueError("state size does not match the subspace ambient dimension")
    amps = psi.amplitudes

    a_idx = subspace_indices(note.money)
    perp_idx = subspace_indices(orthogonal_complement(note.money))
    size = 1 << n
    mask_a = np.zeros(size, dtype=bool)
    mask_a[a_idx] = True
    mask_perp = np.zeros(size, dtype=bool)
    mask_perp[perp_idx] = True

    scale = 1.0 / math.sqrt(size)
    stage = np.where(mask_a, amps, 0.0)
    stage = fwht(stage) * scale
    stage = np.where(mask_perp, stage, 0.0)
    stage = fwht(stage) * scale

    a_amp = 1.0 / math.sqrt(len(a_idx))
    overlap = a_amp * amps[a_idx].sum()
    reference = np.zeros(size, dtype=np.complex128)
    reference[a_idx] = overlap * a_amp
    if np.max(np.abs(stage - reference)) > OPERATOR_TOL:
        raise AssertionError("verifier pipeline deviates from the rank-one projector")
    return float(abs(overlap) ** 2)


def money_state(note: HSBanknote) -> StateVector:
    """The uniform-superposition money state, for small n."""
    return prepare_uniform(enumerate_elements(note.money))

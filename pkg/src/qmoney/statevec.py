"""Dense pure-state simulator over q-bit registers.

Basis-state indices are big-endian: bit 0 is the most significant bit of the
index, matching BitVector.to_index().  States are immutable snapshots; every
operation returns a new value.  Normalization is re-checked (never silently
corrected) every NORM_CHECK_INTERVAL operations.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .f2core import BitVector

__all__ = [
    "StateVector",
    "RegisterLayout",
    "NormDriftError",
    "qubit_cap",
    "prepare_uniform",
    "basis_state",
    "phase_oracle",
    "compute_into",
    "measure_register",
    "hadamard_all",
    "fwht",
    "inner_product",
    "trace_distance_pure",
    "tensor",
    "dump_amplitudes_csv",
]

DEFAULT_QUBIT_CAP = 24
NORM_CHECK_INTERVAL = 100
NORM_TOL = 1e-9
CAP_ENV_VAR = "QMONEY_QUBIT_CAP"


class NormDriftError(RuntimeError):
    """Raised when accumulated numerical drift breaks normalization."""


def qubit_cap() -> int:
    raw = os.environ.get(CAP_ENV_VAR)
    return int(raw) if raw else DEFAULT_QUBIT_CAP


class StateVector:
    """Unit vector of 2^q complex amplitudes."""

    __slots__ = ("_amps", "_ops")

    def __init__(self, amplitudes, *, _ops: int = 0, _check: bool = True):
        arr = np.asarray(amplitudes, dtype=np.complex128)
        if arr.ndim != 1:
            raise ValueError("amplitudes must be one-dimensional")
        q = arr.size.bit_length() - 1
        if arr.size != 1 << q or arr.size < 2:
            raise ValueError("amplitude count must be a power of two, at least 2")
        if q > qubit_cap():
            raise ValueError(f"{q} qubits exceeds the cap of {qubit_cap()}")
        if _check:
            norm_sq = float(np.vdot(arr, arr).real)
            if abs(norm_sq - 1.0) > NORM_TOL:
                raise ValueError(f"state is not normalized (|psi|^2 = {norm_sq})")
        arr = arr.copy()
        arr.flags.writeable = False
        self._amps = arr
        self._ops = _ops

    @property
    def num_qubits(self) -> int:
        return self._amps.size.bit_length() - 1

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amps

    def amplitude(self, index: int) -> complex:
        return complex(self._amps[index])

    def _child(self, amps: np.ndarray) -> "StateVector":
        ops = self._ops + 1
        check = ops % NORM_CHECK_INTERVAL == 0
        if check:
            norm_sq = float(np.vdot(amps, amps).real)
            if abs(norm_sq - 1.0) > NORM_TOL:
                raise NormDriftError(
                    f"norm drifted to {norm_sq} after {ops} operations"
                )
        return StateVector(amps, _ops=ops, _check=False)

    def __repr__(self) -> str:
        return f"StateVector(q={self.num_qubits})"


@dataclass(frozen=True)
class RegisterLayout:
    """Named contiguous bit ranges inside a q-qubit index (big-endian)."""

    total_qubits: int
    registers: tuple[tuple[str, int, int], ...]  # (name, start, length)

    def __post_init__(self):
        used = []
        for name, start, length in self.registers:
            if length <= 0 or start < 0 or start + length > self.total_qubits:
                raise ValueError(f"register {name!r} out of range")
            used.append((start, start + length, name))
        used.sort()
        for (s1, e1, n1), (s2, e2, n2) in zip(used, used[1:]):
            if s2 < e1:
                raise ValueError(f"registers {n1!r} and {n2!r} overlap")

    @classmethod
    def of(cls, **sizes: int) -> "RegisterLayout":
        """Pack registers in keyword order, most significant first."""
        regs = []
        start = 0
        for name, length in sizes.items():
            regs.append((name, start, length))
            start += length
        return cls(start, tuple(regs))

    def _find(self, name: str) -> tuple[int, int]:
        for reg_name, start, length in self.registers:
            if reg_name == name:
                return start, length
        raise KeyError(name)

    def shift_of(self, name: str) -> int:
        start, length = self._find(name)
        return self.total_qubits - start - length

    def length_of(self, name: str) -> int:
        return self._find(name)[1]

    def value_of(self, index: int, name: str) -> int:
        start, length = self._find(name)
        shift = self.total_qubits - start - length
        return (index >> shift) & ((1 << length) - 1)


def basis_state(num_qubits: int, index: int) -> StateVector:
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(amps)


def prepare_uniform(points: list[BitVector]) -> StateVector:
    """Uniform superposition over the listed basis states."""
    if not points:
        raise ValueError("points must be non-empty")
    q = points[0].length
    indices = [p.to_index() for p in points]
    if len(set(indices)) != len(indices):
        raise ValueError("points must be distinct")
    amps = np.zeros(1 << q, dtype=np.complex128)
    amps[indices] = 1.0 / math.sqrt(len(points))
    return StateVector(amps)


def _as_bool_table(pred, size: int) -> np.ndarray:
    if isinstance(pred, np.ndarray):
        table = pred.astype(bool)
        if table.size != size:
            raise ValueError("predicate table has the wrong size")
        return table
    return np.fromiter((bool(pred(i)) for i in range(size)), dtype=bool, count=size)


def phase_oracle(state: StateVector, pred) -> StateVector:
    """Flip the amplitude sign exactly where the predicate holds."""
    table = _as_bool_table(pred, state.amplitudes.size)
    amps = state.amplitudes.copy()
    amps[table] = -amps[table]
    return state._child(amps)


def compute_into(state: StateVector, f, layout: RegisterLayout, target: str) -> StateVector:
    """XOR a basis function of the non-target bits into the target register.

    Realizes |x>|t> -> |x>|t XOR f(x)>, where x is the integer formed by the
    remaining bits in big-endian order.  f may be a callable or a lookup
    array over the reduced index.
    """
    q = state.num_qubits
    if layout.total_qubits != q:
        raise ValueError("layout does not match the state")
    shift = layout.shift_of(target)
    length = layout.length_of(target)
    t_mask = ((1 << length) - 1) << shift

    idx = np.arange(1 << q, dtype=np.int64)
    rest = ((idx >> (shift + length)) << shift) | (idx & ((1 << shift) - 1))
    if isinstance(f, np.ndarray):
        f_vals = f[rest].astype(np.int64)
    else:
        f_vals = np.fromiter(
            (int(f(int(r))) for r in rest), dtype=np.int64, count=idx.size
        )
    if np.any(f_vals >> length):
        raise ValueError("function output exceeds the target register width")
    new_idx = (idx & ~t_mask) | (((idx & t_mask) >> shift) ^ f_vals) << shift
    amps = np.empty_like(state.amplitudes)
    amps[new_idx] = state.amplitudes[idx]
    return state._child(amps)


def measure_register(
    state: StateVector, layout: RegisterLayout, name: str, rng: np.random.Generator
) -> tuple[BitVector, StateVector]:
    """Born-rule measurement of one register; returns (outcome, collapsed state)."""
    q = state.num_qubits
    if layout.total_qubits != q:
        raise ValueError("layout does not match the state")
    shift = layout.shift_of(name)
    length = layout.length_of(name)
    pre = 1 << (q - shift - length)
    post = 1 << shift
    cube = state.amplitudes.reshape(pre, 1 << length, post)
    probs = np.abs(cube) ** 2
    marginal = probs.sum(axis=(0, 2))
    marginal = marginal / marginal.sum()
    outcome = int(rng.choice(1 << length, p=marginal))
    collapsed = np.zeros_like(cube)
    collapsed[:, outcome, :] = cube[:, outcome, :]
    collapsed = collapsed.reshape(-1) / math.sqrt(marginal[outcome])
    return BitVector.from_index(outcome, length), state._child(collapsed)


def fwht(arr: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform (butterfly, power-of-two length)."""
    a = np.array(arr, dtype=np.complex128)
    n = a.size
    h = 1
    while h < n:
        a = a.reshape(-1, 2, h)
        top = a[:, 0, :] + a[:, 1, :]
        bot = a[:, 0, :] - a[:, 1, :]
        a = np.stack((top, bot), axis=1)
        h *= 2
    return a.reshape(n)


def hadamard_all(state: StateVector) -> StateVector:
    """Hadamard on every qubit."""
    q = state.num_qubits
    amps = fwht(state.amplitudes) / math.sqrt(1 << q)
    return state._child(amps)


def inner_product(s: StateVector, t: StateVector) -> complex:
    if s.num_qubits != t.num_qubits:
        raise ValueError("qubit count mismatch")
    return complex(np.vdot(s.amplitudes, t.amplitudes))


def trace_distance_pure(s: StateVector, t: StateVector) -> float:
    """Trace distance 2*sqrt(1 - |<s|t>|^2) between two pure states.

    Evaluated as twice the norm of the component of s orthogonal to t, which
    is the same quantity without the cancellation near identical states.
    """
    overlap = inner_product(t, s)
    perp = s.amplitudes - overlap * t.amplitudes
    return 2.0 * float(np.linalg.norm(perp))


def tensor(*states: StateVector) -> StateVector:
    """Tensor product; the first factor holds the most significant bits."""
    amps = states[0].amplitudes
    for s in states[1:]:
        amps = np.kron(amps, s.amplitudes)
    return StateVector(amps)


def dump_amplitudes_csv(state: StateVector, path) -> None:
    """Debug helper: write (index, re, im) rows."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,re,im\n")
        for i, a in enumerate(state.amplitudes):
            fh.write(f"{i},{a.real!r},{a.imag!r}\n")

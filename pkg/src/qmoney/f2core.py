"""Exact linear algebra over GF(2): bit vectors, bit matrices, subspaces.

All values are immutable after construction and every operation is a pure
function, so they are safe to share across threads.  Matrices keep one entry
per byte; the external contract is entry-level GF(2) semantics only.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "BitVector",
    "BitMatrix",
    "Subspace",
    "kernel_basis",
    "random_subspace",
    "orthogonal_complement",
    "subspace_equal",
    "membership",
    "sample_uniform",
    "element_matrix",
    "enumerate_elements",
]


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class BitVector:
    """Fixed-length vector over GF(2)."""

    __slots__ = ("_bits",)

    def __init__(self, bits):
        arr = (np.asarray(bits) & 1).astype(np.uint8)
        if arr.ndim != 1:
            raise ValueError("bits must be one-dimensional")
        if arr.size == 0:
            raise ValueError("length must be positive")
        self._bits = _freeze(arr)

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(np.zeros(length, dtype=np.uint8))

    @classmethod
    def from_index(cls, index: int, length: int) -> "BitVector":
        """Decode a basis-state index, most significant bit first."""
        if not 0 <= index < (1 << length):
            raise ValueError(f"index {index} out of range for length {length}")
        return cls([(index >> (length - 1 - b)) & 1 for b in range(length)])

    def to_index(self) -> int:
        """Encode as a basis-state index, most significant bit first."""
        out = 0
        for b in self._bits:
            out = (out << 1) | int(b)
        return out

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    @property
    def length(self) -> int:
        return self._bits.size

    def dot(self, other: "BitVector") -> int:
        if self.length != other.length:
            raise ValueError("length mismatch")
        return int(np.bitwise_and(self._bits, other._bits).sum() & 1)

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.length != other.length:
            raise ValueError("length mismatch")
        return BitVector(np.bitwise_xor(self._bits, other._bits))

    def __len__(self) -> int:
        return self._bits.size

    def __getitem__(self, i: int) -> int:
        return int(self._bits[i])

    def __iter__(self):
        return (int(b) for b in self._bits)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self._bits.shape == other._bits.shape and bool(
            np.array_equal(self._bits, other._bits)
        )

    def __hash__(self) -> int:
        return hash(self._bits.tobytes())

    def to01(self) -> str:
        return "".join(str(int(b)) for b in self._bits)

    def __repr__(self) -> str:
        return f"BitVector('{self.to01()}')"


class BitMatrix:
    """Matrix over GF(2).  Zero rows are allowed (empty kernel bases)."""

    __slots__ = ("_a",)

    def __init__(self, entries):
        arr = (np.asarray(entries) & 1).astype(np.uint8)
        if arr.ndim != 2:
            raise ValueError("entries must be two-dimensional")
        if arr.shape[1] == 0:
            raise ValueError("column count must be positive")
        self._a = _freeze(arr)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(np.zeros((rows, cols), dtype=np.uint8))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_rows(cls, rows) -> "BitMatrix":
        return cls(np.array([r.bits if isinstance(r, BitVector) else r for r in rows]))

    @classmethod
    def from_text(cls, text: str) -> "BitMatrix":
        """Parse rows of '0'/'1' characters, one row per line."""
        rows = []
        for line in text.splitlines():
            line = "".join(line.split())
            if not line:
                continue
            if set(line) - {"0", "1"}:
                raise ValueError(f"invalid matrix row {line!r}")
            rows.append([int(c) for c in line])
        if not rows:
            raise ValueError("no rows found")
        return cls(rows)

    def to_text(self) -> str:
        return "\n".join("".join(str(int(b)) for b in row) for row in self._a)

    @property
    def array(self) -> np.ndarray:
        return self._a

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    def row(self, i: int) -> BitVector:
        return BitVector(self._a[i])

    def mul_vec(self, v: BitVector) -> BitVector:
        if v.length != self.cols:
            raise ValueError("dimension mismatch")
        prod = (self._a.astype(np.int64) @ v.bits.astype(np.int64)) & 1
        return BitVector(prod.astype(np.uint8))

    def transpose(self) -> "BitMatrix":
        return BitMatrix(self._a.T)

    def rref(self) -> tuple["BitMatrix", tuple[int, ...]]:
        a, pivots = _rref(self._a)
        return BitMatrix(a), pivots

    def rank(self) -> int:
        return len(_rref(self._a)[1])

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self._a.shape == other._a.shape and bool(np.array_equal(self._a, other._a))

    def __hash__(self) -> int:
        return hash((self._a.shape, self._a.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"


def _rref(a: np.ndarray) -> tuple[np.ndarray, tuple[int, ...]]:
    """Reduced row echelon form over GF(2); returns (matrix, pivot columns)."""
    a = a.copy()
    m, n = a.shape
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        hits = np.nonzero(a[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        if others.size:
            a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return a, tuple(pivots)


class Subspace:
    """Linear subspace of GF(2)^n, canonically represented by an RREF basis.

    Equality testing and hashing go through the reduced row echelon form,
    which is a unique normal form for the row space.
    """

    __slots__ = ("_ambient", "_basis", "_pivots")

    def __init__(self, ambient_dim: int, basis: BitMatrix):
        if ambient_dim <= 0:
            raise ValueError("ambient dimension must be positive")
        if basis.cols != ambient_dim:
            raise ValueError("basis width does not match ambient dimension")
        reduced, pivots = basis.rref()
        if len(pivots) != basis.rows:
            raise ValueError("basis rows are linearly dependent")
        self._ambient = ambient_dim
        self._basis = reduced
        self._pivots = pivots

    @classmethod
    def spanned_by(cls, ambient_dim: int, rows) -> "Subspace":
        """Subspace spanned by possibly dependent rows (zero rows dropped)."""
        if not rows:
            return cls.zero(ambient_dim)
        mat = BitMatrix.from_rows(rows)
        reduced, pivots = mat.rref()
        keep = reduced.array[: len(pivots)]
        if len(pivots) == 0:
            return cls.zero(ambient_dim)
        return cls(ambient_dim, BitMatrix(keep))

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, BitMatrix.zeros(0, ambient_dim))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, BitMatrix.identity(ambient_dim))

    @property
    def ambient_dim(self) -> int:
        return self._ambient

    @property
    def basis(self) -> BitMatrix:
        return self._basis

    @property
    def dim(self) -> int:
        return self._basis.rows

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return subspace_equal(self, other)

    def __hash__(self) -> int:
        return hash((self._ambient, self._basis))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self._ambient})"


def kernel_basis(matrix: BitMatrix) -> Subspace:
    """Basis of {v : M v = 0}.  The zero kernel yields an empty basis."""
    reduced, pivots = matrix.rref()
    n = matrix.cols
    a = reduced.array
    pivot_set = set(pivots)
    free_cols = [c for c in range(n) if c not in pivot_set]
    vecs = []
    for free in free_cols:
        v = np.zeros(n, dtype=np.uint8)
        v[free] = 1
        for row, col in enumerate(pivots):
            if a[row, free]:
                v[col] = 1
        vecs.append(v)
    if not vecs:
        return Subspace.zero(n)
    return Subspace(n, BitMatrix(np.array(vecs)))


def random_subspace(n: int, rng: np.random.Generator) -> Subspace:
    """Uniformly random subspace of dimension n/2 in GF(2)^n.

    Rejection-samples (n/2) x n matrices until full rank; each subspace is
    spanned by the same number of full-rank matrices, so the canonicalized
    result is uniform.
    """
    if n <= 0 or n % 2 != 0:
        raise ValueError("n must be even and positive")
    k = n // 2
    while True:
        mat = rng.integers(0, 2, size=(k, n), dtype=np.uint8)
        bm = BitMatrix(mat)
        if bm.rank() == k:
            return Subspace(n, bm)


def orthogonal_complement(space: Subspace) -> Subspace:
    """All vectors orthogonal to the subspace under the standard dot product."""
    if space.dim == 0:
        return Subspace.full(space.ambient_dim)
    return kernel_basis(space.basis)


def subspace_equal(a: Subspace, b: Subspace) -> bool:
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    return a.basis == b.basis


def membership(space: Subspace, v: BitVector) -> bool:
    """Test v in the subspace by reducing against the RREF basis."""
    if v.length != space.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    work = v.bits.copy()
    a = space.basis.array
    for row, col in enumerate(space._pivots):
        if work[col]:
            work ^= a[row]
    return not work.any()


def sample_uniform(space: Subspace, rng: np.random.Generator) -> BitVector:
    """Uniform element of the subspace: a random GF(2) combination of the basis."""
    if space.dim == 0:
        return BitVector.zeros(space.ambient_dim)
    coeffs = rng.integers(0, 2, size=space.dim, dtype=np.uint8)
    combo = (coeffs.astype(np.int64) @ space.basis.array.astype(np.int64)) & 1
    return BitVector(combo.astype(np.uint8))


def element_matrix(space: Subspace) -> np.ndarray:
    """(2^dim x n) matrix whose rows are all elements, ordered by coefficient index."""
    if space.dim > 24:
        raise ValueError("subspace too large to enumerate")
    d = space.dim
    if d == 0:
        return np.zeros((1, space.ambient_dim), dtype=np.uint8)
    shifts = d - 1 - np.arange(d)
    coeffs = (np.arange(1 << d, dtype=np.int64)[:, None] >> shifts) & 1
    combos = (coeffs @ space.basis.array.astype(np.int64)) & 1
    return combos.astype(np.uint8)


def enumerate_elements(space: Subspace) -> list[BitVector]:
    """All 2^dim elements, ordered by coefficient index."""
    return [BitVector(row) for row in element_matrix(space)]

"""Symmetric matrices, 2x2 blocks, and the pair embedding maps.

Indices on the public interface are 1-based throughout; a symmetric matrix
stores one entry per unordered pair in a packed row-major upper triangle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-8


def packed_length(n: int) -> int:
    return n * (n + 1) // 2


def packed_index(n: int, i: int, j: int) -> int:
    """Position of entry (i, j), 1 <= i <= j <= n, in the packed triangle."""
    return (i - 1) * (n + 1) - (i - 1) * i // 2 + (j - i)


class SymMatrix:
    """Real symmetric matrix with single storage per unordered pair.

    Instances are immutable. `dim` is the matrix order n; entries are kept
    packed (row-major upper triangle) and a dense readonly view is cached on
    first use.
    """

    __slots__ = ("dim", "_packed", "_dense")

    def __init__(self, dim: int, packed) -> None:
        if dim < 1:
            raise ValueError("matrix dimension must be at least 1")
        arr = np.array(packed, dtype=float).ravel()
        if arr.size != packed_length(dim):
            raise ValueError(
                f"packed length {arr.size} does not fit dimension {dim}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "_packed", arr)
        object.__setattr__(self, "_dense", None)

    def __setattr__(self, name, value):
        raise AttributeError("SymMatrix is immutable")

    # construction

    @classmethod
    def from_dense(cls, arr, tol: float = DEFAULT_TOL) -> "SymMatrix":
        a = np.asarray(arr, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("expected a square 2-d array")
        scale = 1.0 + float(np.max(np.abs(a))) if a.size else 1.0
        if float(np.max(np.abs(a - a.T))) > tol * scale:
            raise ValueError("input array is not symmetric")
        n = a.shape[0]
        sym = (a + a.T) / 2.0
        iu = np.triu_indices(n)
        return cls(n, sym[iu])

    @classmethod
    def zeros(cls, n: int) -> "SymMatrix":
        return cls(n, np.zeros(packed_length(n)))

    @classmethod
    def identity(cls, n: int) -> "SymMatrix":
        packed = np.zeros(packed_length(n))
        for i in range(1, n + 1):
            packed[packed_index(n, i, i)] = 1.0
        return cls(n, packed)

    @classmethod
    def ones(cls, n: int) -> "SymMatrix":
        return cls(n, np.ones(packed_length(n)))

    @classmethod
    def rank_one(cls, v) -> "SymMatrix":
        v = np.asarray(v, dtype=float).ravel()
        outer = np.outer(v, v)
        iu = np.triu_indices(v.size)
        return cls(v.size, outer[iu])

    # access

    def get(self, i: int, j: int) -> float:
        if not (1 <= i <= self.dim and 1 <= j <= self.dim):
            raise IndexError(f"entry ({i}, {j}) out of range for n={self.dim}")
        if i > j:
            i, j = j, i
        return float(self._packed[packed_index(self.dim, i, j)])

    def packed(self) -> np.ndarray:
        return self._packed

    def dense(self) -> np.ndarray:
        if self._dense is None:
            n = self.dim
            full = np.zeros((n, n))
            iu = np.triu_indices(n)
            full[iu] = self._packed
            full = full + np.triu(full, 1).T
            full.flags.writeable = False
            object.__setattr__(self, "_dense", full)
        return self._dense

    def trace(self) -> float:
        return float(np.trace(self.dense()))

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self.dense()))

    # arithmetic (value semantics)

    def _binary(self, other, op) -> "SymMatrix":
        if not isinstance(other, SymMatrix):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return SymMatrix(self.dim, op(self._packed, other._packed))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        return SymMatrix(self.dim, self._packed * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return SymMatrix(self.dim, -self._packed)

    def __repr__(self):
        return f"SymMatrix(dim={self.dim})"


@dataclass(frozen=True)
class Block2:
    """Symmetric 2x2 matrix [[s11, s12], [s12, s22]]."""

    s11: float
    s12: float
    s22: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.s11, self.s12], [self.s12, self.s22]])

    @classmethod
    def from_array(cls, arr) -> "Block2":
        a = np.asarray(arr, dtype=float)
        return cls(float(a[0, 0]), float((a[0, 1] + a[1, 0]) / 2.0), float(a[1, 1]))


def embed(block: Block2, i: int, j: int, n: int) -> SymMatrix:
    """Place a 2x2 block at rows/columns (i, j) of an otherwise zero matrix."""
    if not (1 <= i < j <= n):
        raise IndexError(f"need 1 <= i < j <= n, got i={i}, j={j}, n={n}")
    packed = np.zeros(packed_length(n))
    packed[packed_index(n, i, i)] = block.s11
    packed[packed_index(n, i, j)] = block.s12
    packed[packed_index(n, j, j)] = block.s22
    return SymMatrix(n, packed)


def extract(m: SymMatrix, i: int, j: int) -> Block2:
    """Principal 2x2 submatrix of m indexed by {i, j}; adjoint of embed."""
    if not (1 <= i < j <= m.dim):
        raise IndexError(f"need 1 <= i < j <= dim, got i={i}, j={j}, dim={m.dim}")
    return Block2(m.get(i, i), m.get(i, j), m.get(j, j))


def trace_inner(a: SymMatrix, b: SymMatrix) -> float:
    """Frobenius inner product tr(AB) of two symmetric matrices."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(np.vdot(a.dense(), b.dense()))


def psd2_check(block: Block2, tol: float = DEFAULT_TOL) -> bool:
    """Test a 2x2 block for positive semidefiniteness within tolerance."""
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    prod = block.s11 * block.s22
    return (
        block.s11 >= -tol
        and block.s22 >= -tol
        and prod - block.s12 ** 2 >= -tol * max(1.0, prod)
    )


def dual_psd2_check(block: Block2, tol: float = DEFAULT_TOL) -> bool:
    """Test membership of a 2x2 block in the sum cone PSD + entrywise-nonneg.

    That sum is the dual of the intersection of the 2x2 PSD cone with the
    nonnegative orthant: nonnegative diagonal always required, and a negative
    off-diagonal entry must be covered by the determinant condition.
    """
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    if block.s11 < -tol or block.s22 < -tol:
        return False
    if block.s12 >= -tol:
        return True
    prod = block.s11 * block.s22
    return prod - block.s12 ** 2 >= -tol * max(1.0, abs(prod))

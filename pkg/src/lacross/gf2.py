"""Exact linear algebra over GF(2).

Matrices are stored densely as read-only ``uint8`` arrays; elimination packs
rows into bytes so that row additions are cheap XORs.  Reduced forms use the
leftmost-lowest pivot rule, which makes every derived basis reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class BinaryMatrix:
    """Immutable matrix over GF(2)."""

    __slots__ = ("_a",)

    def __init__(self, dense):
        a = np.array(dense, dtype=np.uint8, copy=True)
        if a.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {a.shape}")
        a &= 1
        a.setflags(write=False)
        self._a = a

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BinaryMatrix":
        return cls(np.zeros((rows, cols), dtype=np.uint8))

    @classmethod
    def identity(cls, n: int) -> "BinaryMatrix":
        return cls(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries: Iterable[tuple[int, int]]) -> "BinaryMatrix":
        a = np.zeros((rows, cols), dtype=np.uint8)
        seen = set()
        for r, c in entries:
            if not (0 <= r < rows and 0 <= c < cols):
                raise ValueError(f"entry ({r}, {c}) outside {rows}x{cols}")
            if (r, c) in seen:
                raise ValueError(f"duplicate entry ({r}, {c})")
            seen.add((r, c))
            a[r, c] = 1
        return cls(a)

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def nnz(self) -> int:
        return int(self._a.sum())

    @property
    def T(self) -> "BinaryMatrix":
        return BinaryMatrix(self._a.T)

    def to_dense(self) -> np.ndarray:
        return self._a.copy()

    def view(self) -> np.ndarray:
        """Read-only dense view (no copy)."""
        return self._a

    def entries(self) -> list[tuple[int, int]]:
        r, c = np.nonzero(self._a)
        return list(zip(r.tolist(), c.tolist()))

    def row_support(self, i: int) -> list[int]:
        return np.flatnonzero(self._a[i]).tolist()

    def col_support(self, j: int) -> list[int]:
        return np.flatnonzero(self._a[:, j]).tolist()

    def dot(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.uint8)
        return ((self._a.astype(np.int64) @ v.astype(np.int64)) & 1).astype(np.uint8)

    def __matmul__(self, other):
        if isinstance(other, BinaryMatrix):
            prod = self._a.astype(np.int64) @ other._a.astype(np.int64)
            return BinaryMatrix(prod & 1)
        return self.dot(other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._a, other._a))

    def __hash__(self) -> int:
        return hash((self.shape, np.packbits(self._a).tobytes()))

    def __repr__(self) -> str:
        return f"BinaryMatrix({self.rows}x{self.cols}, nnz={self.nnz})"

    def to_text(self) -> str:
        lines = [f"{self.rows} {self.cols}"]
        lines.extend(f"{r} {c}" for r, c in self.entries())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BinaryMatrix":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty matrix text")
        rows, cols = (int(t) for t in lines[0].split())
        entries = []
        for ln in lines[1:]:
            r, c = ln.split()
            entries.append((int(r), int(c)))
        return cls.from_entries(rows, cols, entries)


def hstack(blocks: Sequence[BinaryMatrix]) -> BinaryMatrix:
    return BinaryMatrix(np.hstack([b.view() for b in blocks]))


def vstack(blocks: Sequence[BinaryMatrix]) -> BinaryMatrix:
    return BinaryMatrix(np.vstack([b.view() for b in blocks]))


def kron(a: BinaryMatrix, b: BinaryMatrix) -> BinaryMatrix:
    return BinaryMatrix(np.kron(a.view(), b.view()))


def _as_dense(m) -> np.ndarray:
    if isinstance(m, BinaryMatrix):
        return m.view()
    return np.asarray(m, dtype=np.uint8) & 1


@dataclass(frozen=True)
class Reduced:
    """Row-reduced echelon form: ``matrix`` has ``len(pivots)`` nonzero rows."""

    matrix: np.ndarray
    pivots: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.pivots)


def rref(m) -> Reduced:
    """Reduced row echelon form with leftmost-lowest pivoting."""
    a = _as_dense(m)
    nrows, ncols = a.shape
    if nrows == 0 or ncols == 0:
        return Reduced(np.zeros((0, ncols), dtype=np.uint8), ())
    packed = np.packbits(a, axis=1, bitorder="little")
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        byte, bit = c >> 3, c & 7
        colbits = (packed[r:, byte] >> bit) & 1
        hits = np.flatnonzero(colbits)
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            packed[[r, p]] = packed[[p, r]]
        others = np.flatnonzero((packed[:, byte] >> bit) & 1)
        others = others[others != r]
        if others.size:
            packed[others] ^= packed[r]
        pivots.append(c)
        r += 1
    dense = np.unpackbits(packed[:r], axis=1, count=ncols, bitorder="little")
    return Reduced(dense, tuple(pivots))


def rank(m) -> int:
    return rref(m).rank


def kernel_basis(m) -> np.ndarray:
    """Basis of {v : m v = 0}, one vector per row, indexed by free columns."""
    a = _as_dense(m)
    ncols = a.shape[1]
    red = rref(a)
    pivset = set(red.pivots)
    free = [c for c in range(ncols) if c not in pivset]
    basis = np.zeros((len(free), ncols), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, p in enumerate(red.pivots):
            if red.matrix[row, f]:
                basis[i, p] = 1
    return basis


def solve(m, b) -> np.ndarray | None:
    """Some ``x`` with ``m x = b``, or ``None`` when ``b`` is not in the column space."""
    a = _as_dense(m)
    b = np.asarray(b, dtype=np.uint8) & 1
    nrows, ncols = a.shape
    if b.shape != (nrows,):
        raise ValueError(f"rhs has length {b.shape}, matrix has {nrows} rows")
    aug = np.hstack([a, b[:, None]])
    red = rref(aug)
    if red.pivots and red.pivots[-1] == ncols:
        return None
    x = np.zeros(ncols, dtype=np.uint8)
    for row, p in enumerate(red.pivots):
        x[p] = red.matrix[row, ncols]
    return x


def coset_reduce(v, rowspace_of) -> np.ndarray:
    """Canonical representative of ``v`` modulo the row space of ``rowspace_of``."""
    red = rowspace_of if isinstance(rowspace_of, Reduced) else rref(rowspace_of)
    out = np.array(v, dtype=np.uint8) & 1
    if red.matrix.shape[1] != out.shape[0]:
        raise ValueError("vector length does not match matrix width")
    for row, p in enumerate(red.pivots):
        if out[p]:
            out ^= red.matrix[row]
    return out


def in_rowspace(v, rowspace_of) -> bool:
    return not coset_reduce(v, rowspace_of).any()


def inverse(m) -> np.ndarray:
    """Inverse of a square invertible matrix."""
    a = _as_dense(m)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("inverse needs a square matrix")
    red = rref(np.hstack([a, np.eye(n, dtype=np.uint8)]))
    if red.pivots[:n] != tuple(range(n)):
        raise np.linalg.LinAlgError("matrix is singular over GF(2)")
    return red.matrix[:n, n:].copy()

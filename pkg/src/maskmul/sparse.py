"""Sparse matrix storage (CSR/CSC), construction and structural transforms.

Canonical form is sorted + deduplicated CSR: within each row the column
indices are strictly increasing.  Every public constructor canonicalizes, so
kernels that require sorted inputs (the compressed and heap accumulators) can
assume it.  Matrices are immutable after construction and safe to read from
any number of concurrent workers.

Indices and offsets are stored as int64 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class SparseError(ValueError):
    """Construction or shape error on a sparse matrix operation."""


def _as_index_array(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.int64)


@dataclass(eq=False)
class CsrMatrix:
    """Compressed sparse row matrix over an arbitrary value dtype."""

    nrows: int
    ncols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray
    sorted: bool = True

    @property
    def nnz(self) -> int:
        return int(self.row_ptr[self.nrows])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
        return self.col_idx[lo:hi], self.values[lo:hi]

    def row_lengths(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def pattern(self, complemented: bool = False) -> "MaskView":
        return MaskView(self.nrows, self.ncols, self.row_ptr, self.col_idx,
                        complemented=complemented)

    def astype(self, dtype) -> "CsrMatrix":
        dt = np.dtype(dtype)
        if self.values.dtype == dt:
            return self
        return CsrMatrix(self.nrows, self.ncols, self.row_ptr, self.col_idx,
                         self.values.astype(dt), sorted=self.sorted)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols), dtype=self.values.dtype)
        rows = np.repeat(np.arange(self.nrows), self.row_lengths())
        out[rows, self.col_idx[: self.nnz]] = self.values[: self.nnz]
        return out

    def triples(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        rows = np.repeat(np.arange(self.nrows, dtype=np.int64), self.row_lengths())
        return rows, self.col_idx[: self.nnz].copy(), self.values[: self.nnz].copy()

    def equals(self, other: "CsrMatrix") -> bool:
        """Bitwise equality of the canonical representation."""
        return (
            self.shape == other.shape
            and np.array_equal(self.row_ptr, other.row_ptr)
            and np.array_equal(self.col_idx, other.col_idx)
            and self.values.dtype == other.values.dtype
            and np.array_equal(self.values, other.values)
        )

    def validate(self) -> None:
        if self.row_ptr.shape[0] != self.nrows + 1 or self.row_ptr[0] != 0:
            raise SparseError("row_ptr must have nrows+1 entries starting at 0")
        if np.any(np.diff(self.row_ptr) < 0):
            raise SparseError("row_ptr must be non-decreasing")
        nnz = self.nnz
        if self.col_idx.shape[0] < nnz or self.values.shape[0] < nnz:
            raise SparseError("col_idx/values shorter than nnz")
        if nnz and (self.col_idx[:nnz].min() < 0 or self.col_idx[:nnz].max() >= self.ncols):
            raise SparseError("column index out of range")
        if self.sorted:
            for i in range(self.nrows):
                cols = self.col_idx[self.row_ptr[i]:self.row_ptr[i + 1]]
                if cols.size > 1 and np.any(np.diff(cols) <= 0):
                    raise SparseError(f"row {i} not strictly sorted")


@dataclass(eq=False)
class CscMatrix:
    """Compressed sparse column mirror of :class:`CsrMatrix`."""

    nrows: int
    ncols: int
    col_ptr: np.ndarray
    row_idx: np.ndarray
    values: np.ndarray
    sorted: bool = True

    @property
    def nnz(self) -> int:
        return int(self.col_ptr[self.ncols])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def col(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.col_ptr[j], self.col_ptr[j + 1]
        return self.row_idx[lo:hi], self.values[lo:hi]

    def astype(self, dtype) -> "CscMatrix":
        dt = np.dtype(dtype)
        if self.values.dtype == dt:
            return self
        return CscMatrix(self.nrows, self.ncols, self.col_ptr, self.row_idx,
                         self.values.astype(dt), sorted=self.sorted)


@dataclass(eq=False)
class MaskView:
    """Pattern-only CSR structure plus a complement flag.

    Only the pattern drives which outputs are computed; mask values are never
    evaluated.  Column indices are sorted ascending within each row (the
    compressed and heap accumulators require it; it is enforced for all).
    """

    nrows: int
    ncols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    complemented: bool = False

    @property
    def nnz(self) -> int:
        return int(self.row_ptr[self.nrows])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def row(self, i: int) -> np.ndarray:
        return self.col_idx[self.row_ptr[i]:self.row_ptr[i + 1]]

    def row_lengths(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def complement(self) -> "MaskView":
        return MaskView(self.nrows, self.ncols, self.row_ptr, self.col_idx,
                        complemented=not self.complemented)

    def validate(self) -> None:
        if self.row_ptr.shape[0] != self.nrows + 1 or self.row_ptr[0] != 0:
            raise SparseError("row_ptr must have nrows+1 entries starting at 0")
        if np.any(np.diff(self.row_ptr) < 0):
            raise SparseError("row_ptr must be non-decreasing")
        nnz = self.nnz
        if self.col_idx.shape[0] < nnz:
            raise SparseError("col_idx shorter than nnz")
        if nnz and (self.col_idx[:nnz].min() < 0
                    or self.col_idx[:nnz].max() >= self.ncols):
            raise SparseError("column index out of range")
        for i in range(self.nrows):
            cols = self.col_idx[self.row_ptr[i]:self.row_ptr[i + 1]]
            if cols.size > 1 and np.any(np.diff(cols) <= 0):
                raise SparseError(f"mask row {i} not strictly sorted")

    @staticmethod
    def full(nrows: int, ncols: int) -> "MaskView":
        """Mask allowing every position (vacuous filter)."""
        row_ptr = np.arange(nrows + 1, dtype=np.int64) * ncols
        col_idx = np.tile(np.arange(ncols, dtype=np.int64), nrows)
        return MaskView(nrows, ncols, row_ptr, col_idx)


def _canonical_from_sorted_triples(nrows, ncols, rows, cols, vals, dedup):
    """Build canonical CSR from triples already lexsorted by (row, col)."""
    if rows.size == 0:
        return CsrMatrix(nrows, ncols,
                         np.zeros(nrows + 1, dtype=np.int64),
                         np.empty(0, dtype=np.int64),
                         np.empty(0, dtype=vals.dtype))
    new_group = np.empty(rows.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
    starts = np.flatnonzero(new_group)
    out_rows = rows[starts]
    out_cols = cols[starts]
    if starts.size == rows.size:
        out_vals = vals.copy()
    elif dedup is np.add or dedup is None:
        seg = np.cumsum(new_group) - 1
        out_vals = np.zeros(starts.size, dtype=vals.dtype)
        np.add.at(out_vals, seg, vals)
    else:
        bounds = np.append(starts, rows.size)
        out_vals = np.empty(starts.size, dtype=vals.dtype)
        for g in range(starts.size):
            acc = vals[bounds[g]]
            for p in range(bounds[g] + 1, bounds[g + 1]):
                acc = dedup(acc, vals[p])
            out_vals[g] = acc
    row_ptr = np.zeros(nrows + 1, dtype=np.int64)
    np.add.at(row_ptr, out_rows + 1, 1)
    np.cumsum(row_ptr, out=row_ptr)
    return CsrMatrix(nrows, ncols, row_ptr, out_cols, out_vals)


def from_arrays(nrows: int, ncols: int, rows, cols, vals,
                dedup: Callable = np.add) -> CsrMatrix:
    """Build a canonical (sorted, deduplicated) CSR matrix from index arrays.

    Duplicate (row, col) entries are combined with ``dedup`` (the semiring
    add; defaults to arithmetic +).
    """
    rows = _as_index_array(rows)
    cols = _as_index_array(cols)
    vals = np.asarray(vals)
    if not (rows.size == cols.size == vals.size):
        raise SparseError("rows, cols and values must have equal length")
    if rows.size:
        if rows.min() < 0 or rows.max() >= nrows:
            raise SparseError(f"row index out of range [0, {nrows})")
        if cols.min() < 0 or cols.max() >= ncols:
            raise SparseError(f"column index out of range [0, {ncols})")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
    return _canonical_from_sorted_triples(nrows, ncols, rows, cols, vals, dedup)


def from_triples(nrows: int, ncols: int, triples: Sequence[tuple],
                 dedup: Callable = np.add) -> CsrMatrix:
    """Build a canonical CSR matrix from a sequence of (row, col, value)."""
    tl = list(triples)
    if not tl:
        return from_arrays(nrows, ncols, [], [], np.empty(0, dtype=np.float64), dedup)
    rows = [t[0] for t in tl]
    cols = [t[1] for t in tl]
    vals = np.asarray([t[2] for t in tl])
    return from_arrays(nrows, ncols, rows, cols, vals, dedup)


def to_csc(a: CsrMatrix) -> CscMatrix:
    """Exact transpose of representation: same matrix, column-major storage."""
    nnz = a.nnz
    col_ptr = np.zeros(a.ncols + 1, dtype=np.int64)
    np.add.at(col_ptr, a.col_idx[:nnz] + 1, 1)
    np.cumsum(col_ptr, out=col_ptr)
    # stable sort by column keeps rows ascending within each column
    order = np.argsort(a.col_idx[:nnz], kind="stable")
    rows = np.repeat(np.arange(a.nrows, dtype=np.int64), a.row_lengths())
    return CscMatrix(a.nrows, a.ncols, col_ptr, rows[order], a.values[:nnz][order])


def to_csr(a: CscMatrix) -> CsrMatrix:
    nnz = a.nnz
    row_ptr = np.zeros(a.nrows + 1, dtype=np.int64)
    np.add.at(row_ptr, a.row_idx[:nnz] + 1, 1)
    np.cumsum(row_ptr, out=row_ptr)
    order = np.argsort(a.row_idx[:nnz], kind="stable")
    cols = np.repeat(np.arange(a.ncols, dtype=np.int64), np.diff(a.col_ptr))
    return CsrMatrix(a.nrows, a.ncols, row_ptr, cols[order], a.values[:nnz][order])


def transpose(a: CsrMatrix) -> CsrMatrix:
    """A^T as a canonical CSR matrix."""
    c = to_csc(a)
    return CsrMatrix(a.ncols, a.nrows, c.col_ptr, c.row_idx, c.values)


def tril_strict(a: CsrMatrix) -> CsrMatrix:
    """Keep entries with col < row only (strictly lower triangular part)."""
    if a.nrows != a.ncols:
        raise SparseError("tril_strict requires a square matrix")
    rows, cols, vals = a.triples()
    keep = cols < rows
    return from_arrays(a.nrows, a.ncols, rows[keep], cols[keep], vals[keep])


def triu_strict(a: CsrMatrix) -> CsrMatrix:
    if a.nrows != a.ncols:
        raise SparseError("triu_strict requires a square matrix")
    rows, cols, vals = a.triples()
    keep = cols > rows
    return from_arrays(a.nrows, a.ncols, rows[keep], cols[keep], vals[keep])


def diagonal_part(a: CsrMatrix) -> CsrMatrix:
    if a.nrows != a.ncols:
        raise SparseError("diagonal_part requires a square matrix")
    rows, cols, vals = a.triples()
    keep = cols == rows
    return from_arrays(a.nrows, a.ncols, rows[keep], cols[keep], vals[keep])


def is_pattern_symmetric(a: CsrMatrix) -> bool:
    if a.nrows != a.ncols:
        return False
    t = transpose(a)
    return np.array_equal(a.row_ptr, t.row_ptr) and np.array_equal(
        a.col_idx[: a.nnz], t.col_idx[: t.nnz])


def permute_symmetric(a: CsrMatrix, perm: np.ndarray) -> CsrMatrix:
    """P A P^T where perm[new_index] = old_index."""
    if a.nrows != a.ncols:
        raise SparseError("symmetric permutation requires a square matrix")
    new_label = np.empty(a.nrows, dtype=np.int64)
    new_label[perm] = np.arange(a.nrows, dtype=np.int64)
    rows, cols, vals = a.triples()
    return from_arrays(a.nrows, a.ncols, new_label[rows], new_label[cols], vals)


def degree_sort_relabel(a: CsrMatrix) -> tuple[CsrMatrix, np.ndarray]:
    """Relabel vertices in non-increasing degree order.

    Ties broken by original index ascending, so the permutation is
    deterministic.  Returns (P A P^T, perm) with perm[new_index] = old_index.
    Requires a square, pattern-symmetric matrix.
    """
    if a.nrows != a.ncols:
        raise SparseError("degree_sort_relabel requires a square matrix")
    if not is_pattern_symmetric(a):
        raise SparseError("degree_sort_relabel requires a pattern-symmetric matrix")
    deg = a.row_lengths()
    perm = np.lexsort((np.arange(a.nrows), -deg)).astype(np.int64)
    return permute_symmetric(a, perm), perm


def simple_undirected_graph(a: CsrMatrix) -> CsrMatrix:
    """Normalize to a simple undirected graph: symmetrize, drop self-loops,
    merge duplicate edges, set all values to 1."""
    if a.nrows != a.ncols:
        raise SparseError("a graph adjacency matrix must be square")
    rows, cols, _ = a.triples()
    keep = rows != cols
    rows, cols = rows[keep], cols[keep]
    r = np.concatenate([rows, cols])
    c = np.concatenate([cols, rows])
    ones = np.ones(r.size, dtype=np.int64)
    g = from_arrays(a.nrows, a.ncols, r, c, ones)
    g.values[:] = 1
    return g


def ewise_add(a: CsrMatrix, b: CsrMatrix, add: Callable = np.add) -> CsrMatrix:
    """Element-wise union add of two same-shape matrices."""
    if a.shape != b.shape:
        raise SparseError(f"shape mismatch {a.shape} vs {b.shape}")
    ar, ac, av = a.triples()
    br, bc, bv = b.triples()
    dtype = np.promote_types(av.dtype, bv.dtype)
    return from_arrays(a.nrows, a.ncols,
                       np.concatenate([ar, br]), np.concatenate([ac, bc]),
                       np.concatenate([av.astype(dtype), bv.astype(dtype)]),
                       dedup=add)

"""Per-row accumulators behind the common setAllowed / insert / remove interface.

An accumulator merges the scaled rows contributing to one output row while
the mask filters which columns may survive.  Entries move through three
states: NOT-ALLOWED (discard inserts without evaluating them), ALLOWED
(first insert stores the value), SET (later inserts accumulate with the
semiring add).  ``insert`` takes a zero-argument thunk so the product is
only computed when it will not be discarded.

Four implementations: a dense masked sparse accumulator (MSA), an
open-addressed hash table, a mask-compressed accumulator indexed by mask
rank (MCA), and a heap-based multiway merge.  The row-level ``*_spgevm``
functions here are the readable reference route; the compiled full-matrix
kernels in :mod:`maskmul._kernels` implement the same algorithms and are
cross-checked against this layer in the test suite.

One accumulator instance belongs to one worker; the driver guarantees
exclusive use during a row computation.  After every row the scratch is
restored to the default state, so the O(ncols) MSA initialization is paid
once per worker, not once per row.
"""

from __future__ import annotations

import heapq
import math
from itertools import count as _counter

import numpy as np

from .semiring import Semiring
from .sparse import CsrMatrix

NOT_ALLOWED = 0
ALLOWED = 1
SET = 2

NINSPECT_INF = math.inf


class MsaAccumulator:
    """Dense values/states arrays of length ncols.

    Under a complemented mask the default state flips to ALLOWED, mask
    entries are marked NOT-ALLOWED, and an extra list tracks inserted keys
    so the gather never scans the whole array.
    """

    def __init__(self, ncols: int, semiring: Semiring, complemented: bool = False):
        self.ncols = ncols
        self.semiring = semiring
        self.default_state = ALLOWED if complemented else NOT_ALLOWED
        self.states = np.full(ncols, self.default_state, dtype=np.int8)
        self.values = np.zeros(ncols, dtype=semiring.dtype)
        self.inserted_keys: list[int] = []

    def set_allowed(self, key: int) -> None:
        self.states[key] = ALLOWED

    def set_not_allowed(self, key: int) -> None:
        self.states[key] = NOT_ALLOWED

    def insert(self, key: int, value_thunk) -> None:
        st = self.states[key]
        if st == NOT_ALLOWED:
            return
        if st == ALLOWED:
            self.values[key] = value_thunk()
            self.states[key] = SET
            if self.default_state == ALLOWED:
                self.inserted_keys.append(key)
        else:
            self.values[key] = self.semiring.add(self.values[key], value_thunk())

    def remove(self, key: int):
        st = self.states[key]
        self.states[key] = self.default_state
        if st == SET:
            return self.values[key]
        return None

    def scratch_clean(self) -> bool:
        return bool(np.all(self.states == self.default_state))


def _next_pow2(x: int) -> int:
    n = 4
    while n < x:
        n <<= 1
    return n


class HashAccumulator:
    """Open addressing with linear probing; no resizing.

    A non-complemented mask bounds the distinct keys by nnz(m), so capacity
    is the smallest power of two >= 4*nnz(m) (load factor 0.25).  Under a
    complemented mask the table additionally holds the NOT-ALLOWED mask
    marks, so the capacity covers nnz(m) plus min(flops, ncols).
    The empty-slot sentinel is the impossible key ncols.
    """

    def __init__(self, nnz_mask: int, ncols: int, semiring: Semiring,
                 complemented: bool = False, flops_bound: int | None = None):
        if complemented:
            if flops_bound is None:
                raise ValueError("complemented hash accumulator needs a flops bound")
            self.capacity = _next_pow2(4 * (nnz_mask + min(flops_bound, ncols)))
        else:
            self.capacity = _next_pow2(4 * nnz_mask)
        self.ncols = ncols
        self.semiring = semiring
        self.complemented = complemented
        self.empty_key = ncols
        self.keys = np.full(self.capacity, self.empty_key, dtype=np.int64)
        self.states = np.zeros(self.capacity, dtype=np.int8)
        self.values = np.zeros(self.capacity, dtype=semiring.dtype)
        self.inserted_keys: list[int] = []
        self.occupancy = 0
        self.max_probes = 0
        self._shift = 64 - int(self.capacity).bit_length() + 1

    def _slot(self, key: int, claim: bool) -> tuple[int, bool]:
        """Probe for key; returns (slot, claimed_new).  Slot is -1 when the
        key is absent and claiming is off."""
        h = ((key * 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF) >> self._shift
        probes = 1
        mask = self.capacity - 1
        h &= mask
        claimed = False
        while True:
            k = self.keys[h]
            if k == key:
                break
            if k == self.empty_key:
                if not claim:
                    self.max_probes = max(self.max_probes, probes)
                    return -1, False
                self.keys[h] = key
                self.occupancy += 1
                claimed = True
                break
            h = (h + 1) & mask
            probes += 1
            assert probes <= self.capacity, "hash table full: capacity bound violated"
        self.max_probes = max(self.max_probes, probes)
        return h, claimed

    def set_allowed(self, key: int) -> None:
        s, _ = self._slot(key, claim=True)
        self.states[s] = ALLOWED

    def set_not_allowed(self, key: int) -> None:
        s, _ = self._slot(key, claim=True)
        self.states[s] = NOT_ALLOWED

    def insert(self, key: int, value_thunk) -> None:
        if self.complemented:
            # absent key means ALLOWED: claim the slot
            s, claimed = self._slot(key, claim=True)
            st = ALLOWED if claimed else self.states[s]
            if st == NOT_ALLOWED:
                return
            if st == SET:
                self.values[s] = self.semiring.add(self.values[s], value_thunk())
            else:
                self.values[s] = value_thunk()
                self.states[s] = SET
                self.inserted_keys.append(key)
        else:
            # absent key means NOT-ALLOWED: never claims a slot
            s, _ = self._slot(key, claim=False)
            if s < 0 or self.states[s] == NOT_ALLOWED:
                return
            if self.states[s] == ALLOWED:
                self.values[s] = value_thunk()
                self.states[s] = SET
            else:
                self.values[s] = self.semiring.add(self.values[s], value_thunk())

    def remove(self, key: int):
        s, _ = self._slot(key, claim=False)
        if s < 0:
            return None
        st = self.states[s]
        self.states[s] = ALLOWED if self.complemented else NOT_ALLOWED
        if st == SET:
            return self.values[s]
        return None


class McaAccumulator:
    """Arrays of length nnz(m) indexed by mask rank, never by column index.

    The mask guarantees no key can be NOT-ALLOWED, so only two states
    remain.  No complemented variant exists.
    """

    def __init__(self, nnz_mask: int, semiring: Semiring):
        self.semiring = semiring
        self.states = np.full(nnz_mask, ALLOWED, dtype=np.int8)
        self.values = np.zeros(nnz_mask, dtype=semiring.dtype)

    def insert(self, rank: int, value_thunk) -> None:
        if self.states[rank] == ALLOWED:
            self.values[rank] = value_thunk()
            self.states[rank] = SET
        else:
            self.values[rank] = self.semiring.add(self.values[rank], value_thunk())

    def remove(self, rank: int):
        st = self.states[rank]
        self.states[rank] = ALLOWED
        if st == SET:
            return self.values[rank]
        return None


class RowIterator:
    """Cursor over one stored row of B, ordered by column index.

    ``scale`` carries the u-element the row is scaled by.
    """

    __slots__ = ("cols", "vals", "pos", "end", "scale")

    def __init__(self, cols, vals, scale=None, pos: int = 0):
        self.cols = cols
        self.vals = vals
        self.scale = scale
        self.pos = pos
        self.end = len(cols)

    def valid(self) -> bool:
        return self.pos < self.end

    @property
    def col(self) -> int:
        return int(self.cols[self.pos])

    @property
    def val(self):
        return self.vals[self.pos]

    def advance(self) -> None:
        self.pos += 1


def heap_insert(pq: list, row_iter: RowIterator, mask_cols, mask_pos: int,
                n_inspect, seq=None) -> None:
    """Push a row iterator unless inspection proves it can produce no output.

    ``mask_pos`` is the current position of the row-level mask cursor; the
    inspection walks a local copy forward (the shared cursor itself advances
    only in the main loop).  With n_inspect = 0 the push is unconditional;
    with n_inspect = 1 at most one mask element is inspected; with
    n_inspect = inf the merge runs until a match or exhaustion.
    """
    if not row_iter.valid():
        return
    if seq is None:
        seq = _counter()
    if n_inspect == 0:
        heapq.heappush(pq, (row_iter.col, next(seq), row_iter))
        return
    to_inspect = n_inspect
    mp = mask_pos
    mend = len(mask_cols)
    while row_iter.valid() and mp < mend:
        rc = row_iter.col
        mc = mask_cols[mp]
        if rc == mc:
            heapq.heappush(pq, (rc, next(seq), row_iter))
            return
        if rc < mc:
            row_iter.advance()
        else:
            mp += 1
            to_inspect -= 1
            if to_inspect == 0:
                heapq.heappush(pq, (row_iter.col, next(seq), row_iter))
                return
    # row or mask exhausted: every remaining element is provably masked out


def heap_spgevm(mask_cols, u_cols, u_vals, b: CsrMatrix, semiring: Semiring,
                n_inspect=1, complemented: bool = False):
    """Multiway-merge row computation v = m (.) (u B) via a min-heap.

    Row iterators are keyed by their current column index, so products pop
    in non-decreasing column order and consecutive equal columns merge via
    the semiring add.  A complemented mask keeps the elements in the set
    difference S \\ m instead of the intersection; n_inspect is then
    forced to 0 (inspection would need the complement of the mask).
    """
    if complemented:
        n_inspect = 0
    mask_cols = np.asarray(mask_cols, dtype=np.int64)
    seq = _counter()
    pq: list = []
    for k, uv in zip(u_cols, u_vals):
        cols, vals = b.row(int(k))
        heap_insert(pq, RowIterator(cols, vals, uv), mask_cols, 0, n_inspect, seq)

    out_cols: list[int] = []
    out_vals: list = []
    mp = 0
    mend = len(mask_cols)
    prev_key = -1
    while pq:
        _, _, it = heapq.heappop(pq)
        col = it.col
        while mp < mend and mask_cols[mp] < col:
            mp += 1
        if complemented:
            hit = not (mp < mend and mask_cols[mp] == col)
        else:
            if mp >= mend:
                break
            hit = mask_cols[mp] == col
        if hit:
            prod = semiring.multiply(it.scale, it.val)
            if prev_key == col:
                out_vals[-1] = semiring.add(out_vals[-1], prod)
            else:
                out_cols.append(col)
                out_vals.append(prod)
                prev_key = col
        it.advance()
        heap_insert(pq, it, mask_cols, mp, n_inspect, seq)
    return (np.array(out_cols, dtype=np.int64),
            np.array(out_vals, dtype=semiring.dtype))


def msa_spgevm(mask_cols, u_cols, u_vals, b: CsrMatrix, semiring: Semiring,
               complemented: bool = False, acc: MsaAccumulator | None = None):
    """Row computation with the dense masked sparse accumulator."""
    if acc is None:
        acc = MsaAccumulator(b.ncols, semiring, complemented)
    mark = acc.set_not_allowed if complemented else acc.set_allowed
    for j in mask_cols:
        mark(int(j))
    for k, uv in zip(u_cols, u_vals):
        cols, vals = b.row(int(k))
        for j, bv in zip(cols, vals):
            acc.insert(int(j), lambda uv=uv, bv=bv: semiring.multiply(uv, bv))
    out_cols: list[int] = []
    out_vals: list = []
    if complemented:
        for j in sorted(acc.inserted_keys):
            v = acc.remove(j)
            if v is not None:
                out_cols.append(j)
                out_vals.append(v)
        acc.inserted_keys.clear()
        for j in mask_cols:
            acc.remove(int(j))
    else:
        for j in mask_cols:
            v = acc.remove(int(j))
            if v is not None:
                out_cols.append(int(j))
                out_vals.append(v)
    return (np.array(out_cols, dtype=np.int64),
            np.array(out_vals, dtype=semiring.dtype))


def hash_spgevm(mask_cols, u_cols, u_vals, b: CsrMatrix, semiring: Semiring,
                complemented: bool = False):
    """Row computation with the open-addressed hash accumulator."""
    flops = int(sum(len(b.row(int(k))[0]) for k in u_cols))
    if complemented and flops == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=semiring.dtype)
    acc = HashAccumulator(len(mask_cols), b.ncols, semiring,
                          complemented=complemented, flops_bound=flops)
    mark = acc.set_not_allowed if complemented else acc.set_allowed
    for j in mask_cols:
        mark(int(j))
    for k, uv in zip(u_cols, u_vals):
        cols, vals = b.row(int(k))
        for j, bv in zip(cols, vals):
            acc.insert(int(j), lambda uv=uv, bv=bv: semiring.multiply(uv, bv))
    out_cols: list[int] = []
    out_vals: list = []
    keys = sorted(acc.inserted_keys) if complemented else [int(j) for j in mask_cols]
    for j in keys:
        v = acc.remove(j)
        if v is not None:
            out_cols.append(j)
            out_vals.append(v)
    return (np.array(out_cols, dtype=np.int64),
            np.array(out_vals, dtype=semiring.dtype))


def mca_spgevm(mask_cols, u_cols, u_vals, b: CsrMatrix, semiring: Semiring,
               acc: McaAccumulator | None = None):
    """Row computation with the mask-compressed accumulator (no complement).

    The rank of a mask nonzero (its position within the sorted mask row)
    indexes the accumulator; the merge-style scan finds it without lookup
    tables, taking O(nnz(u) * nnz(m) + flops) time.
    """
    mask_cols = np.asarray(mask_cols, dtype=np.int64)
    nm = len(mask_cols)
    if acc is None:
        acc = McaAccumulator(nm, semiring)
    for k, uv in zip(u_cols, u_vals):
        cols, vals = b.row(int(k))
        pos, end = 0, len(cols)
        for rank in range(nm):
            j = mask_cols[rank]
            while pos < end and cols[pos] < j:
                pos += 1
            if pos >= end:
                break
            if cols[pos] == j:
                bv = vals[pos]
                acc.insert(rank, lambda uv=uv, bv=bv: semiring.multiply(uv, bv))
    out_cols: list[int] = []
    out_vals: list = []
    for rank in range(nm):
        v = acc.remove(rank)
        if v is not None:
            out_cols.append(int(mask_cols[rank]))
            out_vals.append(v)
    return (np.array(out_cols, dtype=np.int64),
            np.array(out_vals, dtype=semiring.dtype))


def spgevm(algorithm: str, mask_cols, u_cols, u_vals, b: CsrMatrix,
           semiring: Semiring, complemented: bool = False):
    """Dispatch a single-row masked product to one of the accumulators."""
    if algorithm == "msa":
        return msa_spgevm(mask_cols, u_cols, u_vals, b, semiring, complemented)
    if algorithm == "hash":
        return hash_spgevm(mask_cols, u_cols, u_vals, b, semiring, complemented)
    if algorithm == "mca":
        if complemented:
            raise ValueError("the mask-compressed accumulator does not support "
                             "complemented masks")
        return mca_spgevm(mask_cols, u_cols, u_vals, b, semiring)
    if algorithm == "heap":
        return heap_spgevm(mask_cols, u_cols, u_vals, b, semiring, 1, complemented)
    if algorithm == "heapdot":
        return heap_spgevm(mask_cols, u_cols, u_vals, b, semiring, NINSPECT_INF,
                           complemented)
    raise ValueError(f"unknown accumulator algorithm {algorithm!r}")

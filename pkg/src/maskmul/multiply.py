"""Full-matrix masked multiply drivers: C = M (.) (A B), plain or complemented.

Push algorithms (msa, hash, mca, heap, heapdot) compute each output row as a
mask-filtered linear combination of B rows selected by the nonzeros of the
corresponding A row; the pull algorithm (inner) computes a sparse dot product
per mask nonzero against B stored column-major.

Execution is row-parallel: workers pull chunks of rows off a shared counter
(dynamic scheduling, tunable grain), each owning one accumulator's scratch.
Rows are computed atomically by one worker with a fixed per-row operation
order, so outputs and counters are bitwise identical for any worker count.

One-phase execution reserves per-row output slots from an upper bound
(nnz of the mask row when plain, min(row flops, ncols) when complemented)
and compacts; two-phase runs a symbolic pass for exact per-row counts first.

An output entry exists exactly where the accumulator reached SET: a value
numerically equal to the semiring zero is stored, not dropped.
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field, replace
from itertools import count as _counter

import numpy as np

from . import _kernels as K
from .semiring import Semiring, arithmetic_semiring
from .sparse import CscMatrix, CsrMatrix, MaskView, SparseError, to_csc, to_csr

ALGORITHMS = ("msa", "hash", "mca", "heap", "heapdot", "inner")
PHASES = ("1p", "2p")

_LABELS = {"msa": "MSA", "hash": "Hash", "mca": "MCA", "heap": "Heap",
           "heapdot": "HeapDot", "inner": "Inner"}


class PlanError(ValueError):
    """The requested plan cannot execute this multiply."""


@dataclass(frozen=True)
class MultiplyPlan:
    algorithm: str = "msa"
    phases: str = "1p"
    complemented: bool = False
    semiring: Semiring = field(default_factory=arithmetic_semiring)
    workers: int = 1
    grain: int = 64
    n_inspect: float | None = None  # heap override: 0, 1 or math.inf

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise PlanError(f"unknown algorithm {self.algorithm!r}")
        if self.phases not in PHASES:
            raise PlanError(f"phases must be one of {PHASES}")
        if self.workers < 1:
            raise PlanError("workers must be >= 1")
        if self.grain < 1:
            raise PlanError("grain must be >= 1")
        if self.n_inspect not in (None, 0, 1, math.inf):
            raise PlanError("n_inspect must be 0, 1 or inf")
        if self.algorithm == "mca" and self.complemented:
            raise PlanError("the mask-compressed accumulator does not support "
                            "complemented masks")
        if self.algorithm == "inner" and self.complemented:
            raise PlanError("the inner-product algorithm does not support "
                            "complemented masks")

    @property
    def effective_n_inspect(self) -> float:
        if self.n_inspect is not None:
            return self.n_inspect
        return math.inf if self.algorithm == "heapdot" else 1

    def label(self) -> str:
        return f"{_LABELS[self.algorithm]}-{self.phases.upper()}"


@dataclass
class MultiplyStats:
    """Counters exposed by one multiply: generated flops = classical
    flops(A B) = sum over A nonzeros of the matching B row length;
    evaluated multiplies = products actually computed after mask filtering."""

    generated_flops: int = 0
    evaluated_multiplies: int = 0
    symbolic_seconds: float = 0.0
    numeric_seconds: float = 0.0
    assemble_seconds: float = 0.0
    output_nnz: int = 0
    workers: int = 1

    @property
    def total_seconds(self) -> float:
        return self.symbolic_seconds + self.numeric_seconds + self.assemble_seconds


def flops_per_row(a: CsrMatrix, b_row_lengths: np.ndarray) -> np.ndarray:
    """Classical flops(A B) restricted to each output row."""
    per_nnz = b_row_lengths[a.col_idx[: a.nnz]]
    cs = np.zeros(a.nnz + 1, dtype=np.int64)
    np.cumsum(per_nnz, out=cs[1:])
    return cs[a.row_ptr[1:]] - cs[a.row_ptr[:-1]]


def flops_of(a: CsrMatrix, b) -> int:
    return int(flops_per_row(a, _row_lengths_of(b)).sum())


def _row_lengths_of(b) -> np.ndarray:
    if isinstance(b, CsrMatrix):
        return np.diff(b.row_ptr)
    return np.bincount(b.row_idx[: b.nnz], minlength=b.nrows).astype(np.int64)


def _next_pow2_array(x: np.ndarray) -> np.ndarray:
    out = np.maximum(x, 1)
    return (1 << np.ceil(np.log2(out.astype(np.float64))).astype(np.int64)) \
        .astype(np.int64)


def _run_chunks(nrows: int, workers: int, grain: int, make_scratch, chunk_fn) -> int:
    """Dynamic row-chunk scheduler; returns the summed chunk_fn results.

    chunk_fn(lo, hi, scratch) must only write per-row output slots and its
    own scratch, so interleaving cannot affect results.
    """
    nchunks = (nrows + grain - 1) // grain
    if nchunks == 0:
        return 0
    if workers <= 1 or nchunks == 1:
        scratch = make_scratch()
        total = 0
        for c in range(nchunks):
            lo = c * grain
            total += chunk_fn(lo, min(nrows, lo + grain), scratch)
        return total
    counter = _counter()
    lock = threading.Lock()
    totals: list[int] = []
    errors: list[BaseException] = []

    def work():
        try:
            scratch = make_scratch()
            t = 0
            while True:
                with lock:
                    c = next(counter)
                if c >= nchunks:
                    break
                lo = c * grain
                t += chunk_fn(lo, min(nrows, lo + grain), scratch)
            with lock:
                totals.append(t)
        except BaseException as exc:  # surfaced after join
            with lock:
                errors.append(exc)

    threads = [threading.Thread(target=work) for _ in range(min(workers, nchunks))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    return sum(totals)


class _Prepared:
    """Validated, dtype-cast, contiguous views of one multiply's inputs."""

    def __init__(self, mask: MaskView, a: CsrMatrix, b, plan: MultiplyPlan):
        if not isinstance(a, CsrMatrix):
            raise SparseError("A must be a CsrMatrix")
        self.comp = bool(plan.complemented or mask.complemented)
        algo = plan.algorithm
        if algo == "mca" and self.comp:
            raise PlanError("the mask-compressed accumulator does not support "
                            "complemented masks")
        if algo == "inner" and self.comp:
            raise PlanError("the inner-product algorithm does not support "
                            "complemented masks")
        b_nrows, b_ncols = b.shape
        if mask.nrows != a.nrows or mask.ncols != b_ncols or a.ncols != b_nrows:
            raise SparseError(
                f"dimension mismatch: mask {mask.shape}, A {a.shape}, B {b.shape}")
        dt = plan.semiring.dtype
        self.sr = plan.semiring.kernel_id
        self.one = dt.type(1)
        self.dtype = dt
        self.nrows = mask.nrows
        self.ncols = mask.ncols
        self.a_ptr = np.ascontiguousarray(a.row_ptr, dtype=np.int64)
        self.a_idx = np.ascontiguousarray(a.col_idx[: a.nnz], dtype=np.int64)
        self.a_val = np.ascontiguousarray(a.values[: a.nnz].astype(dt, copy=False))
        self.m_ptr = np.ascontiguousarray(mask.row_ptr, dtype=np.int64)
        self.m_idx = np.ascontiguousarray(mask.col_idx[: mask.nnz], dtype=np.int64)
        self.mask_lengths = np.diff(self.m_ptr)
        if algo == "inner":
            bc = b if isinstance(b, CscMatrix) else to_csc(b)
            self.bc_ptr = np.ascontiguousarray(bc.col_ptr, dtype=np.int64)
            self.bc_row = np.ascontiguousarray(bc.row_idx[: bc.nnz], dtype=np.int64)
            self.bc_val = np.ascontiguousarray(bc.values[: bc.nnz].astype(dt, copy=False))
            self.b_row_lengths = _row_lengths_of(bc)
        else:
            br = b if isinstance(b, CsrMatrix) else to_csr(b)
            self.b_ptr = np.ascontiguousarray(br.row_ptr, dtype=np.int64)
            self.b_idx = np.ascontiguousarray(br.col_idx[: br.nnz], dtype=np.int64)
            self.b_val = np.ascontiguousarray(br.values[: br.nnz].astype(dt, copy=False))
            self.b_row_lengths = np.diff(self.b_ptr)
        self.row_flops = flops_per_row(a, self.b_row_lengths)
        self.max_a_row = int(np.diff(self.a_ptr).max()) if self.nrows and a.nnz else 0
        self.max_mask_row = int(self.mask_lengths.max()) if self.nrows and mask.nnz else 0
        if algo == "hash":
            if self.comp:
                keys = self.mask_lengths + np.minimum(self.row_flops, self.ncols)
            else:
                keys = self.mask_lengths
            self.row_cap = _next_pow2_array(4 * keys)
            self.cap_max = int(self.row_cap.max()) if self.nrows else 4
        self.ninspect = plan.effective_n_inspect
        self.kernel_ninspect = -1 if self.ninspect == math.inf else int(self.ninspect)

    def one_phase_bounds(self) -> np.ndarray:
        if self.comp:
            return np.minimum(self.row_flops, self.ncols)
        return self.mask_lengths.copy()


def _make_scratch_factory(p: _Prepared, algo: str):
    dt = p.dtype
    if algo == "msa":
        default = np.int8(1 if p.comp else 0)

        def make():
            states = np.full(p.ncols, default, dtype=np.int8)
            values = np.zeros(p.ncols, dtype=dt)
            inserted = np.empty(p.ncols, dtype=np.int64)
            return states, values, inserted
    elif algo == "hash":
        def make():
            hkeys = np.empty(p.cap_max, dtype=np.int64)
            hstates = np.empty(p.cap_max, dtype=np.int8)
            hvals = np.empty(p.cap_max, dtype=dt)
            inserted = np.empty(max(p.ncols, 1), dtype=np.int64)
            return hkeys, hstates, hvals, inserted
    elif algo == "mca":
        def make():
            states = np.full(max(p.max_mask_row, 1), 1, dtype=np.int8)
            values = np.zeros(max(p.max_mask_row, 1), dtype=dt)
            return states, values
    elif algo in ("heap", "heapdot"):
        def make():
            size = max(p.max_a_row, 1)
            return (np.empty(size, dtype=np.int64), np.empty(size, dtype=np.int64),
                    np.empty(size, dtype=np.int64), np.empty(size, dtype=np.int64))
    else:  # inner
        def make():
            return ()
    return make


def _numeric_chunk_fn(p: _Prepared, algo: str, out_off, out_idx, out_val, row_nnz):
    comp = p.comp
    sr = p.sr
    one = p.one
    if algo == "msa":
        def fn(lo, hi, scr):
            states, values, inserted = scr
            return int(K.msa_numeric(lo, hi, p.a_ptr, p.a_idx, p.a_val,
                                     p.b_ptr, p.b_idx, p.b_val, p.m_ptr, p.m_idx,
                                     comp, sr, one, states, values, inserted,
                                     out_off, out_idx, out_val, row_nnz))
    elif algo == "hash":
        def fn(lo, hi, scr):
            hkeys, hstates, hvals, inserted = scr
            return int(K.hash_numeric(lo, hi, p.a_ptr, p.a_idx, p.a_val,
                                      p.b_ptr, p.b_idx, p.b_val, p.m_ptr, p.m_idx,
                                      comp, sr, one, p.ncols, p.row_cap,
                                      hkeys, hstates, hvals, inserted,
                                      out_off, out_idx, out_val, row_nnz))
    elif algo == "mca":
        def fn(lo, hi, scr):
            states, values = scr
            return int(K.mca_numeric(lo, hi, p.a_ptr, p.a_idx, p.a_val,
                                     p.b_ptr, p.b_idx, p.b_val, p.m_ptr, p.m_idx,
                                     sr, one, states, values,
                                     out_off, out_idx, out_val, row_nnz))
    elif algo in ("heap", "heapdot"):
        ninspect = p.kernel_ninspect

        def fn(lo, hi, scr):
            hcol, hpos, hend, hapos = scr
            return int(K.heap_numeric(lo, hi, p.a_ptr, p.a_idx, p.a_val,
                                      p.b_ptr, p.b_idx, p.b_val, p.m_ptr, p.m_idx,
                                      comp, ninspect, sr, one,
                                      hcol, hpos, hend, hapos,
                                      out_off, out_idx, out_val, row_nnz))
    else:  # inner
        def fn(lo, hi, scr):
            return int(K.inner_numeric(lo, hi, p.a_ptr, p.a_idx, p.a_val,
                                       p.bc_ptr, p.bc_row, p.bc_val,
                                       p.m_ptr, p.m_idx, sr, one,
                                       out_off, out_idx, out_val, row_nnz))
    return fn


def _symbolic_chunk_fn(p: _Prepared, algo: str, row_nnz):
    comp = p.comp
    if algo == "msa":
        def fn(lo, hi, scr):
            states, _values, inserted = scr
            return int(K.msa_symbolic(lo, hi, p.a_ptr, p.a_idx, p.b_ptr, p.b_idx,
                                      p.m_ptr, p.m_idx, comp, states, inserted,
                                      row_nnz))
    elif algo == "hash":
        def fn(lo, hi, scr):
            hkeys, hstates, _hvals, _ins = scr
            return int(K.hash_symbolic(lo, hi, p.a_ptr, p.a_idx, p.b_ptr, p.b_idx,
                                       p.m_ptr, p.m_idx, comp, p.ncols, p.row_cap,
                                       hkeys, hstates, row_nnz))
    elif algo == "mca":
        def fn(lo, hi, scr):
            states, _values = scr
            return int(K.mca_symbolic(lo, hi, p.a_ptr, p.a_idx, p.b_ptr, p.b_idx,
                                      p.m_ptr, p.m_idx, states, row_nnz))
    elif algo in ("heap", "heapdot"):
        ninspect = p.kernel_ninspect

        def fn(lo, hi, scr):
            hcol, hpos, hend, hapos = scr
            return int(K.heap_symbolic(lo, hi, p.a_ptr, p.a_idx, p.b_ptr, p.b_idx,
                                       p.m_ptr, p.m_idx, comp, ninspect,
                                       hcol, hpos, hend, hapos, row_nnz))
    else:  # inner
        def fn(lo, hi, scr):
            return int(K.inner_symbolic(lo, hi, p.a_ptr, p.a_idx,
                                        p.bc_ptr, p.bc_row, p.m_ptr, p.m_idx,
                                        row_nnz))
    return fn


def masked_multiply_with_stats(mask: MaskView, a: CsrMatrix, b,
                               plan: MultiplyPlan) -> tuple[CsrMatrix, MultiplyStats]:
    p = _Prepared(mask, a, b, plan)
    algo = plan.algorithm
    stats = MultiplyStats(generated_flops=int(p.row_flops.sum()), workers=plan.workers)
    nrows = p.nrows
    make_scratch = _make_scratch_factory(p, algo)
    row_nnz = np.zeros(nrows, dtype=np.int64)

    if plan.phases == "2p":
        t0 = time.perf_counter()
        counts = np.zeros(nrows, dtype=np.int64)
        _run_chunks(nrows, plan.workers, plan.grain, make_scratch,
                    _symbolic_chunk_fn(p, algo, counts))
        stats.symbolic_seconds = time.perf_counter() - t0

        t0 = time.perf_counter()
        out_ptr = np.zeros(nrows + 1, dtype=np.int64)
        np.cumsum(counts, out=out_ptr[1:])
        total = int(out_ptr[nrows])
        out_idx = np.empty(total, dtype=np.int64)
        out_val = np.empty(total, dtype=p.dtype)
        stats.evaluated_multiplies = _run_chunks(
            nrows, plan.workers, plan.grain, make_scratch,
            _numeric_chunk_fn(p, algo, out_ptr[:nrows], out_idx, out_val, row_nnz))
        stats.numeric_seconds = time.perf_counter() - t0
        assert np.array_equal(row_nnz, counts), \
            "symbolic phase disagreed with numeric row sizes"
    else:
        t0 = time.perf_counter()
        bounds = p.one_phase_bounds()
        bounds_ptr = np.zeros(nrows + 1, dtype=np.int64)
        np.cumsum(bounds, out=bounds_ptr[1:])
        tmp_idx = np.empty(int(bounds_ptr[nrows]), dtype=np.int64)
        tmp_val = np.empty(int(bounds_ptr[nrows]), dtype=p.dtype)
        stats.evaluated_multiplies = _run_chunks(
            nrows, plan.workers, plan.grain, make_scratch,
            _numeric_chunk_fn(p, algo, bounds_ptr[:nrows], tmp_idx, tmp_val, row_nnz))
        stats.numeric_seconds = time.perf_counter() - t0

        t0 = time.perf_counter()
        assert np.all(row_nnz <= bounds), "one-phase row bound violated"
        out_ptr = np.zeros(nrows + 1, dtype=np.int64)
        np.cumsum(row_nnz, out=out_ptr[1:])
        total = int(out_ptr[nrows])
        out_idx = np.empty(total, dtype=np.int64)
        out_val = np.empty(total, dtype=p.dtype)
        if total:
            K.compact_rows(bounds_ptr[:nrows], row_nnz, tmp_idx, tmp_val,
                           out_ptr, out_idx, out_val)
        stats.assemble_seconds = time.perf_counter() - t0

    stats.output_nnz = total
    c = CsrMatrix(nrows, p.ncols, out_ptr, out_idx, out_val)
    return c, stats


def masked_multiply(mask: MaskView, a: CsrMatrix, b, plan: MultiplyPlan) -> CsrMatrix:
    c, _ = masked_multiply_with_stats(mask, a, b, plan)
    return c


def symbolic_phase(mask: MaskView, a: CsrMatrix, b, plan: MultiplyPlan) -> np.ndarray:
    """Exact per-row output nnz, running the accumulator logic with value
    operations elided."""
    p = _Prepared(mask, a, b, plan)
    counts = np.zeros(p.nrows, dtype=np.int64)
    _run_chunks(p.nrows, plan.workers, plan.grain,
                _make_scratch_factory(p, plan.algorithm),
                _symbolic_chunk_fn(p, plan.algorithm, counts))
    return counts


def one_phase_multiply(mask: MaskView, a: CsrMatrix, b, plan: MultiplyPlan) -> CsrMatrix:
    return masked_multiply(mask, a, b, replace(plan, phases="1p"))


def two_phase_multiply(mask: MaskView, a: CsrMatrix, b, plan: MultiplyPlan) -> CsrMatrix:
    return masked_multiply(mask, a, b, replace(plan, phases="2p"))


def inner_product_multiply(mask: MaskView, a: CsrMatrix, b, semiring: Semiring,
                           workers: int = 1) -> CsrMatrix:
    """Pull-based multiply: one sparse dot product per mask nonzero."""
    plan = MultiplyPlan(algorithm="inner", semiring=semiring, workers=workers)
    return masked_multiply(mask, a, b, plan)

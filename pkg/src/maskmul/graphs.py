"""Graph kernels expressed over masked multiplies.

Triangle counting uses one lower-triangular masked multiply, k-truss iterates
support-counting multiplies with pruning, and betweenness centrality runs a
batched multi-source forward/backward sweep with complemented (frontier
expansion) and plain (dependency accumulation) masked multiplies.

Each kernel reports the summed wall time and flops of its masked multiplies
only; graph preparation (relabeling, transposition, pruning bookkeeping) is
excluded, so throughput numbers follow the benchmark convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import _kernels as K
from .multiply import MultiplyPlan, PlanError, masked_multiply_with_stats
from .semiring import arithmetic_semiring, plus_pair_semiring
from .sparse import (CsrMatrix, SparseError, degree_sort_relabel, ewise_add,
                     from_arrays, is_pattern_symmetric, transpose, tril_strict)


@dataclass(frozen=True)
class BcConfig:
    batch_size: int = 512
    sources: Sequence[int] | None = None  # None: every vertex is a source

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.sources is not None:
            src = list(self.sources)
            if len(set(src)) != len(src):
                raise ValueError("sources must be distinct")


@dataclass
class KernelResult:
    value: object
    multiply_seconds: float = 0.0
    flops: int = 0
    evaluated: int = 0
    multiplies: int = 0
    per_multiply: list = field(default_factory=list)  # (seconds, flops) pairs


class _Recorder:
    """Accumulates per-multiply counters for one kernel invocation."""

    def __init__(self):
        self.seconds = 0.0
        self.flops = 0
        self.evaluated = 0
        self.count = 0
        self.per: list[tuple[float, int]] = []

    def multiply(self, mask, a, b, plan) -> CsrMatrix:
        c, st = masked_multiply_with_stats(mask, a, b, plan)
        self.seconds += st.total_seconds
        self.flops += st.generated_flops
        self.evaluated += st.evaluated_multiplies
        self.count += 1
        self.per.append((st.total_seconds, st.generated_flops))
        return c

    def finish(self, value) -> KernelResult:
        return KernelResult(value, self.seconds, self.flops, self.evaluated,
                            self.count, self.per)


def _check_simple_symmetric(g: CsrMatrix, what: str) -> None:
    if g.nrows != g.ncols:
        raise SparseError(f"{what} requires a square adjacency matrix")
    if not is_pattern_symmetric(g):
        raise SparseError(f"{what} requires a pattern-symmetric adjacency matrix; "
                          "normalize with simple_undirected_graph() first")
    rows, cols, _ = g.triples()
    if np.any(rows == cols):
        raise SparseError(f"{what} requires a simple graph (no self-loops); "
                          "normalize with simple_undirected_graph() first")


def triangle_count(g: CsrMatrix, plan: MultiplyPlan) -> KernelResult:
    """Total triangles: relabel by non-increasing degree, take the strictly
    lower triangle L, and fully reduce L (.) (L L) under plus-pair."""
    _check_simple_symmetric(g, "triangle counting")
    relabeled, _ = degree_sort_relabel(g)
    low = tril_strict(relabeled)
    kplan = replace(plan, semiring=plus_pair_semiring(np.int64), complemented=False)
    rec = _Recorder()
    t = rec.multiply(low.pattern(), low, low, kplan)
    return rec.finish(int(t.values[: t.nnz].sum()) if t.nnz else 0)


def k_truss(g: CsrMatrix, k: int, plan: MultiplyPlan) -> KernelResult:
    """Edges supported by at least k-2 triangles, pruning iteratively until a
    fixed point.  Support per surviving edge is G (.) (G G) under plus-pair
    with the current graph as its own mask; all under-supported edges are
    removed each round and the CSR is rebuilt to stay canonical."""
    if k < 3:
        raise ValueError("k-truss needs k >= 3")
    _check_simple_symmetric(g, "k-truss")
    kplan = replace(plan, semiring=plus_pair_semiring(np.int64), complemented=False)
    rec = _Recorder()
    cur = g
    while cur.nnz:
        support = rec.multiply(cur.pattern(), cur, cur, kplan)
        rows, cols, vals = support.triples()
        keep = vals >= k - 2
        if int(keep.sum()) == cur.nnz:
            break
        cur = from_arrays(cur.nrows, cur.ncols, rows[keep], cols[keep],
                          np.ones(int(keep.sum()), dtype=np.int64))
    return rec.finish(cur)


def _values_at(ptr: np.ndarray, idx: np.ndarray, y: CsrMatrix) -> np.ndarray:
    """Values of y at the given pattern's positions; absent entries are 0."""
    out = np.zeros(idx.shape[0], dtype=y.values.dtype)
    found = np.zeros(idx.shape[0], dtype=np.bool_)
    if idx.shape[0]:
        K.lookup_rows(ptr, idx, y.row_ptr, y.col_idx, y.values, out, found)
        out[~found] = 0
    return out


def _empty_like(nrows: int, ncols: int) -> CsrMatrix:
    return CsrMatrix(nrows, ncols, np.zeros(nrows + 1, dtype=np.int64),
                     np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))


def betweenness_centrality(g: CsrMatrix, cfg: BcConfig,
                           plan: MultiplyPlan) -> KernelResult:
    """Batched multi-source Brandes over masked multiplies.

    Forward: frontier expansion with a complemented mask (the cumulative
    path-count pattern) avoids revisiting vertices.  Backward: dependency
    accumulation with the previous frontier as a plain mask.  Scores follow
    the directed, unnormalized convention summed over the source set.
    """
    if plan.algorithm in ("mca", "inner"):
        raise PlanError(f"{plan.algorithm} does not support the complemented "
                        "masked multiplies betweenness centrality needs")
    if g.nrows != g.ncols:
        raise SparseError("betweenness centrality requires a square adjacency matrix")
    n = g.nrows
    sources = np.arange(n, dtype=np.int64) if cfg.sources is None \
        else np.asarray(list(cfg.sources), dtype=np.int64)
    if sources.size and (sources.min() < 0 or sources.max() >= n):
        raise SparseError("source vertex out of range")

    sem = arithmetic_semiring(np.float64)
    fwd_plan = replace(plan, semiring=sem, complemented=True)
    bwd_plan = replace(plan, semiring=sem, complemented=False)
    adj = g.astype(np.float64)
    adj_t = transpose(adj)  # hoisted once; both stages reuse it

    rec = _Recorder()
    scores = np.zeros(n, dtype=np.float64)
    for lo in range(0, sources.size, cfg.batch_size):
        batch = sources[lo: lo + cfg.batch_size]
        b = batch.size
        sigma = from_arrays(n, b, batch, np.arange(b, dtype=np.int64),
                            np.ones(b, dtype=np.float64))
        paths = sigma
        frontiers = [sigma]
        while True:
            nxt = rec.multiply(paths.pattern(complemented=True), adj_t,
                               frontiers[-1], fwd_plan)
            if nxt.nnz == 0:
                break
            paths = ewise_add(paths, nxt)
            frontiers.append(nxt)

        delta = _empty_like(n, b)
        for t in range(len(frontiers) - 1, 0, -1):
            sig_t = frontiers[t]
            sig_prev = frontiers[t - 1]
            d_at = _values_at(sig_t.row_ptr, sig_t.col_idx, delta)
            p_at = _values_at(sig_t.row_ptr, sig_t.col_idx, paths)
            w = CsrMatrix(n, b, sig_t.row_ptr, sig_t.col_idx, (1.0 + d_at) / p_at)
            wq = rec.multiply(sig_prev.pattern(), adj, w, bwd_plan)
            contrib = wq.values[: wq.nnz] * _values_at(wq.row_ptr, wq.col_idx, paths)
            delta = ewise_add(delta, CsrMatrix(n, b, wq.row_ptr, wq.col_idx, contrib))

        rows, _, vals = delta.triples()
        np.add.at(scores, rows, vals)
        # a source accumulates dependency in its own column but is excluded
        # from its own centrality
        src_pattern_ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(src_pattern_ptr, batch + 1, 1)
        np.cumsum(src_pattern_ptr, out=src_pattern_ptr)
        order = np.argsort(batch, kind="stable").astype(np.int64)
        own_vals = _values_at(src_pattern_ptr, order, delta)
        np.subtract.at(scores, batch[order], own_vals)
    return rec.finish(scores)

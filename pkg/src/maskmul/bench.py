"""Benchmark harness: experiment sweeps, metrics, performance profiles, CSV.

Timing follows the benchmark convention: only masked-multiply execution time
is measured (graph preparation, generation and format conversions are
excluded), every cell gets one untimed warmup plus ``trials`` timed runs, and
summaries use the per-cell minimum.  Sweeps are resumable: rows already
present in the CSV are skipped.

CSV schema (fixed header):
benchmark,algorithm,phases,complemented,input,scale,degree,mask_degree,threads,trial,seconds,flops,metric
"""

from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .generate import GeneratorSpec, generate
from .graphs import BcConfig, KernelResult, betweenness_centrality, k_truss, triangle_count
from .mmio import read_matrix_market
from .multiply import MultiplyPlan, masked_multiply_with_stats
from .semiring import arithmetic_semiring
from .sparse import CsrMatrix, simple_undirected_graph

log = logging.getLogger(__name__)

CSV_HEADER = ("benchmark", "algorithm", "phases", "complemented", "input", "scale",
              "degree", "mask_degree", "threads", "trial", "seconds", "flops", "metric")

BENCHMARKS = ("tricount", "ktruss", "bc", "multiply")

# schemes the betweenness benchmark does not run: the compressed accumulator
# and the pull algorithm cannot do complemented masks; heap variants are
# excluded as prohibitively slow for this benchmark
BC_UNSUPPORTED = {"mca": "does not support complemented masked multiplies",
                  "inner": "does not support complemented masked multiplies"}
BC_EXCLUDED = {"heap": "prohibitively slow for betweenness centrality",
               "heapdot": "prohibitively slow for betweenness centrality"}


@dataclass
class ExperimentRecord:
    benchmark: str
    algorithm: str
    phases: str
    complemented: bool
    input: str
    scale: int
    degree: float
    mask_degree: float
    threads: int
    trial: int
    seconds: float
    flops: int
    metric: float

    def key(self) -> tuple:
        return (self.benchmark, self.algorithm, self.phases, self.complemented,
                self.input, self.threads, self.trial)

    def row(self) -> list:
        return [self.benchmark, self.algorithm, self.phases,
                int(self.complemented), self.input, self.scale,
                repr(float(self.degree)), repr(float(self.mask_degree)),
                self.threads, self.trial,
                repr(float(self.seconds)), self.flops, repr(float(self.metric))]


def gflops(flops: int, seconds: float) -> float:
    return flops / seconds / 1e9 if seconds > 0 else math.inf


def mteps(batch_size: int, num_edges: int, seconds: float) -> float:
    """TEPS = batch_size * num_edges / total_time, reported in millions."""
    return batch_size * num_edges / seconds / 1e6 if seconds > 0 else math.inf


def traffic_estimate(kind: str, nnz_a: int, nnz_b: int, nnz_m: int, n: int,
                     cache_line_words: int = 0, flops: int = 0):
    """Memory-traffic word counts of the two algorithm families.

    pull: nnz(A) + nnz(M) * (1 + nnz(B)/n), since every mask entry walks a row of
    A (amortized to one word each) and fetches an average column of B.
    push: nnz(A) + nnz(A)*L + flops, the three mask-independent access
    patterns (A nonzeros, B row pointers at cache-line granularity, and the
    stanza reads of B nonzeros); the accumulator- and output-dependent
    patterns are not part of this estimate.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if min(nnz_a, nnz_b, nnz_m, flops, cache_line_words) < 0:
        raise ValueError("counts must be non-negative")
    if kind == "pull":
        q, r = divmod(nnz_m * nnz_b, n)
        cross = q if r == 0 else nnz_m * nnz_b / n
        return nnz_a + nnz_m + cross
    if kind == "push":
        return nnz_a + nnz_a * cache_line_words + flops
    raise ValueError(f"kind must be 'pull' or 'push', got {kind!r}")


def append_records(path, records: Sequence[ExperimentRecord]) -> None:
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="", encoding="ascii") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(CSV_HEADER)
        for r in records:
            w.writerow(r.row())


def read_records(path) -> list[ExperimentRecord]:
    out: list[ExperimentRecord] = []
    with open(path, newline="", encoding="ascii") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if header is not None and tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header!r}")
        for row in rd:
            out.append(ExperimentRecord(
                benchmark=row[0], algorithm=row[1], phases=row[2],
                complemented=bool(int(row[3])), input=row[4], scale=int(row[5]),
                degree=float(row[6]), mask_degree=float(row[7]),
                threads=int(row[8]), trial=int(row[9]), seconds=float(row[10]),
                flops=int(row[11]), metric=float(row[12])))
    return out


def _existing_keys(csv_path) -> dict:
    if csv_path and os.path.exists(csv_path) and os.path.getsize(csv_path):
        return {r.key(): r for r in read_records(csv_path)}
    return {}


def load_graph(source) -> tuple[CsrMatrix, str, int, float]:
    """Load or generate an adjacency matrix normalized to a simple
    undirected graph.  Returns (graph, descriptor, scale, degree)."""
    if isinstance(source, GeneratorSpec):
        g = simple_undirected_graph(generate(source))
        return g, source.describe(), source.scale, source.avg_degree
    g = simple_undirected_graph(read_matrix_market(source))
    return g, str(source), 0, 0.0


def _run_kernel(benchmark: str, g: CsrMatrix, plan: MultiplyPlan,
                k: int, bc_config: BcConfig) -> KernelResult:
    if benchmark == "tricount":
        return triangle_count(g, plan)
    if benchmark == "ktruss":
        return k_truss(g, k, plan)
    if benchmark == "bc":
        return betweenness_centrality(g, bc_config, plan)
    raise ValueError(f"unknown benchmark {benchmark!r}")


def run_experiment(benchmark: str, plans: Sequence[MultiplyPlan],
                   inputs: Sequence, trials: int = 5,
                   csv_path=None, k: int = 5,
                   bc_config: BcConfig | None = None,
                   skipped: list | None = None) -> list[ExperimentRecord]:
    """Run every (plan, input) cell ``trials`` times and record each trial.

    Unsupported or excluded plan/benchmark combinations are skipped with a
    logged reason (collected into ``skipped`` when given).  Cells whose
    trials already exist in the CSV are not rerun.
    """
    if benchmark not in ("tricount", "ktruss", "bc"):
        raise ValueError(f"unknown benchmark {benchmark!r}")
    bc_config = bc_config or BcConfig()
    done = _existing_keys(csv_path)
    records: list[ExperimentRecord] = []
    for source in inputs:
        g, descriptor, scale, degree = load_graph(source)
        for plan in plans:
            reason = None
            if benchmark == "bc":
                reason = BC_UNSUPPORTED.get(plan.algorithm) or \
                    BC_EXCLUDED.get(plan.algorithm)
            if reason is not None:
                log.info("skipping %s on %s for %s: %s",
                         plan.label(), descriptor, benchmark, reason)
                if skipped is not None:
                    skipped.append((benchmark, plan.label(), descriptor, reason))
                continue
            keys = [(benchmark, plan.algorithm, plan.phases, plan.complemented,
                     descriptor, plan.workers, t) for t in range(trials)]
            if all(kk in done for kk in keys):
                log.info("resume: %s on %s already measured", plan.label(), descriptor)
                continue
            _run_kernel(benchmark, g, plan, k, bc_config)  # warmup, untimed
            cell: list[ExperimentRecord] = []
            for t in range(trials):
                if keys[t] in done:
                    continue
                res = _run_kernel(benchmark, g, plan, k, bc_config)
                if benchmark == "bc":
                    metric = mteps(bc_config.batch_size, g.nnz, res.multiply_seconds)
                else:
                    metric = gflops(res.flops, res.multiply_seconds)
                cell.append(ExperimentRecord(
                    benchmark=benchmark, algorithm=plan.algorithm,
                    phases=plan.phases, complemented=plan.complemented,
                    input=descriptor, scale=scale, degree=degree, mask_degree=0.0,
                    threads=plan.workers, trial=t,
                    seconds=res.multiply_seconds, flops=res.flops, metric=metric))
            if csv_path:
                append_records(csv_path, cell)
            records.extend(cell)
    return records


def density_sweep(scales: Sequence[int], input_degrees: Sequence[float],
                  mask_degrees: Sequence[float], plans: Sequence[MultiplyPlan],
                  trials: int = 3, seed: int = 0, csv_path=None):
    """Winner grid over (dimension, input degree, mask degree) cells.

    For every cell, Erdős–Rényi A, B and mask M are generated, plan outputs
    are cross-validated for equality, then every plan is timed.  Returns
    (winners, records) where winners maps (scale, d_in, d_mask) to the label
    of the fastest plan (ties broken by plan order).
    """
    done = _existing_keys(csv_path)
    winners: dict[tuple, str] = {}
    records: list[ExperimentRecord] = []
    sem = arithmetic_semiring(np.int64)
    for scale in scales:
        for d_in in input_degrees:
            for d_mask in mask_degrees:
                a = generate(GeneratorSpec("erdos-renyi", scale, d_in, seed=seed))
                b = generate(GeneratorSpec("erdos-renyi", scale, d_in, seed=seed + 1))
                m = generate(GeneratorSpec("erdos-renyi", scale, d_mask, seed=seed + 2))
                mask = m.pattern()
                descriptor = f"er(scale={scale},deg={d_in:g},mask={d_mask:g},seed={seed})"
                reference = None
                best: tuple[float, str] | None = None
                for plan in plans:
                    plan = replace(plan, semiring=sem, complemented=False)
                    c, _ = masked_multiply_with_stats(mask, a, b, plan)  # warmup
                    if reference is None:
                        reference = c
                    elif not reference.equals(c):
                        raise AssertionError(
                            f"plan outputs disagree at {descriptor}: {plan.label()}")
                    times = []
                    cell: list[ExperimentRecord] = []
                    for t in range(trials):
                        key = ("multiply", plan.algorithm, plan.phases, False,
                               descriptor, plan.workers, t)
                        if key in done:
                            times.append(done[key].seconds)
                            continue
                        _, st = masked_multiply_with_stats(mask, a, b, plan)
                        times.append(st.total_seconds)
                        cell.append(ExperimentRecord(
                            benchmark="multiply", algorithm=plan.algorithm,
                            phases=plan.phases, complemented=False,
                            input=descriptor, scale=scale, degree=d_in,
                            mask_degree=d_mask, threads=plan.workers, trial=t,
                            seconds=st.total_seconds, flops=st.generated_flops,
                            metric=gflops(st.generated_flops, st.total_seconds)))
                    if csv_path:
                        append_records(csv_path, cell)
                    records.extend(cell)
                    t_best = min(times)
                    if best is None or t_best < best[0]:
                        best = (t_best, plan.label())
                winners[(scale, d_in, d_mask)] = best[1]
    return winners, records


@dataclass
class PerformanceProfile:
    """Per-algorithm empirical CDF of per-input slowdown ratios.

    A point (x, y) means: within factor x of the per-input best result in
    fraction y of the cases.  Cases an algorithm did not run count as
    ratio infinity, so its curve tops out below 1.
    """

    curves: dict[str, list[tuple[float, float]]]
    num_cases: int

    def fraction_within(self, label: str, x: float) -> float:
        y = 0.0
        for px, py in self.curves.get(label, []):
            if px <= x:
                y = py
            else:
                break
        return y


def performance_profile(records: Sequence[ExperimentRecord]) -> PerformanceProfile:
    """Build the profile from trial records (minimum seconds per cell)."""
    cases: dict[tuple, dict[str, float]] = {}
    for r in records:
        label = f"{r.algorithm}-{r.phases}".upper()
        cell = cases.setdefault((r.benchmark, r.input), {})
        cell[label] = min(cell.get(label, math.inf), r.seconds)
    labels = sorted({lbl for cell in cases.values() for lbl in cell})
    num_cases = len(cases)
    ratios: dict[str, list[float]] = {lbl: [] for lbl in labels}
    for cell in cases.values():
        best = min(cell.values())
        for lbl in labels:
            t = cell.get(lbl, math.inf)
            ratios[lbl].append(t / best if best > 0 else 1.0)
    curves: dict[str, list[tuple[float, float]]] = {}
    for lbl, rs in ratios.items():
        finite = sorted(r for r in rs if math.isfinite(r))
        pts: list[tuple[float, float]] = []
        for i, x in enumerate(finite, start=1):
            y = i / num_cases
            if pts and pts[-1][0] == x:
                pts[-1] = (x, y)
            else:
                pts.append((x, y))
        curves[lbl] = pts
    return PerformanceProfile(curves, num_cases)


def profile_table(profile: PerformanceProfile,
                  xs: Sequence[float] = (1.0, 1.5, 2.0, 4.0, 8.0)) -> str:
    width = max([10] + [len(lbl) for lbl in profile.curves])
    lines = ["scheme".ljust(width) + "".join(f"  {f'y(x<={x:g})':>9s}" for x in xs)]
    for lbl in sorted(profile.curves):
        row = lbl.ljust(width)
        for x in xs:
            row += f"  {profile.fraction_within(lbl, x):9.3f}"
        lines.append(row)
    return "\n".join(lines)

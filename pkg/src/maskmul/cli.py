"""Command-line harness.

Subcommands: gen, multiply, tricount, ktruss, bc, sweep-density, sweep-scale,
sweep-threads, profile.  Exit codes: 0 success, 1 usage error, 2 input error,
3 internal assertion.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .bench import (BC_UNSUPPORTED, ExperimentRecord, append_records,
                    density_sweep, gflops, load_graph, mteps, performance_profile,
                    profile_table, read_records, run_experiment)
from .generate import GeneratorSpec, generate
from .graphs import BcConfig
from .mmio import MatrixMarketError, read_matrix_market, write_matrix_market
from .multiply import ALGORITHMS, MultiplyPlan, PlanError, masked_multiply_with_stats
from .semiring import semiring_by_name
from .sparse import SparseError, simple_undirected_graph

log = logging.getLogger("maskmul")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _threads(value: str) -> int:
    if value == "max":
        return os.cpu_count() or 1
    n = int(value)
    if n < 0:
        raise ValueError("threads must be >= 0 ('0' and 'max' mean all cores)")
    return n if n > 0 else (os.cpu_count() or 1)


def _int_list(value: str) -> list[int]:
    return [int(v) for v in value.split(",") if v]


def _float_list(value: str) -> list[float]:
    return [float(v) for v in value.split(",") if v]


def _algo_list(value: str) -> list[str]:
    algos = [v.strip() for v in value.split(",") if v.strip()]
    for a in algos:
        if a not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {a!r}")
    return algos


def _pin_threads(n: int) -> None:
    # best-effort affinity hint; exact pinning is platform policy
    try:
        os.sched_setaffinity(0, set(range(n)))
    except (AttributeError, OSError):
        log.warning("thread pinning unavailable on this platform")


def _add_plan_flags(p: _Parser, multi_algo: bool = False,
                    threads_flag: bool = True) -> None:
    if multi_algo:
        p.add_argument("--algos", type=_algo_list,
                       default=list(ALGORITHMS), metavar="A,B,...",
                       help="comma-separated algorithms (default: all)")
    else:
        p.add_argument("--algo", choices=ALGORITHMS, default="msa")
    p.add_argument("--phases", choices=("1p", "2p"), default="1p")
    if threads_flag:
        p.add_argument("--threads", type=_threads, default=1,
                       help="worker threads ('max' or 0 = all cores)")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--pin", action="store_true",
                   help="best-effort pinning of the process to the first N cores")
    p.add_argument("--csv", default=None, help="append experiment records here")


def _add_input_flags(p: _Parser) -> None:
    p.add_argument("graph", nargs="?", default=None,
                   help="Matrix Market adjacency file (omit to generate)")
    p.add_argument("--kind", choices=("erdos-renyi", "rmat"), default="rmat")
    p.add_argument("--scale", type=int, default=10)
    p.add_argument("--degree", type=float, default=8.0)
    p.add_argument("--seed", type=int, default=0)


def _graph_source(args):
    if args.graph is not None:
        return args.graph
    return GeneratorSpec(args.kind, args.scale, args.degree, seed=args.seed)


def _single_plan(args, complemented: bool = False) -> MultiplyPlan:
    return MultiplyPlan(algorithm=args.algo, phases=args.phases,
                        complemented=complemented,
                        workers=args.threads)


def cmd_gen(args) -> int:
    spec = GeneratorSpec(args.kind, args.scale, args.degree,
                         rmat_params=tuple(args.rmat_params), seed=args.seed)
    m = generate(spec)
    if args.simple:
        m = simple_undirected_graph(m)
    write_matrix_market(args.out, m, field="integer")
    print(f"wrote {spec.describe()} to {args.out}: "
          f"{m.nrows}x{m.ncols}, nnz={m.nnz}")
    return 0


def cmd_multiply(args) -> int:
    if args.pin:
        _pin_threads(args.threads)
    given = [x is not None for x in (args.a, args.b, args.mask)]
    if any(given) and not all(given):
        raise UsageError("--a, --b and --mask must be given together")
    sem = semiring_by_name(args.semiring)
    plan = MultiplyPlan(algorithm=args.algo, phases=args.phases,
                        complemented=args.complemented, semiring=sem,
                        workers=args.threads)
    if args.a and args.b and args.mask:
        a = read_matrix_market(args.a)
        b = read_matrix_market(args.b)
        m = read_matrix_market(args.mask)
        descriptor = f"{args.a}*{args.b} (.) {args.mask}"
    else:
        a = generate(GeneratorSpec(args.kind, args.scale, args.degree, seed=args.seed))
        b = generate(GeneratorSpec(args.kind, args.scale, args.degree, seed=args.seed + 1))
        m = generate(GeneratorSpec(args.kind, args.scale, args.mask_degree,
                                   seed=args.seed + 2))
        descriptor = (f"{args.kind}(scale={args.scale},deg={args.degree:g},"
                      f"mask={args.mask_degree:g},seed={args.seed})")
    a = a.astype(sem.dtype)
    b = b.astype(sem.dtype)
    mask = m.pattern()
    masked_multiply_with_stats(mask, a, b, plan)  # warmup, untimed
    best = None
    for t in range(max(args.trials, 1)):
        c, st = masked_multiply_with_stats(mask, a, b, plan)
        if best is None or st.total_seconds < best[1].total_seconds:
            best = (c, st)
    c, st = best
    rate = gflops(st.generated_flops, st.total_seconds)
    print(f"{plan.label()}{' (complemented)' if args.complemented else ''} "
          f"on {descriptor}")
    print(f"output nnz = {c.nnz}")
    print(f"flops = {st.generated_flops}  evaluated = {st.evaluated_multiplies}")
    print(f"seconds = {st.total_seconds:.6f}  (symbolic {st.symbolic_seconds:.6f}, "
          f"numeric {st.numeric_seconds:.6f}, assemble {st.assemble_seconds:.6f})")
    print(f"gflops = {rate:.4f}")
    if args.csv:
        append_records(args.csv, [ExperimentRecord(
            "multiply", plan.algorithm, plan.phases, plan.complemented,
            descriptor, args.scale if not args.a else 0,
            args.degree if not args.a else 0.0,
            args.mask_degree if not args.a else 0.0,
            plan.workers, 0, st.total_seconds, st.generated_flops, rate)])
    return 0


def _run_benchmark_command(args, benchmark: str, k: int = 5,
                           bc_config: BcConfig | None = None) -> int:
    if args.pin:
        _pin_threads(args.threads)
    plan = _single_plan(args)
    if benchmark == "bc" and plan.algorithm in BC_UNSUPPORTED:
        raise PlanError(f"betweenness centrality cannot run with "
                        f"--algo {plan.algorithm}: {BC_UNSUPPORTED[plan.algorithm]}")
    source = _graph_source(args)
    skipped: list = []
    records = run_experiment(benchmark, [plan], [source], trials=args.trials,
                             csv_path=args.csv, k=k, bc_config=bc_config,
                             skipped=skipped)
    for _, label, descriptor, reason in skipped:
        print(f"skipped {label} on {descriptor}: {reason}")
    if not records:
        return 0
    best = min(records, key=lambda r: r.seconds)
    g, descriptor, _, _ = load_graph(source)
    if benchmark == "tricount":
        from .graphs import triangle_count
        res = triangle_count(g, plan)
        print(res.value)
    elif benchmark == "ktruss":
        from .graphs import k_truss
        res = k_truss(g, k, plan)
        print(f"{k}-truss edges (directed count): {res.value.nnz}")
    else:
        from .graphs import betweenness_centrality
        res = betweenness_centrality(g, bc_config, plan)
        top = np.argsort(res.value)[::-1][:5]
        print("top vertices:", ", ".join(f"{v}={res.value[v]:.3f}" for v in top))
    unit = "mteps" if benchmark == "bc" else "gflops"
    print(f"{plan.label()} on {best.input}: seconds = {best.seconds:.6f}, "
          f"flops = {best.flops}, {unit} = {best.metric:.4f}")
    return 0


def cmd_tricount(args) -> int:
    return _run_benchmark_command(args, "tricount")


def cmd_ktruss(args) -> int:
    return _run_benchmark_command(args, "ktruss", k=args.k)


def cmd_bc(args) -> int:
    sources = None
    if args.sources is not None:
        rng = np.random.default_rng(args.seed)
        spec_n = 1 << args.scale
        n = spec_n if args.graph is None else read_matrix_market(args.graph).nrows
        sources = rng.choice(n, size=min(args.sources, n), replace=False).tolist()
    cfg = BcConfig(batch_size=args.batch, sources=sources)
    return _run_benchmark_command(args, "bc", bc_config=cfg)


def cmd_sweep_density(args) -> int:
    if args.pin:
        _pin_threads(args.threads)
    plans = [MultiplyPlan(algorithm=a, phases=args.phases, workers=args.threads)
             for a in args.algos]
    winners, _ = density_sweep(args.scales, args.degrees, args.mask_degrees,
                               plans, trials=args.trials, seed=args.seed,
                               csv_path=args.csv)
    print("scale  degree  mask_degree  winner")
    for (scale, d_in, d_mask), label in sorted(winners.items()):
        print(f"{scale:5d}  {d_in:6g}  {d_mask:11g}  {label}")
    return 0


def cmd_sweep_scale(args) -> int:
    if args.pin:
        _pin_threads(args.threads)
    plans = [MultiplyPlan(algorithm=a, phases=args.phases, workers=args.threads)
             for a in args.algos]
    inputs = [GeneratorSpec(args.kind, s, args.degree, seed=args.seed)
              for s in args.scales]
    skipped: list = []
    records = run_experiment(args.benchmark, plans, inputs, trials=args.trials,
                             csv_path=args.csv, k=args.k,
                             bc_config=BcConfig(batch_size=args.batch),
                             skipped=skipped)
    for _, label, descriptor, reason in skipped:
        print(f"skipped {label} on {descriptor}: {reason}")
    _print_records(records)
    return 0


def cmd_sweep_threads(args) -> int:
    records = []
    skipped: list = []
    for n in args.threads_list:
        plans = [MultiplyPlan(algorithm=a, phases=args.phases, workers=n)
                 for a in args.algos]
        source = _graph_source(args)
        records += run_experiment(args.benchmark, plans, [source],
                                  trials=args.trials, csv_path=args.csv,
                                  k=args.k, bc_config=BcConfig(batch_size=args.batch),
                                  skipped=skipped)
    for _, label, descriptor, reason in skipped:
        print(f"skipped {label} on {descriptor}: {reason}")
    _print_records(records)
    return 0


def _print_records(records) -> None:
    best: dict[tuple, ExperimentRecord] = {}
    for r in records:
        key = (r.input, r.algorithm, r.phases, r.threads)
        if key not in best or r.seconds < best[key].seconds:
            best[key] = r
    print("input                          scheme     threads  seconds      metric")
    for key in sorted(best):
        r = best[key]
        label = f"{r.algorithm}-{r.phases}".upper()
        print(f"{r.input:30s} {label:10s} {r.threads:7d}  {r.seconds:.6f}  {r.metric:10.4f}")


def cmd_profile(args) -> int:
    records = read_records(args.csv_file)
    if not records:
        raise SparseError(f"no records in {args.csv_file}")
    prof = performance_profile(records)
    print(f"{prof.num_cases} cases")
    print(profile_table(prof))
    return 0


def build_parser() -> _Parser:
    p = _Parser(prog="maskmul",
                description="Masked sparse matrix multiply benchmarks")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a matrix and write Matrix Market")
    g.add_argument("out")
    g.add_argument("--kind", choices=("erdos-renyi", "rmat"), default="rmat")
    g.add_argument("--scale", type=int, default=10)
    g.add_argument("--degree", type=float, default=8.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--rmat-params", type=_float_list,
                   default=[0.57, 0.19, 0.19, 0.05], metavar="a,b,c,d")
    g.add_argument("--simple", action="store_true",
                   help="normalize to a simple undirected graph")
    g.set_defaults(func=cmd_gen)

    m = sub.add_parser("multiply", help="run one masked multiply")
    m.add_argument("--a", default=None, help="Matrix Market file for A")
    m.add_argument("--b", default=None, help="Matrix Market file for B")
    m.add_argument("--mask", default=None, help="Matrix Market file for the mask")
    m.add_argument("--kind", choices=("erdos-renyi", "rmat"), default="erdos-renyi")
    m.add_argument("--scale", type=int, default=12)
    m.add_argument("--degree", type=float, default=8.0)
    m.add_argument("--mask-degree", type=float, default=8.0)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--complemented", action="store_true")
    m.add_argument("--semiring", choices=("arithmetic", "plus_pair"),
                   default="arithmetic")
    _add_plan_flags(m)
    m.set_defaults(func=cmd_multiply)

    for name, fn in (("tricount", cmd_tricount), ("ktruss", cmd_ktruss),
                     ("bc", cmd_bc)):
        b = sub.add_parser(name, help=f"run the {name} benchmark")
        _add_input_flags(b)
        _add_plan_flags(b)
        if name == "ktruss":
            b.add_argument("--k", type=int, default=5)
        if name == "bc":
            b.add_argument("--batch", type=int, default=512)
            b.add_argument("--sources", type=int, default=None,
                           help="number of random sources (default: all vertices)")
        b.set_defaults(func=fn)

    sd = sub.add_parser("sweep-density", help="best-plan grid over densities")
    sd.add_argument("--scales", type=_int_list, default=[10], metavar="S,S,...")
    sd.add_argument("--degrees", type=_float_list, default=[2, 8, 32],
                    metavar="D,D,...")
    sd.add_argument("--mask-degrees", type=_float_list, default=[2, 8, 32],
                    metavar="D,D,...")
    sd.add_argument("--seed", type=int, default=0)
    _add_plan_flags(sd, multi_algo=True)
    sd.set_defaults(func=cmd_sweep_density)

    ss = sub.add_parser("sweep-scale", help="benchmark across R-MAT scales")
    ss.add_argument("--benchmark", choices=("tricount", "ktruss", "bc"),
                    default="tricount")
    ss.add_argument("--kind", choices=("erdos-renyi", "rmat"), default="rmat")
    ss.add_argument("--scales", type=_int_list, default=[8, 10, 12], metavar="S,S,...")
    ss.add_argument("--degree", type=float, default=8.0)
    ss.add_argument("--seed", type=int, default=0)
    ss.add_argument("--k", type=int, default=5)
    ss.add_argument("--batch", type=int, default=512)
    _add_plan_flags(ss, multi_algo=True)
    ss.set_defaults(func=cmd_sweep_scale)

    st = sub.add_parser("sweep-threads", help="benchmark across worker counts")
    st.add_argument("--benchmark", choices=("tricount", "ktruss", "bc"),
                    default="tricount")
    st.add_argument("--threads-list", type=_int_list, default=[1, 2, 4],
                    metavar="N,N,...")
    st.add_argument("--k", type=int, default=5)
    st.add_argument("--batch", type=int, default=512)
    _add_input_flags(st)
    _add_plan_flags(st, multi_algo=True, threads_flag=False)
    st.set_defaults(func=cmd_sweep_threads)

    pr = sub.add_parser("profile", help="performance-profile table from a CSV")
    pr.add_argument("csv_file")
    pr.set_defaults(func=cmd_profile)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
            format="%(levelname)s %(message)s")
        return args.func(args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except PlanError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except (MatrixMarketError, SparseError, FileNotFoundError, IsADirectoryError,
            PermissionError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"input error: {e}", file=sys.stderr)
        return 2
    except AssertionError as e:
        print(f"internal assertion failed: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

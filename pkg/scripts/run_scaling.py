#!/usr/bin/env python3
"""Strong-scaling and input-scaling runs for one benchmark.

Produces the two CSVs the scaling plots are drawn from: benchmark rate as a
function of R-MAT scale at full parallelism, and as a function of worker
count at a fixed scale.
"""

import argparse
import os
import sys

from maskmul.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--benchmark", default="tricount",
                    choices=("tricount", "ktruss", "bc"))
    ap.add_argument("--scales", default="8,10,12,14")
    ap.add_argument("--fixed-scale", default="14")
    ap.add_argument("--degree", default="8")
    ap.add_argument("--algos", default="msa,hash,mca,heap,heapdot,inner")
    ap.add_argument("--trials", default="3")
    ap.add_argument("--csv-prefix", default="scaling")
    args = ap.parse_args()

    rc = cli_main([
        "sweep-scale", "--benchmark", args.benchmark,
        "--scales", args.scales, "--degree", args.degree,
        "--algos", args.algos, "--threads", "max", "--trials", args.trials,
        "--csv", f"{args.csv_prefix}_by_scale.csv",
    ])
    if rc:
        return rc
    nthreads = os.cpu_count() or 1
    ladder = sorted({1, 2, 4, nthreads} - {0})
    return cli_main([
        "sweep-threads", "--benchmark", args.benchmark,
        "--threads-list", ",".join(str(t) for t in ladder if t <= nthreads),
        "--scale", args.fixed_scale, "--degree", args.degree,
        "--algos", args.algos, "--trials", args.trials,
        "--csv", f"{args.csv_prefix}_by_threads.csv",
    ])


if __name__ == "__main__":
    sys.exit(main())

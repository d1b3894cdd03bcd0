#!/usr/bin/env python3
"""Best-plan heat map over input and mask densities.

Defaults sweep geometric degrees 2..256 at a few even scales; the winner per
cell depends on the host, so the grid is recorded, not asserted.
"""

import argparse
import sys

from maskmul.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scales", default="12,14")
    ap.add_argument("--degrees", default="2,8,32,128")
    ap.add_argument("--mask-degrees", default="2,8,32,128")
    ap.add_argument("--threads", default="max")
    ap.add_argument("--trials", default="3")
    ap.add_argument("--csv", default="density_sweep.csv")
    args = ap.parse_args()
    return cli_main([
        "sweep-density",
        "--scales", args.scales,
        "--degrees", args.degrees,
        "--mask-degrees", args.mask_degrees,
        "--threads", args.threads,
        "--trials", args.trials,
        "--csv", args.csv,
    ])


if __name__ == "__main__":
    sys.exit(main())

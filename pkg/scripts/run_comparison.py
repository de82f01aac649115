#!/usr/bin/env python3
"""Desk-scale optimizer comparison on the built-in proxy landscape.

Runs bo, cobyla, and pso over 20 seeds with a shared evaluation budget and
prints the median evaluations-to-optimum table; per-cell traces land in the
output directory as CSVs ready for plotting.
"""

import argparse
import sys

from hypertune.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--budget", type=int, default=50)
    parser.add_argument("--seeds", default="1..20")
    parser.add_argument("--out", default="runs")
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()
    return cli_main(
        [
            "compare",
            "--optimizers",
            "bo,cobyla,pso",
            "--seeds",
            args.seeds,
            "--budget",
            str(args.budget),
            "--jobs",
            str(args.jobs),
            "--out",
            args.out,
        ]
    )


if __name__ == "__main__":
    sys.exit(main())

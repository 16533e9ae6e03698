#!/usr/bin/env python3
"""Run the single-task perception experiments (condition subsets, training
sample counts, sensor ablations) and drop the plot-ready CSVs under the
output directory."""

import argparse
import sys

from armrc.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=None)
    parser.add_argument("--out", default="results")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()

    common = []
    if args.config:
        common += ["--config", args.config]
    if args.seed is not None:
        common += ["--seed", str(args.seed)]
    for kind in ("conditions", "samples", "sensors"):
        rc = cli_main(["sweep", kind, "--out", f"{args.out}/{kind}"] + common)
        if rc != 0:
            return rc
        print(f"sweep {kind}: done -> {args.out}/{kind}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

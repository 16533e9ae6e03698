#!/usr/bin/env python3
"""Simulate the full 7x7 condition grid and export every run as CSV with
metadata sidecars (the dataset other tools or real recordings replace)."""

import argparse
import sys

from armrc.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=None)
    parser.add_argument("--out", default="results/grid")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()

    argv = ["simulate", "--out", args.out]
    if args.config:
        argv += ["--config", args.config]
    if args.seed is not None:
        argv += ["--seed", str(args.seed)]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())

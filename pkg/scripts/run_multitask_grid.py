#!/usr/bin/env python3
"""Run the 35-condition multi-task grid (7 profiles x 5 payloads) with the
three shipped training geometries and print a summary table."""

import argparse
import sys
from pathlib import Path

from armrc.cli import main as cli_main
from armrc.runio import read_matrix_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=None)
    parser.add_argument("--out", default="results/multitask")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()

    argv = ["sweep", "multitask", "--out", args.out, "--quiet"]
    if args.config:
        argv += ["--config", args.config]
    if args.seed is not None:
        argv += ["--seed", str(args.seed)]
    rc = cli_main(argv)
    if rc != 0:
        return rc

    matrix, rows, cols, _ = read_matrix_csv(Path(args.out) / "multitask_summary.csv")
    print(f"{'training':>10} {'detection':>10} {'step-2 mean %':>14}")
    for label, row in zip(rows, matrix):
        verdict = "perfect" if row[0] == 1 else "errors"
        print(f"{label:>10} {verdict:>10} {row[1]:>14.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Check trajectory.csv files written by `sgk.py run-scenario`.

Usage:
  python tools/check_trajectory_csv.py path/to/trajectory.csv
  python tools/check_trajectory_csv.py path/to/results_dir [-r|--recursive] [--epsilon-max 0.1]

Reports, per file: a missing or unknown header, rows with the wrong
format_version, non-finite numbers, ε above the threshold and time running
backwards within one band's block of rows.
This script only *reports* problems; it does not modify files.
"""

from __future__ import annotations
import argparse
import csv
import glob
import math
import os
import sys
from typing import List, Optional

FORMAT_VERSION = "1"
EPSILON_MAX_DEFAULT = 0.1
TAIL_COLUMNS = ["band", "energy", "epsilon", "berry_phase", "dynamic_phase"]


def expected_header(d: int) -> List[str]:
    axes = [f"p{i + 1}" for i in range(d)] + [f"r{i + 1}" for i in range(d)]
    return ["format_version", "t", *axes, *TAIL_COLUMNS]


def check_file(path: str, epsilon_max: float) -> List[str]:
    """Return a list of human-readable problems (empty when the file is clean)."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        return ["empty file"]
    header = rows[0]
    if header not in (expected_header(2), expected_header(3)):
        return [f"unexpected header: {','.join(header)}"]

    problems: List[str] = []
    col = {name: k for k, name in enumerate(header)}
    last_band = None
    last_t = -math.inf
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            problems.append(f"line {lineno}: {len(row)} fields, expected {len(header)}")
            continue
        if row[0] != FORMAT_VERSION:
            problems.append(f"line {lineno}: format_version {row[0]!r}, expected {FORMAT_VERSION}")
        try:
            values = [float(x) for x in row[1:]]
        except ValueError as exc:
            problems.append(f"line {lineno}: {exc}")
            continue
        if not all(math.isfinite(v) for v in values):
            problems.append(f"line {lineno}: non-finite value")
            continue
        band = row[col["band"]]
        t = float(row[col["t"]])
        eps = float(row[col["epsilon"]])
        if eps > epsilon_max:
            problems.append(f"line {lineno}: epsilon {eps:.6g} above {epsilon_max:g}")
        if band == last_band and t < last_t:
            problems.append(f"line {lineno}: t = {t:.17g} goes backwards (previous {last_t:.17g})")
        if band != last_band:
            last_band = band
        last_t = t
    return problems


def scan_path(path: str, recursive: bool = False) -> List[str]:
    if os.path.isfile(path):
        return [path]
    if os.path.isdir(path):
        if recursive:
            return sorted(glob.glob(os.path.join(path, "**", "trajectory.csv"), recursive=True))
        return sorted(glob.glob(os.path.join(path, "trajectory.csv")))
    raise FileNotFoundError(path)


def main(argv: Optional[List[str]] = None) -> int:
    p = argparse.ArgumentParser(description="Report problems in sgk trajectory.csv files.")
    p.add_argument("path", help="Path to a trajectory.csv file or a directory containing one")
    p.add_argument("-r", "--recursive", action="store_true", help="Recurse into subdirectories when path is a directory")
    p.add_argument("--epsilon-max", type=float, default=EPSILON_MAX_DEFAULT, help="Largest acceptable adiabaticity parameter")
    args = p.parse_args(argv)

    try:
        files = scan_path(args.path, recursive=args.recursive)
    except FileNotFoundError:
        print(f"Path not found: {args.path}", file=sys.stderr)
        return 2

    if not files:
        print("No trajectory.csv files found.")
        return 0

    total = 0
    for f in files:
        problems = check_file(f, args.epsilon_max)
        for msg in problems:
            print(f"{f}: {msg}")
        total += len(problems)

    if total:
        print(f"\nFound {total} problem(s) across {len(files)} scanned file(s).")
        return 1
    print(f"No problems found in {len(files)} file(s).")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

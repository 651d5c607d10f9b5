#!/usr/bin/env python3
"""Compare two sgk output directories byte for byte.

Usage:
  python tools/compare_outputs.py run_threads1/ run_threads8/

Identical configs and seeds must give identical artefacts whatever the
thread count; this reports files present on one side only and files whose
bytes differ (with the first differing line).
"""

from __future__ import annotations
import argparse
import filecmp
import os
import sys
from typing import List, Optional

ARTEFACTS = (".csv", ".jsonl")


def list_artefacts(root: str) -> List[str]:
    found = []
    for dirpath, _, names in os.walk(root):
        for name in names:
            if name.endswith(ARTEFACTS):
                found.append(os.path.relpath(os.path.join(dirpath, name), root))
    return sorted(found)


def first_difference(a: str, b: str) -> str:
    with open(a, "r", encoding="utf-8") as fa, open(b, "r", encoding="utf-8") as fb:
        for lineno, (la, lb) in enumerate(zip(fa, fb), start=1):
            if la != lb:
                return f"line {lineno}: {la.rstrip()!r} != {lb.rstrip()!r}"
    return "files differ in length"


def compare(left: str, right: str) -> List[str]:
    a, b = set(list_artefacts(left)), set(list_artefacts(right))
    problems = [f"only in {left}: {name}" for name in sorted(a - b)]
    problems += [f"only in {right}: {name}" for name in sorted(b - a)]
    for name in sorted(a & b):
        pa, pb = os.path.join(left, name), os.path.join(right, name)
        if not filecmp.cmp(pa, pb, shallow=False):
            problems.append(f"{name}: {first_difference(pa, pb)}")
    return problems


def main(argv: Optional[List[str]] = None) -> int:
    p = argparse.ArgumentParser(description="Check that two sgk output directories are byte-identical.")
    p.add_argument("left", help="First output directory")
    p.add_argument("right", help="Second output directory")
    args = p.parse_args(argv)

    for path in (args.left, args.right):
        if not os.path.isdir(path):
            print(f"Path not found: {path}", file=sys.stderr)
            return 2

    problems = compare(args.left, args.right)
    for msg in problems:
        print(msg)
    if problems:
        print(f"\nFound {len(problems)} difference(s).")
        return 1
    print(f"Outputs identical ({len(list_artefacts(args.left))} file(s)).")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

#!/usr/bin/env python3
"""Time the compiled kernel against the numpy fallback on the same points.

    python benchmarks/compare_backends.py --limits 1e7,1e8 --segments 60000,6000000 \
        --flag-widths bit,byte --repeats 3 --csv backends.csv

Writes one row per (backend, point) plus the fallback/compiled time ratio.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import sys

from wheelsieve import kernel
from wheelsieve.bench import run_point
from wheelsieve.cli import parse_int_list, parse_width_list

HEADER = ["backend", "threads", "limit", "segment_span", "flag_width", "wall_ms", "prime_count",
          "ratio_vs_compiled"]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--limits", type=parse_int_list, default=[10**7, 10**8])
    ap.add_argument("--threads", type=parse_int_list, default=[1])
    ap.add_argument("--segments", type=parse_int_list, default=[60_000, 6_000_000])
    ap.add_argument("--flag-widths", type=parse_width_list, default=["bit", "byte"])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--csv", help="output path (default: stdout)")
    args = ap.parse_args(argv)

    if "compiled" not in kernel.BACKENDS:
        print("compiled kernel not built; nothing to compare", file=sys.stderr)
        return 1

    rows = []
    for limit, t, s, w in itertools.product(args.limits, args.threads, args.segments,
                                            args.flag_widths):
        pts = {name: run_point(limit, t, s, w, args.repeats, backend=name)
               for name in ("compiled", "python")}
        if pts["compiled"].prime_count != pts["python"].prime_count:
            print(f"backends disagree at limit={limit}", file=sys.stderr)
            return 1
        base = pts["compiled"].wall_ms
        for name, pt in pts.items():
            rows.append([name, t, limit, s, w, pt.wall_ms, pt.prime_count,
                         round(pt.wall_ms / base, 2) if base else ""])
        print(f"limit={limit} t={t} S={s} {w}: compiled {base:.1f} ms, "
              f"python {pts['python'].wall_ms:.1f} ms", file=sys.stderr)

    out = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(HEADER)
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())

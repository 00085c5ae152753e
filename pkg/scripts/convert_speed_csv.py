#!/usr/bin/env python3
"""Convert a tabular speed file (sensor, interval, day, value rows) to COO text.

Intended for sources such as the Uber Movement New York speeds, which ship
as per-reading CSVs. Columns are selected by header name; indices may be
0- or 1-based in the source. Rows with value 0 are dropped by default,
matching the convention that traffic datasets encode missing readings as
zero (use --keep-zeros to disable). Duplicate (sensor, interval, day)
cells are averaged, since per-segment sources often carry several readings
per slot.

    python scripts/convert_speed_csv.py speeds.csv d2.coo \
        --sensor-col sensor_id --interval-col interval --day-col day \
        --value-col speed_mph --dims 135 288 73
"""

import argparse
import csv
import sys
from collections import defaultdict


def convert(args):
    sums = defaultdict(float)
    counts = defaultdict(int)
    base = 1 if args.one_based else 0
    with open(args.csv, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            v = float(row[args.value_col])
            if v == 0.0 and not args.keep_zeros:
                continue
            key = (
                int(row[args.sensor_col]) - base,
                int(row[args.interval_col]) - base,
                int(row[args.day_col]) - base,
            )
            sums[key] += v
            counts[key] += 1
    if args.dims:
        I, J, K = args.dims
    else:
        I = max(k[0] for k in sums) + 1
        J = max(k[1] for k in sums) + 1
        K = max(k[2] for k in sums) + 1
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"# converted from {args.csv}, zeros dropped as missing\n")
        fh.write(f"dims {I} {J} {K}\n")
        for (i, j, k) in sorted(sums):
            v = sums[(i, j, k)] / counts[(i, j, k)]
            fh.write(f"{i} {j} {k} {v!r}\n")
    print(f"wrote {len(sums)} entries to {args.out} with dims {I} {J} {K}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("csv", help="input CSV with one reading per row")
    p.add_argument("out", help="output COO text path")
    p.add_argument("--sensor-col", required=True)
    p.add_argument("--interval-col", required=True)
    p.add_argument("--day-col", required=True)
    p.add_argument("--value-col", required=True)
    p.add_argument("--dims", type=int, nargs=3, default=None,
                   help="I J K; inferred from the data when omitted")
    p.add_argument("--one-based", action="store_true",
                   help="source indices start at 1")
    p.add_argument("--keep-zeros", action="store_true",
                   help="keep zero values instead of treating them as missing")
    args = p.parse_args()
    convert(args)


if __name__ == "__main__":
    sys.exit(main())

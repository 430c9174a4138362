#!/usr/bin/env python3
"""Tabulate the glued Mobius field: dense values and Fourier data.

Writes theta-value samples (exact piecewise evaluation next to the
truncated Fourier series, with the pointwise gap), the coefficient table,
and prints the corner diagnostics.

Examples
--------
  python3 scripts/field_profile.py --samples 2000 --cutoff 200 --out out/profile
"""

import argparse
import csv
import math
import sys
from pathlib import Path

from vircut import fields


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=1000,
                    help="theta samples on [0, 2 pi)")
    ap.add_argument("--cutoff", type=int, default=200,
                    help="Fourier modes kept in the series comparison")
    ap.add_argument("--out", default="out/field_profile", help="output directory")
    args = ap.parse_args()

    field = fields.build_piecewise_mobius()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "profile.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta", "value", "series", "gap"])
        worst = 0.0
        for i in range(args.samples):
            theta = 2.0 * math.pi * i / args.samples
            value = fields.evaluate(field, theta)
            series = fields.evaluate_series(field, theta, args.cutoff)
            gap = abs(value - series)
            worst = max(worst, gap)
            writer.writerow([repr(theta), repr(value), repr(series), repr(gap)])

    rows = fields.coefficient_rows(field, args.cutoff)
    with open(out / "coefficients.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "re", "im", "abs"])
        for n, re, im in rows:
            writer.writerow([n, repr(re), repr(im), repr(math.hypot(re, im))])

    print(f"{args.samples} samples, {len(rows)} modes up to |n| <= {args.cutoff}")
    print(f"worst pointwise series gap: {worst:.3e}")
    print("corners (value left/right, d1 left/right, d2 left/right):")
    values = fields.corner_values(field)
    for corner, label in zip(fields.CORNERS, ("1", "i", "-1", "-i")):
        v = values[corner]
        d1 = fields.one_sided_derivatives(field, corner, 1)
        d2 = fields.one_sided_derivatives(field, corner, 2)
        print(f"  z = {label:>2}: value {v[0]}/{v[1]}, d1 {d1[0]}/{d1[1]}, "
              f"d2 {d2[0]}/{d2[1]} (jump {abs(d2[1] - d2[0])})")
    norm = fields.norm_three_halves(field, args.cutoff)
    print(f"|f|_3/2 partial {norm.partial_sum!r} + tail bound {norm.tail_bound!r}")
    print(f"wrote {out / 'profile.csv'} and {out / 'coefficients.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

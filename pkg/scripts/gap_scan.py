"""Relative gap (p3_min - p2^2) / p2^2 as a function of p2.

    python scripts/gap_scan.py --grid 10000 --out results/gap.csv
"""

import argparse
from pathlib import Path

from ptmoment.survey import gap_scan, write_csv

ap = argparse.ArgumentParser()
ap.add_argument("--grid", type=int, default=10_000)
ap.add_argument("--out", default="results/gap.csv")
args = ap.parse_args()

g = gap_scan(args.grid)
print(f"max relative gap {100 * g.max_gap:.4f}% at p2 = {g.p2_star:.6f}")
Path(args.out).parent.mkdir(parents=True, exist_ok=True)
write_csv(args.out, ["p2", "relative_gap"], zip(g.p2, g.gap))

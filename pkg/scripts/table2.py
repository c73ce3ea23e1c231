"""Detection fractions for larger D x D states (order-5 criteria are skipped).

    python scripts/table2.py --samples 10000 --dims 10
"""

import argparse
import time
from pathlib import Path

from ptmoment.survey import run_survey, write_csv

CRITERIA = ("npt", "npt3", "onpt3", "onpt4")

ap = argparse.ArgumentParser()
ap.add_argument("--samples", type=int, default=10_000)
ap.add_argument("--dims", type=int, nargs="+", default=[10])
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--out", default="results/table2.csv")
args = ap.parse_args()

rows = []
for D in args.dims:
    t0 = time.perf_counter()
    r = run_survey(D, args.samples, args.seed, criteria=CRITERIA)
    line = "  ".join(f"{k}={100 * r.fractions[k]:.2f}%" for k in CRITERIA)
    print(f"D={D}  {line}  ({time.perf_counter() - t0:.0f} s)")
    rows.append([D, args.samples] + [r.counts[k] for k in CRITERIA] + [r.fractions[k] for k in CRITERIA])

Path(args.out).parent.mkdir(parents=True, exist_ok=True)
write_csv(args.out, ["D", "samples"] + [f"{k}_count" for k in CRITERIA] + list(CRITERIA), rows)

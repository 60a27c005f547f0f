"""Ball sizes |B(o, r)| per family, to compare growth rates.

    python scripts/volume_growth.py --radii 1 2 4 8 16 32
"""

import argparse
import csv
import sys

from rwlab.graphs import FAMILIES, ball_sizes


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radii", type=int, nargs="+", default=[1, 2, 4, 8, 16, 32])
    ap.add_argument("--stretch", type=int, default=6)
    args = ap.parse_args()
    w = csv.writer(sys.stdout)
    w.writerow(["family"] + [f"r={r}" for r in args.radii])
    for fam in FAMILIES:
        params = {"stretch": args.stretch} if fam == "stretched_line" else {}
        sizes = ball_sizes(fam, args.radii, params)
        w.writerow([fam] + [sizes[r] for r in args.radii])


if __name__ == "__main__":
    main()

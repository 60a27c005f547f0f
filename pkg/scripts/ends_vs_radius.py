"""Fraction of sampled trees with one end (grid2d, wired) and two ends (ladder, rooted at the right end) per radius.

    python scripts/ends_vs_radius.py --radii 10 20 40 --samples 500
"""

import argparse

import numpy as np

from rwlab import boundary as bd
from rwlab import graphs as G
from rwlab import ust


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radii", type=int, nargs="+", default=[10, 20, 40])
    ap.add_argument("--samples", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print("radius,grid2d_one_ended,ladder_two_ended")
    for r in args.radii:
        F = G.wired_truncation("grid2d", {}, r)
        succ = ust.wilson_successors(F, F.boundary, args.samples, args.seed, stream=f"ends:{r}")
        one = np.mean([ust.ends_proxy(ust.OrientedTree.from_successors(F, s, "toward_wired_boundary")) == 1 for s in succ])
        a = bd.window_kernel(bd.direction("ladder", "right"), (0, 0), r)
        succ = ust.wilson_h_successors(a, args.samples, args.seed, stream=f"ends_h:{r}")
        two = np.mean([ust.ends_proxy(ust.OrientedTree.from_successors(a.graph, s, "toward_h")) == 2 for s in succ])
        print(f"{r},{one:.4f},{two:.4f}")


if __name__ == "__main__":
    main()

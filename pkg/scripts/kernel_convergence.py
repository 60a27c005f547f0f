"""Sup deviation between successive window iterates of the potential kernel, per boundary point.

Shows how fast each approach to infinity settles on a fixed target set.

    python scripts/kernel_convergence.py --family grid2d --specs wired axis diagonal --ball 3
"""

import argparse

from rwlab import boundary as bd
from rwlab import graphs as G


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="grid2d", choices=G.FAMILIES)
    ap.add_argument("--specs", nargs="+", default=["wired", "axis", "diagonal"])
    ap.add_argument("--ball", type=int, default=3)
    ap.add_argument("--stretch", type=int)
    ap.add_argument("--cap", type=int)
    args = ap.parse_args()
    params = {"stretch": args.stretch} if args.stretch else {}
    o = G.origin(args.family)
    targets = [v for v in G.window_vertices(args.family, args.ball, params) if G.graph_distance_from_origin(args.family, v) <= args.ball]
    print("spec,radius,sup_deviation")
    for name in args.specs:
        k = bd.potential_kernel_limit(bd.parse_spec(args.family, name, **params), o, targets, tol=0.0, cap=args.cap)
        for r, dev in k.iterates:
            print(f"{name},{r},{dev:.3e}")


if __name__ == "__main__":
    main()

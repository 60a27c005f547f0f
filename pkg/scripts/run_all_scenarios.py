"""Run every scenario once and print a PASS/FAIL table.

    python scripts/run_all_scenarios.py --out runs --workers 4 --seed 0
"""

import argparse

from rwlab.runner import ScenarioConfig, execute_many
from rwlab.scenarios import SCENARIOS


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--only", nargs="*", choices=SCENARIOS)
    args = ap.parse_args()
    names = args.only or SCENARIOS
    cfgs = [ScenarioConfig(n, args.seed, {}, args.out) for n in names]
    for (path, passed), n in zip(execute_many(cfgs, args.workers), names):
        print(f"{'PASS' if passed else 'FAIL'}  {n:24s} {path}")


if __name__ == "__main__":
    main()

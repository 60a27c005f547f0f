"""The fifteen acceptance criteria, each run once at its stated tolerance.

Every criterion prints one PASS/FAIL line (collected in the terminal summary).
Criteria 7, 8 and 9 fail for mathematical reasons recorded in the decisions
ledger; they are marked strict xfail so the suite stays green while the
failure stays visible, and an unexpected pass breaks the run.
"""

import time

import pytest
from conftest import ACCEPTANCE_LINES

from rwlab.scenarios import run

SEED = 20240611

# (number, scenario, runtime budget in seconds, reason it cannot pass or None)
CRITERIA = [
    (1, "laplacian_identity", 30, None),
    (2, "formula_agreement", 120, None),
    (3, "consistency", 60, None),
    (4, "affine_roundtrip", 180, None),
    (5, "hitting_matrix", 10, None),
    (6, "doob_hitting", 180, None),
    (7, "martingale", 120, "E[1/a(X_n)] = deg(o) P_o(T_o^+ > n, a(X_n) > 0) decreases strictly"),
    (8, "ratio_decay", 120, "a_l/a_r(X_n) is a true martingale with mean 1 on the ladder; only its median decays"),
    (9, "local_convergence", 60, "on the line the TV is identically 0 once z > k, so it cannot decrease strictly"),
    (10, "wilson_correctness", 300, None),
    (11, "counterexample_bound", 60, None),
    (12, "cocycle", 120, None),
    (13, "resistance_slope", 120, None),
    (14, "tip_escape", 600, None),
    (15, "interval_decomposition", 30, None),
]


def _param(num, name, budget, reason):
    marks = [pytest.mark.xfail(strict=True, reason=reason)] if reason else []
    return pytest.param(num, name, budget, id=f"{num:02d}-{name}", marks=marks)


@pytest.mark.parametrize("num,name,budget", [_param(*c) for c in CRITERIA])
def test_criterion(num, name, budget):
    t0 = time.perf_counter()
    res = run(name, seed=SEED)
    elapsed = time.perf_counter() - t0
    ok = res.passed and elapsed < budget
    failed = [c for c in res.checks if not c.passed]
    detail = "; ".join(f"{c.name} [{c.detail}]" for c in failed) if failed else f"{len(res.checks)} checks"
    line = f"{'PASS' if ok else 'FAIL'} {num:2d} {name} ({elapsed:.1f}s / {budget}s): {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert elapsed < budget, f"runtime {elapsed:.1f}s over budget {budget}s"
    assert res.passed, detail


if __name__ == "__main__":
    for num, name, budget, _ in CRITERIA:
        t0 = time.perf_counter()
        res = run(name, seed=SEED)
        print(f"{'PASS' if res.passed else 'FAIL'} {num:2d} {name} ({time.perf_counter() - t0:.1f}s)")

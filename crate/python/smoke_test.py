"""Smoke test for the Python bindings.

Build first with `pip install --no-build-isolation -e crates/py`, then run
`python python/smoke_test.py`.
"""

import itertools
import json
import tempfile
from fractions import Fraction
from pathlib import Path

import conflict_fair as cf


def brute_best_product(inst, ef1_only):
    best = None
    n, m = inst.n_agents, inst.n_items
    for owner in itertools.product(range(n), repeat=m):
        if any(owner[a] == owner[b] for a, b in inst.edges):
            continue
        bundles = [[j for j in range(m) if owner[j] == i] for i in range(n)]
        if ef1_only and not cf.is_ef1(inst, bundles):
            continue
        w = cf.nash_welfare(inst, bundles)
        key = (w[0], Fraction(w[1]))
        best = key if best is None or key > best else best
    return best


def main():
    path = cf.Instance([[2, 2, 3], [6, 5, 6]], [(0, 1), (1, 2)])
    assert path.n_agents == 2 and path.max_degree == 2

    free = cf.mnw_exact(path)
    assert free == [[0, 2], [1]], free
    assert not cf.is_ef1(path, free)
    assert cf.nash_welfare(path, free) == (2, "25")
    assert Fraction(cf.prop_ratio(path, free)) == Fraction(10, 17)

    fair = cf.mnw_exact(path, require_ef1=True)
    assert fair == [[1], [0, 2]], fair
    assert cf.is_ef1(path, fair)

    for ef1_only in (False, True):
        got = cf.mnw_exact(path, require_ef1=ef1_only)
        w = cf.nash_welfare(path, got)
        assert (w[0], Fraction(w[1])) == brute_best_product(path, ef1_only)

    halves = cf.Instance([["1/2", "3/2"], [1, 1]])
    assert halves.valuations[0] == ["1/2", "3/2"]
    assert cf.mms_profile(halves) == ["1/2", "1"]

    k33 = cf.Instance([[2, 2, 2, 3, 3, 3]] * 4, [(a, b) for a in range(3) for b in range(3, 6)])
    assert cf.ef1_exists(k33) is None
    try:
        cf.mnw_exact(k33, require_ef1=True)
    except cf.NoEf1Allocation:
        pass
    else:
        raise AssertionError("expected NoEf1Allocation")
    try:
        cf.mnw_exact(k33, max_nodes=3)
    except cf.BudgetExhausted:
        pass
    else:
        raise AssertionError("expected BudgetExhausted")

    three = cf.Instance([[2, 2, 3, 1], [6, 5, 6, 1], [1, 1, 1, 1]], [(0, 1), (1, 2), (2, 3)])
    alpha, bundles = cf.mms_approx_poly(three)
    assert Fraction(alpha) == Fraction(1, 2) and three.is_feasible(bundles)
    guaranteed, achieved, bundles = cf.construct_alpha_mms(three)
    assert Fraction(achieved) >= Fraction(guaranteed) and three.is_feasible(bundles)
    assert three.is_feasible(cf.randomized_allocation(three, 7))
    binary = cf.Instance([[1, 0, 1, 1, 0], [0, 1, 1, 0, 1], [1, 1, 0, 1, 1]], [(0, 1), (1, 2), (3, 4)])
    assert cf.is_ef1(binary, cf.path_ef1(binary))
    assert cf.is_ef1(binary, cf.component_ef1(binary))

    again = cf.Instance.from_json(path.to_json())
    assert again.valuations == path.valuations and again.edges == path.edges

    a = cf.gen_instances("ba", 4, seed=5, n_max=4, m_cap=10)
    b = cf.gen_instances("ba", 4, seed=5, n_max=4, m_cap=10)
    assert [(i, x.to_json()) for i, x in a] == [(i, x.to_json()) for i, x in b]

    with tempfile.TemporaryDirectory() as out:
        config = json.dumps({"models": ["ws"], "per_model": 2, "n_max": 3, "m_cap": 8, "trials": 5})
        lines = cf.run_experiment(config, out).splitlines()
        records = [json.loads(line) for line in lines]
        assert len(records) == 2 and all(r["model"] == "ws" for r in records)
        assert (Path(out) / "summary.csv").exists()

    print("python smoke test: ok")


if __name__ == "__main__":
    main()

from collections import Counter

import pytest

from atspp import patch
from atspp.instance import gap_instance, random_instance
from atspp.lp import solve_subtour_lp
from atspp.narrowcuts import find_narrow_cuts
from atspp.patch import (WalkResult, augment_to_eulerian, extract_path,
                         hoffman_bounds, verify_hoffman)
from atspp.sampler import SampleConfig
from oracles import circulation_cost_by_lp, hamilton_path_by_permutations

TAU = 0.25


def _cfg(n, seed=0):
    return SampleConfig(seed=seed, tau=TAU, n=n)


def test_hoffman_bounds_return_arc_and_zero_arcs(f1):
    met, x = f1
    cfg = _cfg(met.n)
    tree = ((0, 1), (1, 2), (2, 3))
    lower, upper = hoffman_bounds(tree, x, met, cfg)
    assert (lower[(3, 0)], upper[(3, 0)]) == (1.0, 1.0)
    # An arc outside the tree with zero LP mass gets (0, 0).
    assert lower.get(3, 1) == 0 and upper.get(3, 1) == 0
    # Tree arc s->u1 with x = 1/2: lower 1, upper 1 + (1 + 1/tau) alpha / 2.
    assert lower[(0, 1)] == 1.0
    assert upper[(0, 1)] == pytest.approx(1.0 + 5 * cfg.alpha / 2)


def test_verify_hoffman_forced_path(forced_path3):
    sol = solve_subtour_lp(forced_path3)
    chain = find_narrow_cuts(sol.x, 3, 0, 2, TAU)
    tree = ((0, 1), (1, 2))
    lower, upper = hoffman_bounds(tree, sol.x, forced_path3, _cfg(3))
    report = verify_hoffman(lower, upper, forced_path3, chain)
    assert report.ok, report.lines()
    assert sum(report.case_counts.values()) == 2 ** 3 - 2
    # Narrow cuts can sit at equality: slack >= 0 with the unit return cap.
    assert report.case_minima["narrow"] >= -1e-9
    assert report.case_counts["narrow"] == 2


def test_verify_hoffman_four_cases_on_f2(f2):
    met, x = f2
    chain = find_narrow_cuts(x, met.n, met.s, met.t, TAU)
    from atspp.retree import build_z, decompose_trees
    from atspp.sampler import sample_tree
    comb = decompose_trees(build_z(x, chain))
    arcs = sample_tree(comb, _cfg(met.n, seed=2))
    lower, upper = hoffman_bounds(arcs, x, met, _cfg(met.n))
    report = verify_hoffman(lower, upper, met, chain)
    assert report.ok, report.lines()
    for case in ("narrow", "st", "ts", "nonseparating"):
        assert report.case_counts[case] > 0
        assert report.case_minima[case] >= -1e-9


def test_augment_balanced_tree_adds_only_return_arc(forced_path3):
    multi, cost = augment_to_eulerian(((0, 1), (1, 2)), forced_path3, _cfg(3))
    assert multi == Counter({(0, 1): 1, (1, 2): 1, (2, 0): 1})
    assert cost == pytest.approx(forced_path3.c(0, 1) + forced_path3.c(1, 2)
                                 + forced_path3.c(2, 0))


def test_augment_f1_tree_big_return_cost_cancels(f1):
    met, x = f1
    tree = ((0, 1), (1, 2), (2, 3))
    multi, circ_cost = augment_to_eulerian(tree, met, _cfg(met.n))
    assert multi == Counter({(0, 1): 1, (1, 2): 1, (2, 3): 1, (3, 0): 1})
    big = met.c(met.t, met.s)
    assert big == 5.0  # unreachable return priced at n * max_cost + 1
    assert circ_cost == pytest.approx(2.0 + big)
    walk = extract_path(multi, met)
    assert walk.path == [0, 1, 2, 3]
    assert walk.cost == pytest.approx(2.0)  # the big arc cancels out


def test_augment_unbalanced_tree_routes_cheapest_fix(f1):
    met, x = f1
    # Star at u1: in-degree 2, out-degree 1; the only free fix is u1 -> v1.
    tree = ((0, 1), (2, 1), (1, 3))
    multi, circ_cost = augment_to_eulerian(tree, met, _cfg(met.n))
    assert multi[(1, 2)] == 1  # added zero-cost arc u1 -> v1
    walk = extract_path(multi, met)
    assert walk.path == [0, 1, 2, 3]
    assert walk.cost <= circ_cost - met.c(3, 0) + 1e-9
    assert walk.cost == pytest.approx(2.0)


def test_augment_cost_matches_lp_circulation_oracle(f2):
    met, x = f2
    chain = find_narrow_cuts(x, met.n, met.s, met.t, TAU)
    from atspp.retree import build_z, decompose_trees
    from atspp.sampler import sample_tree
    comb = decompose_trees(build_z(x, chain))
    arcs = sample_tree(comb, _cfg(met.n, seed=1))
    multi, circ_cost = augment_to_eulerian(arcs, met, _cfg(met.n))
    u_cap = len(arcs) + 1 + met.n + 1
    prob_arcs = []
    for u in range(met.n):
        for v in range(met.n):
            if u == v:
                continue
            lo = 1 if (u, v) in set(arcs) or (u, v) == (met.t, met.s) else 0
            up = 1 if (u, v) == (met.t, met.s) else u_cap
            prob_arcs.append((u, v, lo, up, float(met.cost[u, v])))
    oracle = circulation_cost_by_lp(met.n, prob_arcs)
    assert oracle is not None
    assert circ_cost == pytest.approx(oracle)


def test_extract_path_simple_cycle(forced_path3):
    multi = Counter({(0, 1): 1, (1, 2): 1, (2, 0): 1})
    walk = extract_path(multi, forced_path3)
    assert walk.path == [0, 1, 2]


def test_extract_path_shortcuts_repeats(f1):
    met, _ = f1
    # Walk s, u1, v1, u1, t realized as an Eulerian multiset.
    multi = Counter({(0, 1): 1, (1, 2): 1, (2, 1): 1, (1, 3): 1, (3, 0): 1})
    walk = extract_path(multi, met)
    assert walk.path == [0, 1, 2, 3]
    walk_cost_unshortcut = met.c(0, 1) + met.c(1, 2) + met.c(2, 1) + met.c(1, 3)
    assert walk.cost <= walk_cost_unshortcut + 1e-9
    assert walk.cost == pytest.approx(2.0)  # d(v1, t) = 1 via the completion


def test_extract_path_rejects_missing_return_arc(forced_path3):
    with pytest.raises(ValueError):
        extract_path(Counter({(0, 1): 1, (1, 2): 1}), forced_path3)


def test_extract_path_rejects_unbalanced(forced_path3):
    with pytest.raises(ValueError):
        extract_path(Counter({(0, 1): 1, (2, 0): 1}), forced_path3)


def test_round_forced_path_is_exact(forced_path3):
    report = patch.round(forced_path3, seed=0)
    walk = report.walk
    assert walk.path == [0, 1, 2]
    assert walk.ratio == pytest.approx(1.0)
    walk.validate(forced_path3)


def test_round_f3_within_guarantee():
    met, _ = gap_instance(3)
    report = patch.round(met, seed=1)
    walk = report.walk
    walk.validate(met)
    cfg_alpha = report.alpha
    bound = (3 / (1 - 3 * TAU) + (1 + 1 / TAU) * cfg_alpha) * walk.lp_value
    assert walk.lp_value - 1e-6 <= walk.cost <= bound + 1e-6


def test_round_random_oracle_sandwich():
    inst = random_instance(10, 7, "closure")
    report = patch.round(inst, seed=7)
    opt, _ = hamilton_path_by_permutations(inst)
    assert report.walk.lp_value - 1e-6 <= opt <= report.walk.cost + 1e-6


def test_round_cost_chain_inequalities():
    inst = random_instance(12, 24, "closure")
    report = patch.round(inst, seed=3)
    walk = report.walk
    ts = inst.c(inst.t, inst.s)
    assert walk.cost <= walk.circulation_cost - ts + 1e-6
    slack = (1 + 1 / TAU) * report.alpha * walk.lp_value
    assert walk.circulation_cost - ts <= walk.tree_cost + slack + 1e-6 * max(1, walk.tree_cost)


def test_walkresult_validation_catches_bad_paths(forced_path3):
    walk = WalkResult([0, 2, 1], 1.0, 2.0)
    with pytest.raises(ValueError):
        walk.validate(forced_path3)

import pytest

from atspp.instance import ArcVector, gap_instance, random_instance
from atspp.lp import solve_subtour_lp
from atspp.narrowcuts import find_narrow_cuts
from atspp.retree import (LayerDecompositionError, ReroutedVector,
                          ZeroBoundaryMass, build_z, decompose_trees,
                          undirect, verify_z)

TAU = 0.25


def test_undirect_keeps_parallel_edges_and_total():
    w = ArcVector({(0, 1): 0.3, (1, 0): 0.5})
    kappa = undirect(w)
    assert kappa.entries[(0, 1)] == 0.3
    assert kappa.entries[(1, 0)] == 0.5
    assert kappa.between(0, 1) == pytest.approx(0.8)
    assert kappa.total() == pytest.approx(w.total())


def test_undirect_f1_six_half_edges(f1):
    _, x = f1
    kappa = undirect(x)
    assert len(kappa.entries) == 6
    assert all(w == 0.5 for _, w in kappa.items())


def _chain(x, met):
    return find_narrow_cuts(x, met.n, met.s, met.t, TAU)


def test_build_z_forced_path_identity(forced_path3):
    sol = solve_subtour_lp(forced_path3)
    chain = _chain(sol.x, forced_path3)
    zv = build_z(sol.x, chain)
    assert dict(zv.z.items()) == pytest.approx(dict(sol.x.items()))


def test_build_z_f1_matches_hand_derivation(f1):
    met, x = f1
    chain = _chain(x, met)
    zv = build_z(x, chain)
    # Independent recomputation of the three-case formula from the chain.
    layer_of = chain.layer_of()
    expected = {}
    for (u, v), w in x.items():
        i, j = layer_of[u], layer_of[v]
        if j == i + 1:
            mass = sum(ww for (a, b), ww in x.items()
                       if layer_of[a] == i and layer_of[b] == i + 1)
            expected[(u, v)] = w / mass
        elif i == j:
            expected[(u, v)] = w / (1 - 2 * TAU)
    assert dict(zv.z.items()) == pytest.approx(expected)
    # The concrete values: unit boundary masses halve, within-layer doubles.
    assert zv.z[(0, 1)] == pytest.approx(0.5)
    assert zv.z[(0, 2)] == pytest.approx(0.5)
    assert zv.z[(1, 3)] == pytest.approx(0.5)
    assert zv.z[(2, 3)] == pytest.approx(0.5)
    assert zv.z[(1, 2)] == pytest.approx(1.0)
    assert zv.z[(2, 1)] == pytest.approx(1.0)


def test_build_z_zeroes_backward_arcs(f2):
    met, x = f2
    chain = _chain(x, met)
    zv = build_z(x, chain)
    for cut in chain.cuts:
        assert zv.z.into(cut.mask) == 0.0
        assert zv.z.out_of(cut.mask) == pytest.approx(1.0)


def test_build_z_rejects_broken_chain(f1):
    met, x = f1
    chain = _chain(x, met)
    hollow = ArcVector({(1, 2): 0.5, (2, 1): 0.5})  # no boundary mass at all
    with pytest.raises(ZeroBoundaryMass):
        build_z(hollow, chain)


def test_decompose_f1_four_quarter_terms(f1):
    met, x = f1
    zv = build_z(x, _chain(x, met))
    comb = decompose_trees(zv)
    assert len(comb.terms) == 4
    for w, arcs in comb.terms:
        assert w == pytest.approx(0.25)
        assert len(arcs) == 3
        assert sum(1 for a in arcs if a in ((0, 1), (0, 2))) == 1
        assert sum(1 for a in arcs if a in ((1, 3), (2, 3))) == 1
        assert sum(1 for a in arcs if a in ((1, 2), (2, 1))) == 1
    marg = comb.marginals()
    for arc in ((0, 1), (0, 2), (1, 3), (2, 3)):
        assert marg[arc] == pytest.approx(zv.z[arc])


def test_decompose_forced_path_single_term(forced_path3):
    sol = solve_subtour_lp(forced_path3)
    zv = build_z(sol.x, _chain(sol.x, forced_path3))
    comb = decompose_trees(zv)
    assert comb.terms == [(pytest.approx(1.0), ((0, 1), (1, 2)))]


@pytest.mark.parametrize("case", [("gap", 3), ("gap", 5),
                                  ("random", (8, 15)), ("random", (10, 0)),
                                  ("random", (12, 24)), ("random", (14, 37))])
def test_combination_invariants(case):
    kind, arg = case
    if kind == "gap":
        met, x = gap_instance(arg)
    else:
        n, seed = arg
        met = random_instance(n, seed, "closure")
        x = solve_subtour_lp(met).x
    chain = _chain(x, met)
    zv = build_z(x, chain)
    comb = decompose_trees(zv)
    assert comb.total_weight() == pytest.approx(1.0, abs=1e-9)
    marg = comb.marginals()
    layer_of = chain.layer_of()
    for a, w in marg.items():
        assert w <= zv.z[a] + 1e-9
    for (u, v), w in zv.z.items():
        if layer_of[v] == layer_of[u] + 1:
            assert marg[(u, v)] == pytest.approx(w, abs=1e-9)
    for _, arcs in comb.terms:
        assert len(arcs) == met.n - 1
        for cut in chain.cuts:
            fwd = sum(1 for u, v in arcs if cut.contains(u) and not cut.contains(v))
            bwd = sum(1 for u, v in arcs if not cut.contains(u) and cut.contains(v))
            assert (fwd, bwd) == (1, 0)


def test_verify_z_passes_on_gap_instances(f2):
    met, x = f2
    zv = build_z(x, _chain(x, met))
    report = verify_z(zv, x)
    assert report.ok, report.lines()
    assert report.cut_forward_error <= 1e-9
    assert report.cut_backward_mass == 0.0


def test_verify_z_flags_inflated_entry(f1):
    met, x = f1
    chain = _chain(x, met)
    zv = build_z(x, chain)
    bad_entries = dict(zv.z.entries)
    bad_entries[(0, 1)] = 3.0  # beyond x/(1-3 tau) = 2.0 and breaks cut flow
    bad = ReroutedVector(ArcVector(bad_entries), chain, TAU)
    report = verify_z(bad, x, decompose_trees(zv))
    assert not report.ok
    assert any("exceeds x/(1-3tau)" in v for v in report.violations)


def test_two_vertex_instance_degenerates_cleanly():
    met = random_instance(2, 0, "closure")
    sol = solve_subtour_lp(met)
    chain = _chain(sol.x, met)
    assert chain.k == 1
    zv = build_z(sol.x, chain)
    comb = decompose_trees(zv)
    assert comb.terms == [(pytest.approx(1.0), ((0, 1),))]


def test_layer_decomposition_error_on_disconnected_support(f1):
    met, x = f1
    chain = _chain(x, met)
    # Within-layer arcs removed: the layer {u1, v1} cannot be connected.
    zv = ReroutedVector(ArcVector({
        (0, 1): 0.5, (0, 2): 0.5, (1, 3): 0.5, (2, 3): 0.5}), chain, TAU)
    with pytest.raises(LayerDecompositionError):
        decompose_trees(zv)

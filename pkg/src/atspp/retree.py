"""Rerouting the LP point across narrow cuts and decomposing it into trees.

The rerouted vector concentrates each narrow cut's unit of flow on the arcs
between consecutive layers and inflates within-layer arcs just enough to
keep every layer fractionally connected.  Its undirected version dominates
a convex combination of spanning trees in which every term crosses every
narrow cut exactly once, forward; that combination is the sampling input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from . import simplex
from .instance import ArcVector, Cut
from .narrowcuts import NarrowCutChain

_TOL = 1e-9


class ZeroBoundaryMass(RuntimeError):
    """A consecutive-layer boundary carries no mass; the chain is broken."""


class LayerDecompositionError(RuntimeError):
    """A layer's within mass does not dominate a convex combination of trees."""


@dataclass
class UndirectedWeights:
    """Weights on the bi-edge multigraph: each arc is its own parallel edge."""

    entries: dict[tuple[int, int], float]

    def between(self, u: int, v: int) -> float:
        return self.entries.get((u, v), 0.0) + self.entries.get((v, u), 0.0)

    def total(self) -> float:
        return sum(self.entries.values())

    def items(self):
        return sorted(self.entries.items())


def undirect(w: ArcVector) -> UndirectedWeights:
    """Undirected shadow of an arc vector: two parallel edges per vertex pair."""
    return UndirectedWeights(dict(w.entries))


@dataclass
class ReroutedVector:
    z: ArcVector
    chain: NarrowCutChain
    tau: float


@dataclass
class TreeCombination:
    """Convex combination of directed arc sets whose shadows are spanning trees."""

    n: int
    terms: list[tuple[float, tuple[tuple[int, int], ...]]]

    def total_weight(self) -> float:
        return sum(w for w, _ in self.terms)

    def marginals(self) -> ArcVector:
        marg: dict[tuple[int, int], float] = {}
        for w, arcs in self.terms:
            for a in arcs:
                marg[a] = marg.get(a, 0.0) + w
        return ArcVector(marg)


def build_z(x: ArcVector, chain: NarrowCutChain) -> ReroutedVector:
    """Rerouted vector: boundary arcs are normalized to unit cut flow,
    within-layer arcs are scaled by 1/(1-2 tau), everything else drops to 0."""
    tau = chain.tau
    layer_of = chain.layer_of()
    boundary_mass: dict[int, float] = {}
    for (u, v), w in x.entries.items():
        i, j = layer_of[u], layer_of[v]
        if j == i + 1:
            boundary_mass[i] = boundary_mass.get(i, 0.0) + w
    entries: dict[tuple[int, int], float] = {}
    for (u, v), w in x.entries.items():
        if w == 0:
            continue
        i, j = layer_of[u], layer_of[v]
        if j == i + 1:
            mass = boundary_mass.get(i, 0.0)
            if mass <= _TOL:
                raise ZeroBoundaryMass(f"boundary {i} between layers has zero mass")
            entries[(u, v)] = w / mass
        elif i == j:
            entries[(u, v)] = w / (1 - 2 * tau)
    for i in range(len(chain.layers) - 1):
        if boundary_mass.get(i, 0.0) <= _TOL:
            raise ZeroBoundaryMass(f"boundary {i} between layers has zero mass")
    return ReroutedVector(ArcVector(entries), chain, tau)


def _spanning_tree(q: int, arcs: list[tuple[int, int, int]], weight_of) -> list[int] | None:
    """Kruskal over multigraph arcs (local_u, local_v, arc_id); ties break on id."""
    parent = list(range(q))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    chosen = []
    for u, v, aid in sorted(arcs, key=lambda e: (weight_of(e[2]), e[2])):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            chosen.append(aid)
            if len(chosen) == q - 1:
                return sorted(chosen)
    return None


def _decompose_layer(verts: list[int], z: ArcVector) -> list[tuple[float, tuple]]:
    """Convex combination of spanning trees of the layer dominated by the
    within-layer part of z, by column generation: the master packs tree
    columns under the capacities z, priced by a minimum spanning tree under
    the master's duals, until total packed weight reaches 1."""
    q = len(verts)
    if q == 1:
        return [(1.0, ())]
    local = {v: i for i, v in enumerate(verts)}
    arcs = []       # (local_u, local_v, arc_id)
    caps = []
    arc_pos = {}
    for (u, v), w in z.items():
        if u in local and v in local and w > 1e-12:
            arc_pos[(u, v)] = len(arcs)
            arcs.append((local[u], local[v], len(arcs)))
            caps.append(w)
    tree0 = _spanning_tree(q, arcs, lambda aid: -caps[aid])
    if tree0 is None:
        raise LayerDecompositionError(
            f"within-layer support does not connect layer {verts}")
    columns = [tree0]
    m = len(arcs)
    while True:
        a_le = [[1.0 if i in col else 0.0 for col in columns] for i in range(m)]
        res = simplex.solve_lp([-1.0] * len(columns), A_le=a_le, b_le=caps)
        packed = -res.objective
        if packed >= 1.0 - 1e-12:
            lambdas = res.x
            break
        prices = [max(0.0, -y) for y in res.dual_le]
        tree = _spanning_tree(q, arcs, lambda aid: prices[aid])
        price = sum(prices[aid] for aid in tree)
        if price >= 1.0 - 1e-9 or tree in columns:
            raise LayerDecompositionError(
                f"layer {verts} packs only {packed:.6f} < 1 of a tree; "
                "the rerouted vector violates the partition bounds")
        columns.append(tree)
    id_to_arc = {arc_pos[a]: a for a in arc_pos}
    out = []
    for lam, col in zip(lambdas, columns):
        if lam > 1e-12:
            out.append((lam / packed, tuple(sorted(id_to_arc[aid] for aid in col))))
    return out


def decompose_trees(zv: ReroutedVector) -> TreeCombination:
    """Convex combination of spanning trees certifying the rerouted vector.

    Per layer, a tree combination dominated by the within-layer weights;
    per boundary, a categorical choice of one arc with probabilities z.
    The factors combine independently (product weights, identical arc sets
    merged), so boundary marginals equal z exactly and within-layer
    marginals never exceed it.  Every term crosses each narrow cut once.
    """
    chain = zv.chain
    n = chain.cuts[0].n
    z = zv.z
    layer_of = chain.layer_of()

    factors: list[list[tuple[float, tuple]]] = []
    for layer in chain.layers:
        factors.append(_decompose_layer(layer.members(), z))
    for i in range(len(chain.layers) - 1):
        boundary = [(a, w) for a, w in z.items()
                    if layer_of[a[0]] == i and layer_of[a[1]] == i + 1 and w > 1e-12]
        total = sum(w for _, w in boundary)
        factors.append([(w / total, (a,)) for a, w in boundary])

    size = 1
    for f in factors:
        size *= len(f)
        if size > 500_000:
            raise LayerDecompositionError(f"combination explodes to {size}+ terms")
    merged: dict[tuple, float] = {}
    for combo in product(*factors):
        weight = 1.0
        arcs: list[tuple[int, int]] = []
        for w, part in combo:
            weight *= w
            arcs.extend(part)
        key = tuple(sorted(arcs))
        merged[key] = merged.get(key, 0.0) + weight
    total = sum(merged.values())
    terms = [(w / total, arcs) for arcs, w in sorted(merged.items(), key=lambda e: (-e[1], e[0]))]
    comb = TreeCombination(n, terms)
    _assert_tree_terms(comb, chain)
    return comb


def _assert_tree_terms(comb: TreeCombination, chain: NarrowCutChain) -> None:
    n = comb.n
    for _, arcs in comb.terms:
        if len(arcs) != n - 1:
            raise LayerDecompositionError(f"term has {len(arcs)} arcs, expected {n - 1}")
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for u, v in arcs:
            ru, rv = find(u), find(v)
            if ru == rv:
                raise LayerDecompositionError("term contains an undirected cycle")
            parent[ru] = rv
        for cut in chain.cuts:
            fwd = sum(1 for u, v in arcs if cut.contains(u) and not cut.contains(v))
            bwd = sum(1 for u, v in arcs if not cut.contains(u) and cut.contains(v))
            if fwd != 1 or bwd != 0:
                raise LayerDecompositionError(
                    f"term crosses narrow cut {cut.members()} {fwd} forward / {bwd} backward")


@dataclass
class ZReport:
    """Residuals of the rerouted-vector guarantees, with a decomposition certificate."""

    max_dominance_excess: float
    cut_forward_error: float
    cut_backward_mass: float
    support_ok: bool
    sum_weights: float
    max_marginal_excess: float
    max_boundary_residual: float
    term_count: int
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        out = [
            f"dominance excess: {self.max_dominance_excess:.3e}",
            f"narrow-cut forward error: {self.cut_forward_error:.3e}",
            f"narrow-cut backward mass: {self.cut_backward_mass:.3e}",
            f"support confined to boundaries and layers: {self.support_ok}",
            f"combination weight: {self.sum_weights:.12f} over {self.term_count} terms",
            f"marginal excess: {self.max_marginal_excess:.3e}",
            f"boundary marginal residual: {self.max_boundary_residual:.3e}",
        ]
        out.extend(f"VIOLATION: {v}" for v in self.violations)
        return out


def verify_z(zv: ReroutedVector, x: ArcVector,
             comb: TreeCombination | None = None) -> ZReport:
    """Check the rerouted vector against all of its guarantees.

    Componentwise dominance z <= x/(1-3 tau); unit forward and zero backward
    mass on every narrow cut; support confined to consecutive boundaries and
    within-layer arcs; and membership of the undirected shadow in the
    spanning tree polytope, certified by the tree combination (dominated
    marginals, boundary equality, one forward crossing per cut and term).
    """
    chain = zv.chain
    tau = zv.tau
    z = zv.z
    violations = []

    scale = 1.0 / (1.0 - 3 * tau)
    dom = 0.0
    for a, w in z.items():
        dom = max(dom, w - scale * x[a])
    if dom > _TOL:
        violations.append(f"z exceeds x/(1-3tau) by {dom:.3e}")

    fwd_err, bwd_mass = 0.0, 0.0
    for cut in chain.cuts:
        fwd_err = max(fwd_err, abs(z.out_of(cut.mask) - 1.0))
        bwd_mass = max(bwd_mass, z.into(cut.mask))
    if fwd_err > _TOL:
        violations.append(f"narrow-cut forward mass off unit by {fwd_err:.3e}")
    if bwd_mass > 0:
        violations.append(f"narrow-cut backward mass {bwd_mass:.3e} nonzero")

    layer_of = chain.layer_of()
    support_ok = True
    for (u, v), w in z.items():
        if w > 0 and layer_of[v] - layer_of[u] not in (0, 1):
            support_ok = False
            violations.append(f"arc ({u},{v}) outside boundary/layer support carries {w}")

    if comb is None:
        comb = decompose_trees(zv)
    total = comb.total_weight()
    if abs(total - 1.0) > _TOL:
        violations.append(f"combination weights sum to {total}")
    marg = comb.marginals()
    marg_excess = 0.0
    boundary_residual = 0.0
    for a, w in marg.items():
        marg_excess = max(marg_excess, w - z[a])
    for (u, v), w in z.items():
        if layer_of[v] == layer_of[u] + 1:
            boundary_residual = max(boundary_residual, abs(marg[(u, v)] - w))
    if marg_excess > _TOL:
        violations.append(f"marginals exceed z by {marg_excess:.3e}")
    if boundary_residual > _TOL:
        violations.append(f"boundary marginals deviate from z by {boundary_residual:.3e}")

    return ZReport(dom, fwd_err, bwd_mass, support_ok, total,
                   marg_excess, boundary_residual, len(comb.terms), violations)

"""Narrow s-t cuts of an LP point: search, chain structure, verification.

An s-t cut U (s in U, t outside) is tau-narrow when x(out(U)) < 1 + tau,
equivalently x(in(U)) < tau.  For tau <= 1/4 the narrow cuts of a feasible
point never cross, so they stack into a chain whose consecutive differences
are the layers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .flows import FlowNetwork, max_flow
from .instance import ArcVector, Cut


class ChainError(RuntimeError):
    """Narrow cuts failed to form a chain or x is not LP-feasible."""


@dataclass
class NarrowCutChain:
    """Nested narrow cuts U_1 = {s} through U_k = V minus {t} and their layers."""

    tau: float
    cuts: list[Cut]
    layers: list[Cut]
    k: int
    search_calls: int = 0

    def layer_of(self) -> list[int]:
        """Vertex -> position of its layer (0-based, layers bottom-up)."""
        n = self.cuts[0].n
        idx = [-1] * n
        for pos, layer in enumerate(self.layers):
            for v in layer.members():
                idx[v] = pos
        return idx


def _aggregate(x: ArcVector, nodes: list[int]) -> dict[tuple[int, int], float]:
    holder = {}
    for pos, mask in enumerate(nodes):
        for v in range(mask.bit_length()):
            if (mask >> v) & 1:
                holder[v] = pos
    agg: dict[tuple[int, int], float] = {}
    for (u, v), w in x.entries.items():
        i, j = holder.get(u), holder.get(v)
        if i is None or j is None or i == j:
            continue
        agg[(i, j)] = agg.get((i, j), 0.0) + w
    return agg


def _search(x: ArcVector, nodes: list[int], s_i: int, t_i: int,
            threshold: float, found: list[int], stats: list[int]) -> None:
    m = len(nodes)
    interior = [i for i in range(m) if i != s_i and i != t_i]
    if not interior:
        return
    agg = _aggregate(x, nodes)
    for u_i in interior:
        for v_i in interior:
            if v_i == u_i:
                continue
            # Contract {s', u} and {t', v}, then min-cut between the blobs.
            group = {}
            for i in range(m):
                group[i] = 0 if i in (s_i, u_i) else 1 if i in (t_i, v_i) else 2 + i
            relabel = {g: idx for idx, g in enumerate(sorted(set(group.values())))}
            cn = len(relabel)
            arcs = {}
            for (i, j), w in agg.items():
                gi, gj = relabel[group[i]], relabel[group[j]]
                if gi != gj:
                    arcs[(gi, gj)] = arcs.get((gi, gj), 0.0) + w
            net = FlowNetwork(cn, [(a, b, w) for (a, b), w in arcs.items()],
                              relabel[0], relabel[1])
            value, cut = max_flow(net)
            if value < threshold:
                members = [i for i in range(m) if cut.contains(relabel[group[i]])]
                u_mask = 0
                for i in members:
                    u_mask |= nodes[i]
                found.append(u_mask)
                stats[0] += 1
                left_nodes = [u_mask] + [nodes[i] for i in range(m) if i not in members]
                left_t = left_nodes.index(nodes[t_i])
                _search(x, left_nodes, 0, left_t, threshold, found, stats)
                comp_mask = 0
                right_nodes = []
                for i in range(m):
                    if i in members:
                        right_nodes.append(nodes[i])
                    else:
                        comp_mask |= nodes[i]
                right_s = right_nodes.index(nodes[s_i])
                right_nodes.append(comp_mask)
                _search(x, right_nodes, right_s, len(right_nodes) - 1, threshold, found, stats)
                return


def find_narrow_cuts(x: ArcVector, n: int, s: int, t: int, tau: float,
                     tol: float = 1e-7) -> NarrowCutChain:
    """All tau-narrow s-t cuts of a feasible x, assembled into a chain.

    Recursive contraction search: for every ordered pair (u, v) of
    non-terminal nodes, contract {s, u} and {t, v} and test the min cut
    against 1 + tau; a hit recurses on both contracted sides.  {s} and
    V minus {t} are always part of the chain.  Values within tol of the
    threshold count as not narrow.
    """
    if not 0 <= tau <= 0.25:
        raise ValueError("tau must lie in [0, 1/4]")
    threshold = 1 + tau - tol
    found: list[int] = []
    stats = [0]
    nodes = [1 << v for v in range(n)]
    _search(x, nodes, s, t, threshold, found, stats)

    masks = {1 << s, ((1 << n) - 1) ^ (1 << t)}
    masks.update(found)
    ordered = sorted(masks, key=lambda m: (m.bit_count(), m))
    for a, b in zip(ordered, ordered[1:]):
        if a & ~b:
            raise ChainError(
                f"narrow cuts do not nest: {Cut(a, n).members()} vs {Cut(b, n).members()}; "
                "x is not LP-feasible or tau > 1/4")
    for mask in ordered:
        fwd = x.out_of(mask)
        bwd = x.into(mask)
        if abs((fwd - bwd) - 1) > 1e-5:
            raise ChainError(
                f"cut {Cut(mask, n).members()} has out - in = {fwd - bwd}, expected 1; "
                "x violates the degree constraints")

    cuts = [Cut(m, n) for m in ordered]
    layers = [cuts[0]]
    for a, b in zip(ordered, ordered[1:]):
        layers.append(Cut(b ^ a, n))
    layers.append(Cut(1 << t, n))
    return NarrowCutChain(tau, cuts, layers, len(cuts), stats[0])


@dataclass
class PartitionCheck:
    layer: int
    size: int
    mode: str            # "certified", "sampled" or "vacuous"
    min_excess: float    # min over partitions of crossing - (parts - 1)
    witness: list[int] | None
    ok: bool


@dataclass
class StructureReport:
    tau: float
    no_crossing: bool
    boundary_masses: list[float]
    partition_checks: list[PartitionCheck] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        out = [f"crossing-free chain: {self.no_crossing}"]
        for i, mass in enumerate(self.boundary_masses):
            out.append(f"boundary {i + 1}: mass {mass:.6f} (bound {1 - 3 * self.tau:.6f})")
        for pc in self.partition_checks:
            out.append(f"layer {pc.layer}: size {pc.size}, {pc.mode}, "
                       f"min partition excess {pc.min_excess:.6f} (bound {-2 * self.tau:.6f})")
        out.extend(f"VIOLATION: {v}" for v in self.violations)
        return out


def _within_table(x: ArcVector, verts: list[int]) -> np.ndarray:
    """Undirected within-mass of every subset of ``verts``."""
    q = len(verts)
    pair = [[0.0] * q for _ in range(q)]
    for i in range(q):
        for j in range(i + 1, q):
            w = x.get(verts[i], verts[j]) + x.get(verts[j], verts[i])
            pair[i][j] = pair[j][i] = w
    within = np.zeros(1 << q)
    for mask in range(1, 1 << q):
        low = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << low)
        acc = within[rest]
        j = rest
        while j:
            b = (j & -j).bit_length() - 1
            acc += pair[low][b]
            j &= j - 1
        within[mask] = acc
    return within


def _sampled_min_excess(within: np.ndarray, q: int, samples: int, seed: int):
    rng = np.random.default_rng(seed)
    best, best_labels = float("inf"), None
    total = float(within[(1 << q) - 1])
    for _ in range(samples):
        labels = [0] * q
        top = 0
        for i in range(1, q):
            labels[i] = int(rng.integers(0, top + 2))
            top = max(top, labels[i])
        nparts = top + 1
        if nparts < 2:
            continue
        masks = [0] * nparts
        for i, lab in enumerate(labels):
            masks[lab] |= 1 << i
        inside = sum(float(within[m]) for m in masks)
        excess = (total - inside) - (nparts - 1)
        if excess < best:
            best, best_labels = excess, labels
    return best, best_labels


def verify_structure(x: ArcVector, chain: NarrowCutChain,
                     partition_cap: int = 12, samples: int = 1000,
                     seed: int = 0, tol: float = 1e-9) -> StructureReport:
    """Certify the chain against the structural guarantees of a feasible x.

    (a) no two narrow cuts cross; (b) each consecutive-layer boundary
    carries mass at least 1 - 3 tau; (c) within each layer, every partition
    into p parts is crossed by at least p - 1 - 2 tau undirected mass.
    Layers above ``partition_cap`` vertices are checked by randomized
    partition sampling and reported as "sampled", not certified.
    """
    tau = chain.tau
    report = StructureReport(tau, True, [])

    for i, a in enumerate(chain.cuts):
        for b in chain.cuts[i + 1:]:
            if a.mask & ~b.mask and b.mask & ~a.mask:
                report.no_crossing = False
                report.violations.append(f"cuts cross: {a.members()} and {b.members()}")

    for i in range(len(chain.layers) - 1):
        li = chain.layers[i]
        lj = chain.layers[i + 1]
        mass = sum(w for (u, v), w in x.entries.items()
                   if li.contains(u) and lj.contains(v))
        report.boundary_masses.append(mass)
        if mass < 1 - 3 * tau - tol:
            report.violations.append(
                f"boundary {i + 1} mass {mass} below 1-3tau = {1 - 3 * tau}")

    for pos, layer in enumerate(chain.layers):
        verts = layer.members()
        q = len(verts)
        if q < 2:
            report.partition_checks.append(
                PartitionCheck(pos, q, "vacuous", float("inf"), None, True))
            continue
        within = _within_table(x, verts)
        if q <= partition_cap:
            min_excess, labels = kernels.partition_min_excess(within, q)
            mode = "certified"
        else:
            min_excess, labels = _sampled_min_excess(within, q, samples, seed)
            mode = "sampled"
        ok = min_excess >= -2 * tau - tol
        report.partition_checks.append(
            PartitionCheck(pos, q, mode, min_excess, labels, ok))
        if not ok:
            parts: dict[int, list[int]] = {}
            for i, lab in enumerate(labels):
                parts.setdefault(lab, []).append(verts[i])
            report.violations.append(
                f"layer {pos} partition {sorted(parts.values())} crossed by "
                f"{min_excess + (len(parts) - 1):.6f} < {len(parts) - 1 - 2 * tau:.6f}")
    return report

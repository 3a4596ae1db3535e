"""Max-flow/min-cut and integral min-cost circulation primitives.

Both solvers work on rational or float data: augmentation arithmetic only
adds, subtracts and compares capacities, so integral (or Fraction) inputs
yield integral (or exact) flows.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .instance import ArcVector, Cut

_RESIDUAL_EPS = 1e-12


@dataclass
class FlowNetwork:
    """Capacitated digraph; parallel arcs are allowed.

    ``arcs`` entries are (tail, head, capacity) or (tail, head, capacity, cost);
    costs are ignored by :func:`max_flow`.
    """

    n: int
    arcs: list[tuple]
    source: int
    sink: int

    def __post_init__(self):
        for a in self.arcs:
            if a[2] < 0:
                raise ValueError(f"negative capacity on arc {a}")


def _residual_eps(values) -> float:
    return _RESIDUAL_EPS if any(isinstance(v, float) for v in values) else 0


def max_flow(net: FlowNetwork) -> tuple[float, Cut]:
    """Edmonds-Karp maximum flow.

    Returns the flow value and the source-side minimum cut certificate
    (vertices reachable from the source in the final residual graph).
    If the sink is unreachable the value is 0 and the cut is the reachable set.
    """
    n = net.n
    heads: list[int] = []
    caps: list = []
    adj: list[list[int]] = [[] for _ in range(n)]

    def add_edge(u, v, cap):
        adj[u].append(len(heads))
        heads.append(v)
        caps.append(cap)
        adj[v].append(len(heads))
        heads.append(u)
        caps.append(0 * cap)

    for a in net.arcs:
        u, v, cap = a[0], a[1], a[2]
        add_edge(u, v, cap)
    eps = _residual_eps(caps)

    value = 0
    while True:
        parent_edge = [-1] * n
        parent_edge[net.source] = -2
        queue = deque([net.source])
        while queue:
            u = queue.popleft()
            if u == net.sink:
                break
            for e in adj[u]:
                v = heads[e]
                if parent_edge[v] == -1 and caps[e] > eps:
                    parent_edge[v] = e
                    queue.append(v)
        if parent_edge[net.sink] == -1:
            break
        bottleneck = None
        v = net.sink
        while v != net.source:
            e = parent_edge[v]
            bottleneck = caps[e] if bottleneck is None else min(bottleneck, caps[e])
            v = heads[e ^ 1]
        v = net.sink
        while v != net.source:
            e = parent_edge[v]
            caps[e] -= bottleneck
            caps[e ^ 1] += bottleneck
            v = heads[e ^ 1]
        value += bottleneck

    reachable = 1 << net.source
    queue = deque([net.source])
    seen = [False] * n
    seen[net.source] = True
    while queue:
        u = queue.popleft()
        for e in adj[u]:
            v = heads[e]
            if not seen[v] and caps[e] > eps:
                seen[v] = True
                reachable |= 1 << v
                queue.append(v)
    # Termination guarantees the sink is residual-unreachable, so the
    # reachable set is a proper subset certifying the minimum cut.
    return value, Cut(reachable, n)


@dataclass
class CirculationProblem:
    """Circulation bounds: arcs are (tail, head, lower, upper, cost)."""

    n: int
    arcs: list[tuple]

    def __post_init__(self):
        for u, v, lo, up, cost in self.arcs:
            if lo < 0 or up < lo:
                raise ValueError(f"need 0 <= lower <= upper on arc ({u},{v})")
            if cost < 0:
                raise ValueError("negative arc costs are not supported")


@dataclass
class Infeasible:
    """Hoffman's condition fails; carries a violating cut when one was searched."""

    violating_cut: Optional[Cut]
    deficit: float


def _violating_cut(prob: CirculationProblem) -> Optional[Cut]:
    if prob.n > 20:
        return None
    for mask in range(1, (1 << prob.n) - 1):
        lo_out = sum(lo for u, v, lo, up, c in prob.arcs
                     if (mask >> u) & 1 and not (mask >> v) & 1)
        up_in = sum(up for u, v, lo, up, c in prob.arcs
                    if not (mask >> u) & 1 and (mask >> v) & 1)
        if lo_out > up_in:
            return Cut(mask, prob.n)
    return None


def min_cost_circulation(prob: CirculationProblem) -> ArcVector | Infeasible:
    """Minimum-cost circulation within [lower, upper] bounds.

    Reduction to a min-cost flow: f = lower + g, residual capacities
    upper - lower, vertex imbalances routed through a super source/sink,
    then successive shortest augmenting paths (Bellman-Ford, since residual
    arcs carry negated costs).  Integral bounds give an integral circulation.
    Parallel arcs are aggregated in the returned ArcVector.
    """
    n = prob.n
    source, sink = n, n + 1
    heads: list[int] = []
    caps: list = []
    costs: list = []
    adj: list[list[int]] = [[] for _ in range(n + 2)]

    def add_edge(u, v, cap, cost):
        adj[u].append(len(heads))
        heads.append(v)
        caps.append(cap)
        costs.append(cost)
        adj[v].append(len(heads))
        heads.append(u)
        caps.append(0 * cap)
        costs.append(-cost)

    excess = [0] * n
    for u, v, lo, up, cost in prob.arcs:
        add_edge(u, v, up - lo, cost)
        excess[v] += lo
        excess[u] -= lo
    need = 0
    for v in range(n):
        if excess[v] > 0:
            add_edge(source, v, excess[v], 0)
            need += excess[v]
        elif excess[v] < 0:
            add_edge(v, sink, -excess[v], 0)
    eps = _residual_eps(caps)

    pushed = 0
    while pushed < need:
        # Bellman-Ford shortest path in the residual graph.
        dist = [None] * (n + 2)
        parent_edge = [-1] * (n + 2)
        dist[source] = 0
        for _ in range(n + 2):
            changed = False
            for u in range(n + 2):
                if dist[u] is None:
                    continue
                for e in adj[u]:
                    if caps[e] > eps:
                        v = heads[e]
                        nd = dist[u] + costs[e]
                        if dist[v] is None or nd < dist[v]:
                            dist[v] = nd
                            parent_edge[v] = e
                            changed = True
            if not changed:
                break
        if dist[sink] is None:
            return Infeasible(_violating_cut(prob), need - pushed)
        bottleneck = need - pushed
        v = sink
        while v != source:
            e = parent_edge[v]
            bottleneck = min(bottleneck, caps[e])
            v = heads[e ^ 1]
        v = sink
        while v != source:
            e = parent_edge[v]
            caps[e] -= bottleneck
            caps[e ^ 1] += bottleneck
            v = heads[e ^ 1]
        pushed += bottleneck

    flow: dict[tuple[int, int], float] = {}
    for i, (u, v, lo, up, cost) in enumerate(prob.arcs):
        g = caps[2 * i + 1]  # reverse residual = flow pushed on arc i
        f = lo + g
        if f != 0:
            flow[(u, v)] = flow.get((u, v), 0) + f
    return ArcVector(flow)

"""Pure-Python kernel implementations.

These are the reference semantics for the compiled core: every loop,
tie-break and random draw must match _core.pyx exactly so that the two
backends are interchangeable bit for bit.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


class SplitMix64:
    """Seedable portable 64-bit generator (splitmix64)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_double(self) -> float:
        return (self.next_u64() >> 11) * _INV_2_53


def splitmix64_stream(seed: int, count: int) -> list[int]:
    rng = SplitMix64(seed)
    return [rng.next_u64() for _ in range(count)]


def held_karp_path(cost, n: int, s: int, t: int):
    """Minimum-cost Hamiltonian s-t path by subset DP over interior vertices.

    Returns (cost, path, states_expanded).  States are keyed by
    (interior subset, last interior vertex); s is implicit, t is the final hop.
    """
    c = [[float(cost[i][j]) for j in range(n)] for i in range(n)]
    interior = [v for v in range(n) if v != s and v != t]
    k = len(interior)
    if k == 0:
        return c[s][t], [s, t], 1
    size = 1 << k
    inf = float("inf")
    dp = [inf] * (size * k)
    par = [-1] * (size * k)
    states = 0
    for j in range(k):
        dp[(1 << j) * k + j] = c[s][interior[j]]
        states += 1
    for mask in range(1, size):
        if mask & (mask - 1) == 0:
            continue
        base = mask * k
        for j in range(k):
            if not (mask >> j) & 1:
                continue
            prev = mask ^ (1 << j)
            pbase = prev * k
            best = inf
            arg = -1
            for i in range(k):
                if (prev >> i) & 1:
                    cand = dp[pbase + i] + c[interior[i]][interior[j]]
                    if cand < best:
                        best = cand
                        arg = i
            dp[base + j] = best
            par[base + j] = arg
            states += 1
    full = size - 1
    best = inf
    arg = -1
    for j in range(k):
        cand = dp[full * k + j] + c[interior[j]][t]
        if cand < best:
            best = cand
            arg = j
    path = [t]
    mask, j = full, arg
    while j >= 0:
        path.append(interior[j])
        nj = par[mask * k + j]
        mask ^= 1 << j
        j = nj
    path.append(s)
    path.reverse()
    return best, path, states


def partition_min_excess(within, q: int):
    """Minimum over partitions (>= 2 parts) of crossing mass minus (parts - 1).

    ``within[mask]`` is the weight of edges with both ends inside ``mask``
    (subsets of the q ground elements).  Returns (min excess, labels) where
    labels assigns each element its part in the canonical minimizer.
    """
    total = float(within[(1 << q) - 1])
    best = [float("inf")]
    labels = [0] * q
    best_labels = [0] * q
    parts = [0] * q

    def rec(i: int, nparts: int, inside: float):
        if i == q:
            if nparts >= 2:
                excess = (total - inside) - (nparts - 1)
                if excess < best[0]:
                    best[0] = excess
                    best_labels[:] = labels
            return
        bit = 1 << i
        for p in range(nparts):
            old = parts[p]
            parts[p] = old | bit
            labels[i] = p
            rec(i + 1, nparts, inside - float(within[old]) + float(within[parts[p]]))
            parts[p] = old
        parts[nparts] = bit
        labels[i] = nparts
        rec(i + 1, nparts + 1, inside + float(within[bit]))

    rec(0, 0, 0.0)
    return best[0], list(best_labels)


def _tree_path(arcs: list[int], n: int, p: int, q: int) -> list[int]:
    """Arc ids along the unique undirected path p..q in a tree, in walk order."""
    adj: dict[int, list[tuple[int, int]]] = {}
    for a in arcs:
        u, v = divmod(a, n)
        adj.setdefault(u, []).append((v, a))
        adj.setdefault(v, []).append((u, a))
    parent = {p: (-1, -1)}
    stack = [p]
    while stack:
        u = stack.pop()
        if u == q:
            break
        for v, a in adj.get(u, ()):
            if v not in parent:
                parent[v] = (u, a)
                stack.append(v)
    edges = []
    v = q
    while v != p:
        u, a = parent[v]
        edges.append(a)
        v = u
    edges.reverse()
    return edges


def _component_from(arcs: list[int], n: int, root: int, skip: int) -> set[int]:
    adj: dict[int, list[int]] = {}
    for a in arcs:
        if a == skip:
            continue
        u, v = divmod(a, n)
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    seen = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for v in adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def swap_round(n: int, arcs_flat, offsets, weights, seed: int) -> list[int]:
    """Merge a convex combination of arc trees into one random tree.

    Terms are folded pairwise; each fold repeatedly takes the smallest arc
    in the accumulated tree missing from the next term, locates its exchange
    partner on the tree path between its endpoints, and keeps one side with
    probability proportional to accumulated weight.  Marginals are preserved
    and edges are negatively correlated.  Arc ids are u*n + v.
    """
    rng = SplitMix64(seed)
    nterms = len(offsets) - 1
    acc = set(int(a) for a in arcs_flat[offsets[0]:offsets[1]])
    w_acc = float(weights[0])
    for idx in range(1, nterms):
        other = set(int(a) for a in arcs_flat[offsets[idx]:offsets[idx + 1]])
        w_oth = float(weights[idx])
        while True:
            diff = [a for a in acc if a not in other]
            if not diff:
                break
            e = min(diff)
            p, q = divmod(e, n)
            path = _tree_path(sorted(other), n, p, q)
            side = _component_from(sorted(acc), n, p, e)
            j = -1
            u = p
            for a in path:
                x, y = divmod(a, n)
                v = y if x == u else x
                if (u in side) != (v in side):
                    j = a
                    break
                u = v
            coin = rng.next_double()
            if coin < w_acc / (w_acc + w_oth):
                other.discard(j)
                other.add(e)
            else:
                acc.discard(e)
                acc.add(j)
        w_acc += w_oth
    return sorted(acc)

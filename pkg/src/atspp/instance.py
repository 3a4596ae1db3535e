"""Problem instances: directed metrics with endpoints, text format, generators.

The instance text format is line oriented:

    atspp 1
    n <count>
    s <index>
    t <index>
    <n rows of n space-separated costs, row = tail vertex>

Lines starting with ``#`` are comments and may appear anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

_TRIANGLE_CHECK_LIMIT = 200
_EPS = 1e-9


class InstanceError(ValueError):
    """Malformed instance text or invalid instance data."""


class MetricError(InstanceError):
    """Triangle inequality violated."""


class UnreachableError(InstanceError):
    """The sink cannot be reached from the source in a partial digraph."""


@dataclass(frozen=True, eq=False)
class DirectedMetric:
    """Complete asymmetric metric on n vertices with endpoints s != t.

    ``cost`` is an n x n matrix of nonnegative finite costs with zero
    diagonal satisfying cost[u][w] <= cost[u][v] + cost[v][w].
    Instances are immutable and safe to share across workers.
    """

    n: int
    cost: np.ndarray
    s: int
    t: int
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        c = np.array(self.cost, dtype=float)
        if c.shape != (self.n, self.n):
            raise InstanceError(f"cost matrix shape {c.shape} does not match n={self.n}")
        if not np.all(np.isfinite(c)):
            raise InstanceError("costs must be finite")
        if np.any(c < 0):
            raise InstanceError("negative cost")
        if np.any(np.diag(c) != 0):
            raise InstanceError("diagonal costs must be zero")
        if not (0 <= self.s < self.n and 0 <= self.t < self.n):
            raise InstanceError("s/t out of range")
        if self.s == self.t:
            raise InstanceError("s == t")
        if self.names is not None and len(self.names) != self.n:
            raise InstanceError("names length mismatch")
        if self.n <= _TRIANGLE_CHECK_LIMIT:
            _check_triangle(c)
        c.setflags(write=False)
        object.__setattr__(self, "cost", c)

    def c(self, u: int, v: int) -> float:
        return float(self.cost[u, v])

    def path_cost(self, path: Sequence[int]) -> float:
        return float(sum(self.cost[u, v] for u, v in zip(path, path[1:])))

    def name_of(self, v: int) -> str:
        return self.names[v] if self.names else str(v)

    def interior(self) -> list[int]:
        return [v for v in range(self.n) if v != self.s and v != self.t]


def _check_triangle(c: np.ndarray) -> None:
    via = np.min(c[:, :, None] + c[None, :, :], axis=1)
    bad = c > via + _EPS
    if np.any(bad):
        u, w = np.argwhere(bad)[0]
        v = int(np.argmin(c[u, :] + c[:, w]))
        raise MetricError(
            f"triangle inequality violated: cost[{u}][{w}]={c[u, w]} > "
            f"cost[{u}][{v}]+cost[{v}][{w}]={c[u, v] + c[v, w]}"
        )


@dataclass
class ArcVector:
    """Sparse nonnegative weights on directed arcs (u, v), u != v.

    Absent arcs weigh zero.  Holds LP points, rerouted vectors,
    circulation bounds and circulations alike.
    """

    entries: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (u, v), w in self.entries.items():
            if u == v:
                raise ValueError(f"self-loop arc ({u},{v})")
            if w < -1e-9:
                raise ValueError(f"negative arc value {w} on ({u},{v})")
            clean[(int(u), int(v))] = max(0.0, w) if isinstance(w, float) else w
        self.entries = clean

    def get(self, u: int, v: int):
        return self.entries.get((u, v), 0)

    def __getitem__(self, arc: tuple[int, int]):
        return self.entries.get(arc, 0)

    def items(self):
        return sorted(self.entries.items())

    def support(self) -> list[tuple[int, int]]:
        return sorted(a for a, w in self.entries.items() if w > 0)

    def total(self):
        return sum(self.entries.values())

    def mass(self, arcs: Iterable[tuple[int, int]]):
        return sum(self.entries.get(a, 0) for a in arcs)

    def out_of(self, mask: int):
        """Total weight of arcs leaving the vertex set encoded by ``mask``."""
        return sum(w for (u, v), w in self.entries.items()
                   if (mask >> u) & 1 and not (mask >> v) & 1)

    def into(self, mask: int):
        """Total weight of arcs entering the vertex set encoded by ``mask``."""
        return sum(w for (u, v), w in self.entries.items()
                   if not (mask >> u) & 1 and (mask >> v) & 1)

    def dot_cost(self, cost: np.ndarray):
        return sum(w * cost[u, v] for (u, v), w in self.entries.items())

    def copy(self) -> "ArcVector":
        return ArcVector(dict(self.entries))


@dataclass(frozen=True)
class Cut:
    """Nonempty proper vertex subset, stored as a bitmask over n vertices."""

    mask: int
    n: int

    def __post_init__(self):
        full = (1 << self.n) - 1
        if not 0 < self.mask < full:
            raise ValueError("cut must be a nonempty proper subset")

    def members(self) -> list[int]:
        return [v for v in range(self.n) if (self.mask >> v) & 1]

    def contains(self, v: int) -> bool:
        return bool((self.mask >> v) & 1)

    def complement(self) -> "Cut":
        return Cut(((1 << self.n) - 1) ^ self.mask, self.n)

    def __len__(self) -> int:
        return self.mask.bit_count()


def parse_instance(text: str, require_metric: bool = True) -> DirectedMetric:
    """Parse the instance text format into a DirectedMetric.

    With ``require_metric=False`` the triangle inequality is not enforced
    (the caller is expected to run :func:`metric_completion`).
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if len(lines) < 4:
        raise InstanceError("malformed header: need 'atspp 1', n, s and t lines")
    if lines[0].split() != ["atspp", "1"]:
        raise InstanceError(f"malformed header: expected 'atspp 1', got {lines[0]!r}")

    def keyed_int(line: str, key: str) -> int:
        parts = line.split()
        if len(parts) != 2 or parts[0] != key:
            raise InstanceError(f"malformed header: expected '{key} <int>', got {line!r}")
        try:
            return int(parts[1])
        except ValueError:
            raise InstanceError(f"malformed header: bad integer in {line!r}") from None

    n = keyed_int(lines[1], "n")
    s = keyed_int(lines[2], "s")
    t = keyed_int(lines[3], "t")
    if n < 2:
        raise InstanceError("n must be at least 2")
    rows = lines[4:]
    if len(rows) != n:
        raise InstanceError(f"expected {n} cost rows, got {len(rows)}")
    cost = np.zeros((n, n))
    for i, row in enumerate(rows):
        parts = row.split()
        if len(parts) != n:
            raise InstanceError(f"row length: row {i} has {len(parts)} entries, expected {n}")
        try:
            cost[i] = [float(p) for p in parts]
        except ValueError:
            raise InstanceError(f"bad cost value in row {i}") from None
    if np.any(cost < 0):
        raise InstanceError("negative cost")
    if require_metric:
        return DirectedMetric(n, cost, s, t)
    # Bypass only the triangle check; keep every structural check.
    if np.any(np.diag(cost) != 0):
        raise InstanceError("diagonal costs must be zero")
    if s == t:
        raise InstanceError("s == t")
    if not (0 <= s < n and 0 <= t < n):
        raise InstanceError("s/t out of range")
    met = object.__new__(DirectedMetric)
    cost.setflags(write=False)
    for name, value in (("n", n), ("cost", cost), ("s", s), ("t", t), ("names", None)):
        object.__setattr__(met, name, value)
    return met


def format_instance(met: DirectedMetric) -> str:
    """Render a DirectedMetric in the instance text format (round-trips exactly)."""
    out = ["atspp 1", f"n {met.n}", f"s {met.s}", f"t {met.t}"]
    for i in range(met.n):
        out.append(" ".join(str(float(v)) for v in met.cost[i]))
    return "\n".join(out) + "\n"


def metric_completion(
    n: int,
    arcs: Mapping[tuple[int, int], float] | Iterable[tuple[int, int, float]],
    s: int,
    t: int,
    names: Sequence[str] | None = None,
) -> DirectedMetric:
    """Shortest-path closure of a partial digraph into a complete metric.

    Unreachable pairs are priced at BIG = n * max(given cost) + 1, which
    exceeds every finite shortest-path distance, so BIG entries never
    undercut a finite triangle sum.
    """
    if isinstance(arcs, Mapping):
        triples = [(u, v, c) for (u, v), c in arcs.items()]
    else:
        triples = [(u, v, c) for u, v, c in arcs]
    w = np.full((n, n), np.inf)
    np.fill_diagonal(w, 0.0)
    max_given = 0.0
    for u, v, c in triples:
        if u == v:
            raise InstanceError("self-loop arc in partial digraph")
        if c < 0 or not np.isfinite(c):
            raise InstanceError("arc costs must be finite and nonnegative")
        w[u, v] = min(w[u, v], c)
        max_given = max(max_given, c)
    for k in range(n):
        w = np.minimum(w, w[:, k, None] + w[None, k, :])
    if not np.isfinite(w[s, t]):
        raise UnreachableError("t unreachable from s")
    big = n * max_given + 1.0
    w[~np.isfinite(w)] = big
    return DirectedMetric(n, w, s, t, tuple(names) if names else None)


def gap_instance(r: int) -> tuple[DirectedMetric, ArcVector]:
    """Worst-case family: two directed chains of length r with free cross arcs.

    Returns the metric completion (n = 2r + 2, s = 0, t = n - 1) together
    with the half-integral point putting 1/2 on every original arc.  The
    point is LP feasible with cost r + 1, while the best Hamiltonian s-t
    path costs 2r - 1, so the gap approaches 2.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    s = 0
    t = 2 * r + 1
    u = lambda i: i          # u_1..u_r -> 1..r
    v = lambda i: r + i      # v_1..v_r -> r+1..2r
    arcs: dict[tuple[int, int], float] = {
        (s, u(1)): 1.0,
        (s, v(1)): 1.0,
        (u(r), t): 1.0,
        (v(r), t): 1.0,
        (u(1), v(r)): 0.0,
        (v(1), u(r)): 0.0,
    }
    for i in range(1, r):
        arcs[(u(i + 1), u(i))] = 1.0
        arcs[(v(i + 1), v(i))] = 1.0
        arcs[(u(i), u(i + 1))] = 0.0
        arcs[(v(i), v(i + 1))] = 0.0
    names = ["s"] + [f"u{i}" for i in range(1, r + 1)] + [f"v{i}" for i in range(1, r + 1)] + ["t"]
    met = metric_completion(2 * r + 2, arcs, s, t, names)
    x = ArcVector({a: 0.5 for a in arcs})
    return met, x


def random_instance(n: int, seed: int, model: str = "closure") -> DirectedMetric:
    """Deterministic random instance, s = 0 and t = n - 1.

    ``closure``: uniform random arc costs run through the shortest-path
    closure.  ``euclidean``: planar Euclidean distances skewed by a
    potential on the x coordinate, which keeps the triangle inequality
    exact while making the metric asymmetric.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = np.random.default_rng(seed)
    if model in ("closure", "shortest-path-closure"):
        # Random arcs over a spine: a random s..t permutation path keeps t
        # reachable, extra small-integer-cost arcs add shortcut structure,
        # and the shortest-path closure restores the triangle inequality.
        perm = [0] + [int(v) for v in rng.permutation(np.arange(1, n - 1))] + [n - 1]
        arcs: dict[tuple[int, int], float] = {}
        for a, b in zip(perm, perm[1:]):
            arcs[(a, b)] = float(rng.integers(1, 4))
        for _ in range(3 * n):
            u, v = (int(w) for w in rng.integers(0, n, 2))
            if u != v and (u, v) not in arcs:
                arcs[(u, v)] = float(rng.integers(1, 4))
        return metric_completion(n, arcs, 0, n - 1)
    if model in ("euclidean", "euclidean-perturbed"):
        pts = rng.uniform(0.0, 10.0, size=(n, 2))
        gamma = rng.uniform(0.2, 0.8)
        diff = pts[None, :, :] - pts[:, None, :]
        dist = np.sqrt((diff ** 2).sum(axis=2))
        skew = gamma * (pts[None, :, 0] - pts[:, None, 0])
        cost = dist + skew
        np.fill_diagonal(cost, 0.0)
        cost = np.maximum(cost, 0.0)
        return DirectedMetric(n, cost, 0, n - 1)
    raise ValueError(f"unknown model {model!r}")

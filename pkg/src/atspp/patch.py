"""Patching a sampled tree into a Hamiltonian s-t path.

The sampled arcs get lower bound 1 (as does the return arc t->s, which is
also capped at 1); a minimum-cost integral circulation balances every
vertex, the Eulerian circuit is rotated to start with the return arc, the
arc is dropped, and the remaining s-t walk is shortcut past repeats.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np

from . import cutspace
from .flows import CirculationProblem, Infeasible, min_cost_circulation
from .instance import ArcVector, Cut, DirectedMetric
from .lp import solve_subtour_lp
from .narrowcuts import NarrowCutChain, find_narrow_cuts
from .retree import build_z, decompose_trees, verify_z
from .sampler import SampleConfig, Draw, cost_of, draw_until_good


@dataclass
class WalkResult:
    """Hamiltonian s-t path with its cost chain certificates."""

    path: list[int]
    cost: float
    circulation_cost: float
    tree_cost: float = float("nan")
    lp_value: float = float("nan")

    @property
    def ratio(self) -> float:
        return self.cost / self.lp_value

    def validate(self, inst: DirectedMetric) -> None:
        if self.path[0] != inst.s or self.path[-1] != inst.t:
            raise ValueError("path endpoints are not s and t")
        if sorted(self.path) != list(range(inst.n)):
            raise ValueError("path is not a permutation of the vertices")
        recomputed = inst.path_cost(self.path)
        if abs(recomputed - self.cost) > 1e-6:
            raise ValueError(f"stored cost {self.cost} != recomputed {recomputed}")
        ts = inst.c(inst.t, inst.s)
        if self.cost > self.circulation_cost - ts + 1e-9:
            raise ValueError("shortcutting increased the cost")


def hoffman_bounds(arcs, x: ArcVector, inst: DirectedMetric,
                   cfg: SampleConfig) -> tuple[ArcVector, ArcVector]:
    """Lower/upper circulation bounds certifying feasibility.

    lower = 1 on sampled arcs and on t->s; upper = 1 on t->s,
    1 + (1 + 1/tau) alpha x on sampled arcs, (1 + 1/tau) alpha x elsewhere.
    The fractional upper vector exists only to witness feasibility; the
    solved circulation relaxes it to keep integrality.
    """
    t, s = inst.t, inst.s
    arc_set = set(arcs)
    scale = (1.0 + 1.0 / cfg.tau) * cfg.alpha
    lower = {a: 1.0 for a in arc_set}
    lower[(t, s)] = 1.0
    upper: dict[tuple[int, int], float] = {}
    for a, w in x.items():
        if w > 0:
            upper[a] = scale * w
    for a in arc_set:
        upper[a] = 1.0 + scale * x[a]
    upper[(t, s)] = 1.0
    return ArcVector(lower), ArcVector(upper)


@dataclass
class HoffmanReport:
    """Cut-by-cut audit of lower(out(U)) <= upper(in(U)), split into the
    narrow, non-narrow s-t, t-s and non-separating cases."""

    case_minima: dict[str, float]
    case_counts: dict[str, int]
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        out = []
        for case in ("narrow", "st", "ts", "nonseparating"):
            if self.case_counts.get(case):
                out.append(f"{case}: {self.case_counts[case]} cuts, "
                           f"min slack {self.case_minima[case]:.6f}")
        out.extend(f"VIOLATION: {v}" for v in self.violations)
        return out


def verify_hoffman(lower: ArcVector, upper: ArcVector, inst: DirectedMetric,
                   chain: NarrowCutChain, tol: float = 1e-9) -> HoffmanReport:
    """Exhaustively check the circulation feasibility condition (n <= 20)."""
    n, s, t = inst.n, inst.s, inst.t
    if n > 20:
        raise ValueError("exhaustive verification needs n <= 20")
    masks = cutspace.all_proper_masks(n)
    lo_out = cutspace.out_mass(masks, lower.entries)
    up_in = cutspace.in_mass(masks, upper.entries)
    slack = up_in - lo_out

    s_in = ((masks >> s) & 1).astype(bool)
    t_in = ((masks >> t) & 1).astype(bool)
    narrow = np.zeros(len(masks), dtype=bool)
    offset = 1  # masks[i] == i + 1
    for cut in chain.cuts:
        narrow[cut.mask - offset] = True
    case = np.full(len(masks), "nonseparating", dtype=object)
    case[s_in & ~t_in] = "st"
    case[(s_in & ~t_in) & narrow] = "narrow"
    case[~s_in & t_in] = "ts"

    minima, counts = {}, {}
    for name in ("narrow", "st", "ts", "nonseparating"):
        sel = case == name
        counts[name] = int(sel.sum())
        minima[name] = float(slack[sel].min()) if counts[name] else float("inf")
    report = HoffmanReport(minima, counts)
    bad = np.nonzero(slack < -tol)[0]
    for i in bad[:5]:
        members = Cut(int(masks[i]), n).members()
        report.violations.append(
            f"cut {members}: lower(out) {lo_out[i]:.6f} > upper(in) {up_in[i]:.6f}")
    return report


def augment_to_eulerian(arcs, inst: DirectedMetric,
                        cfg: SampleConfig) -> tuple[Counter, float]:
    """Cheapest integral circulation covering the sampled arcs plus t->s once.

    Upper bounds are relaxed everywhere except the unit cap on t->s; the
    cap keeps the return arc unique and the relaxation can only lower the
    cost.  Returns the Eulerian arc multiset and its cost.
    """
    n, s, t = inst.n, inst.s, inst.t
    arc_set = set(arcs)
    if (t, s) in arc_set:
        raise ValueError("sampled arcs must not contain the return arc")
    u_cap = len(arc_set) + 1 + n + 1
    problem_arcs = []
    for u in range(n):
        for v in range(n):
            if u == v:
                continue
            if (u, v) == (t, s):
                problem_arcs.append((u, v, 1, 1, float(inst.cost[u, v])))
            elif (u, v) in arc_set:
                problem_arcs.append((u, v, 1, u_cap, float(inst.cost[u, v])))
            else:
                problem_arcs.append((u, v, 0, u_cap, float(inst.cost[u, v])))
    result = min_cost_circulation(CirculationProblem(n, problem_arcs))
    if isinstance(result, Infeasible):
        raise RuntimeError("circulation infeasible despite a weakly connected tree; "
                           "this indicates an upstream invariant break")
    multi = Counter()
    for (u, v), f in result.items():
        count = math.floor(f + 0.5)
        if abs(f - count) > 1e-9:
            raise RuntimeError(f"circulation is not integral on ({u},{v}): {f}")
        if count:
            multi[(u, v)] = count
    if multi[(t, s)] != 1:
        raise RuntimeError("return arc multiplicity != 1")
    degree_error = _balance_error(multi, n)
    if degree_error:
        raise RuntimeError(f"circulation unbalanced at vertex {degree_error}")
    circulation_cost = float(sum(inst.cost[u, v] * c for (u, v), c in multi.items()))
    return multi, circulation_cost


def _balance_error(multi: Counter, n: int):
    ins = [0] * n
    outs = [0] * n
    for (u, v), c in multi.items():
        outs[u] += c
        ins[v] += c
    for v in range(n):
        if ins[v] != outs[v]:
            return v
    return None


def extract_path(multi: Counter, inst: DirectedMetric) -> WalkResult:
    """Eulerian circuit of the multiset, rotated to start with t->s; dropping
    that arc leaves an s-t walk covering every vertex, which is shortcut to
    a Hamiltonian path by keeping first visits (t deferred to the end)."""
    n, s, t = inst.n, inst.s, inst.t
    if multi[(t, s)] != 1:
        raise ValueError("multiset must contain t->s exactly once")
    if _balance_error(multi, n) is not None:
        raise ValueError("multiset is not Eulerian")

    succ: dict[int, list[int]] = {v: [] for v in range(n)}
    for (u, v), c in sorted(multi.items()):
        succ[u].extend([v] * c)
    touched = set()
    undirected: dict[int, set[int]] = {v: set() for v in range(n)}
    for (u, v) in multi:
        touched.update((u, v))
        undirected[u].add(v)
        undirected[v].add(u)
    if touched != set(range(n)):
        raise ValueError("multiset does not touch every vertex")
    seen = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for v in undirected[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    if seen != set(range(n)):
        raise ValueError("multiset is not weakly connected")

    # Hierholzer, starting at t so the unique t->s arc can lead the circuit.
    iters = {u: iter(lst) for u, lst in succ.items()}
    remaining = {u: len(lst) for u, lst in succ.items()}
    stack = [t]
    circuit: list[int] = []
    while stack:
        u = stack[-1]
        if remaining[u]:
            v = next(iters[u])
            remaining[u] -= 1
            stack.append(v)
        else:
            circuit.append(stack.pop())
    circuit.reverse()  # vertex sequence t ... t

    # Rotate the closed circuit so it traverses t->s first.
    idx = None
    for i in range(len(circuit) - 1):
        if circuit[i] == t and circuit[i + 1] == s:
            idx = i
            break
    if idx is None:
        raise ValueError("circuit never traverses t->s")
    walk = circuit[idx + 1:-1] + circuit[:idx + 1]  # s ... t, t->s dropped

    path = []
    visited = set()
    for v in walk:
        if v not in visited and v != t:
            visited.add(v)
            path.append(v)
    path.append(t)
    cost = inst.path_cost(path)
    circulation_cost = float(sum(inst.cost[u, v] * c for (u, v), c in multi.items()))
    return WalkResult(path, cost, circulation_cost)


@dataclass
class RoundReport:
    """End-to-end rounding outcome with per-stage certificates."""

    walk: WalkResult
    tau: float
    seed: int
    chain_cuts: list[list[int]]
    term_count: int
    z_dominance_excess: float
    z_boundary_residual: float
    alpha: float
    alpha_obs: float
    tries: int
    lp_iterations: int

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "n": len(self.walk.path),
            "tau": self.tau,
            "seed": self.seed,
            "lp_value": self.walk.lp_value,
            "path": self.walk.path,
            "path_cost": self.walk.cost,
            "ratio": self.walk.ratio,
            "tree_cost": self.walk.tree_cost,
            "circulation_cost": self.walk.circulation_cost,
            "chain": self.chain_cuts,
            "combination_terms": self.term_count,
            "z_dominance_excess": self.z_dominance_excess,
            "z_boundary_residual": self.z_boundary_residual,
            "alpha": self.alpha,
            "alpha_obs": self.alpha_obs,
            "tries": self.tries,
            "lp_iterations": self.lp_iterations,
        }


def round(inst: DirectedMetric, tau: float = 0.25, seed: int = 0,
          max_tries: int = 64, tol: float = 1e-7) -> RoundReport:
    """Full pipeline: LP, narrow cuts, reroute, sample, patch, shortcut.

    The final cost is certified to lie between the LP value and
    (3/(1-3 tau) + (1 + 1/tau) alpha) times the LP value.
    """
    lp = solve_subtour_lp(inst, tol)
    chain = find_narrow_cuts(lp.x, inst.n, inst.s, inst.t, tau, tol)
    zv = build_z(lp.x, chain)
    comb = decompose_trees(zv)
    zreport = verify_z(zv, lp.x, comb)
    if not zreport.ok:
        raise RuntimeError("rerouted vector failed verification: "
                           + "; ".join(zreport.violations))
    cfg = SampleConfig(seed=seed, tau=tau, n=inst.n)
    draw = draw_until_good(comb, lp.x, inst, cfg, max_tries, chain=chain)
    multi, circulation_cost = augment_to_eulerian(draw.arcs, inst, cfg)
    walk = extract_path(multi, inst)
    walk.tree_cost = cost_of(draw.arcs, inst)
    walk.lp_value = float(lp.value)

    bound = (3.0 / (1.0 - 3 * tau) + (1.0 + 1.0 / tau) * cfg.alpha) * walk.lp_value
    if walk.cost < walk.lp_value - max(tol, 1e-6):
        raise RuntimeError(f"path cost {walk.cost} below the LP value {walk.lp_value}")
    if walk.cost > bound + 1e-6:
        raise RuntimeError(f"path cost {walk.cost} exceeds the guarantee {bound}")
    walk.validate(inst)
    return RoundReport(
        walk=walk,
        tau=tau,
        seed=seed,
        chain_cuts=[c.members() for c in chain.cuts],
        term_count=zreport.term_count,
        z_dominance_excess=zreport.max_dominance_excess,
        z_boundary_residual=zreport.max_boundary_residual,
        alpha=cfg.alpha,
        alpha_obs=draw.alpha_obs,
        tries=draw.tries,
        lp_iterations=lp.iterations,
    )


round_instance = round

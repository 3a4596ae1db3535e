"""Subtour-elimination LP for s-t paths, solved by row generation.

The restricted master holds the degree equalities; violated cut rows
x(out(U)) >= 1 for s-containing proper subsets U are added lazily, found
by max-flow separation with the current x as capacities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import simplex
from .flows import FlowNetwork, max_flow
from .instance import ArcVector, Cut, DirectedMetric


class LpIterationLimit(RuntimeError):
    """Row generation hit its round cap; carries the last master solution."""

    def __init__(self, message, solution, violated_cut):
        super().__init__(message)
        self.solution = solution
        self.violated_cut = violated_cut


@dataclass
class LpSolution:
    x: ArcVector
    value: float
    active_cuts: list[Cut]
    iterations: int
    master_values: list = field(default_factory=list)


@dataclass
class FeasibilityReport:
    """Violations per constraint class, each with its worst witness."""

    violations: list[tuple[str, float, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, magnitude, detail: str):
        self.violations.append((kind, float(magnitude), detail))

    def lines(self) -> list[str]:
        if self.ok:
            return ["feasible: no violated constraints"]
        return [f"{kind}: {detail} (violation {mag:.3e})" for kind, mag, detail in self.violations]


def _variables(n: int, s: int, t: int) -> list[tuple[int, int]]:
    """LP variables: all arcs except those into s and out of t, which the
    degree constraints force to zero."""
    return [(u, v) for u in range(n) for v in range(n)
            if u != v and v != s and u != t]


def separate(inst: DirectedMetric, x: ArcVector, tol: float) -> Cut | None:
    """Most violated cut constraint, or None if all hold within tol.

    For every v != s, a max-flow with capacities x from s to v bounds the
    cheapest s-side cut excluding v; any value below 1 - tol certifies a
    violated subset.
    """
    n, s = inst.n, inst.s
    arcs = [(u, v, w) for (u, v), w in x.items() if w > 0]
    worst_value, worst_cut = None, None
    for v in range(n):
        if v == s:
            continue
        value, cut = max_flow(FlowNetwork(n, arcs, s, v))
        if worst_value is None or value < worst_value:
            worst_value, worst_cut = value, cut
    if worst_value is not None and worst_value < 1 - tol:
        return worst_cut
    return None


def check_feasible(inst: DirectedMetric, x: ArcVector, tol: float = 1e-7) -> FeasibilityReport:
    """Check x against every LP constraint class; cut constraints via separation."""
    n, s, t = inst.n, inst.s, inst.t
    report = FeasibilityReport()
    neg = [(a, w) for a, w in x.items() if w < -tol]
    if neg:
        a, w = min(neg, key=lambda e: e[1])
        report.add("negativity", -w, f"x{a} = {w}")

    outs = [0.0] * n
    ins = [0.0] * n
    for (u, v), w in x.items():
        outs[u] += w
        ins[v] += w

    def check_value(kind, got, want, detail):
        if abs(got - want) > tol:
            report.add(kind, abs(got - want), f"{detail}: {got} != {want}")

    worst = None
    for v in range(n):
        if v == s:
            check_value("source_out", outs[v], 1, "x(out(s))")
            check_value("source_in", ins[v], 0, "x(in(s))")
        elif v == t:
            check_value("sink_in", ins[v], 1, "x(in(t))")
            check_value("sink_out", outs[v], 0, "x(out(t))")
        else:
            d_out = abs(outs[v] - 1)
            d_in = abs(ins[v] - 1)
            if d_out > tol and (worst is None or d_out > worst[1]):
                worst = (v, d_out, "out")
            if d_in > tol and (worst is None or d_in > worst[1]):
                worst = (v, d_in, "in")
    if worst is not None:
        v, mag, side = worst
        report.add("degree", mag, f"x({side}({v})) off by {mag}")
        # Also count how many vertices are off, for the report text.
        bad = sum(1 for v in range(n) if v not in (s, t)
                  and (abs(outs[v] - 1) > tol or abs(ins[v] - 1) > tol))
        report.violations[-1] = ("degree", mag, f"{bad} interior vertices violate degree; worst off by {mag}")

    cut = separate(inst, x, tol)
    if cut is not None:
        report.add("cut", 1 - float(x.out_of(cut.mask)), f"x(out({cut.members()})) = {x.out_of(cut.mask)} < 1")
    return report


def solve_subtour_lp(inst: DirectedMetric, tol: float = 1e-7,
                     rational: bool = False, max_rounds: int = 200) -> LpSolution:
    """Optimal point of the subtour-elimination LP, within tol.

    The master is re-solved from scratch after each violated cut is added;
    master objectives are non-decreasing and separation returning None
    certifies feasibility of the final point.
    """
    if not (0 < tol <= 1e-4):
        raise ValueError("tol must be in (0, 1e-4]")
    n, s, t = inst.n, inst.s, inst.t
    variables = _variables(n, s, t)
    var_index = {a: i for i, a in enumerate(variables)}
    if rational:
        cost = [Fraction(float(inst.cost[u, v])) for u, v in variables]
    else:
        cost = [float(inst.cost[u, v]) for u, v in variables]

    a_eq: list[list[float]] = []
    b_eq: list[float] = []

    def degree_row(vertex, outgoing):
        row = [0.0] * len(variables)
        for (u, v), i in var_index.items():
            if (outgoing and u == vertex) or (not outgoing and v == vertex):
                row[i] = 1.0
        return row

    a_eq.append(degree_row(s, True))
    b_eq.append(1.0)
    a_eq.append(degree_row(t, False))
    b_eq.append(1.0)
    for v in range(n):
        if v in (s, t):
            continue
        a_eq.append(degree_row(v, True))
        b_eq.append(1.0)
        a_eq.append(degree_row(v, False))
        b_eq.append(1.0)

    cuts: list[Cut] = []
    a_ge: list[list[float]] = []
    b_ge: list[float] = []
    master_values = []
    for round_no in range(1, max_rounds + 1):
        res = simplex.solve_lp(cost, a_eq, b_eq, a_ge, b_ge, exact=rational)
        master_values.append(res.objective)
        if rational:
            entries = {a: res.x[i] for a, i in var_index.items() if res.x[i] != 0}
        else:
            entries = {a: res.x[i] for a, i in var_index.items() if res.x[i] > 1e-12}
        x = ArcVector(entries)
        solution = LpSolution(x, res.objective, list(cuts), round_no, master_values)
        violated = separate(inst, x, tol)
        if violated is None:
            return solution
        if any(violated.mask == c.mask for c in cuts):
            raise RuntimeError(f"separation returned an active cut {violated.members()}; "
                               "master tolerance too loose")
        cuts.append(violated)
        row = [0.0] * len(variables)
        for (u, v), i in var_index.items():
            if violated.contains(u) and not violated.contains(v):
                row[i] = 1.0
        a_ge.append(row)
        b_ge.append(1.0)
    raise LpIterationLimit(f"no convergence after {max_rounds} rounds", solution, violated)

"""Dense two-phase tableau simplex with Bland's rule.

Two interchangeable arithmetic backends: a numpy float path for the row
geometry that actually gets solved repeatedly, and an exact Fraction path
for rational certification on small instances.  Both return primal values,
the objective, and duals for every constraint row.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

_FLOAT_TOL = 1e-9


class SimplexError(RuntimeError):
    pass


class Unbounded(SimplexError):
    pass


class InfeasibleLP(SimplexError):
    pass


@dataclass
class LpResult:
    x: list
    objective: object
    dual_eq: list
    dual_ge: list
    dual_le: list
    iterations: int


def solve_lp(c, A_eq=(), b_eq=(), A_ge=(), b_ge=(), A_le=(), b_le=(),
             exact: bool = False, max_iter: int = 200000) -> LpResult:
    """Minimize c.x subject to A_eq x = b_eq, A_ge x >= b_ge, A_le x <= b_le, x >= 0."""
    rows = []
    kinds = []   # row kind after sign normalization
    flips = []   # +1/-1 multiplier applied to the original row
    origin = []  # (section, index) to map duals back
    for section, (A, b, kind) in enumerate(
        ((A_eq, b_eq, "eq"), (A_ge, b_ge, "ge"), (A_le, b_le, "le"))
    ):
        for i, (row, rhs) in enumerate(zip(A, b)):
            row = list(row)
            flip = 1
            k = kind
            if rhs < 0:
                row = [-v for v in row]
                rhs = -rhs
                flip = -1
                k = {"ge": "le", "le": "ge", "eq": "eq"}[kind]
            rows.append((row, rhs))
            kinds.append(k)
            flips.append(flip)
            origin.append((section, i))

    if exact:
        x, obj, duals, iters = _solve_exact(list(c), rows, kinds, max_iter)
    else:
        x, obj, duals, iters = _solve_float(list(c), rows, kinds, max_iter)

    dual_sections: list[list] = [[], [], []]
    for r, (section, _) in enumerate(origin):
        dual_sections[section].append(duals[r] * flips[r])
    return LpResult(x, obj, dual_sections[0], dual_sections[1], dual_sections[2], iters)


def _solve_float(c, rows, kinds, max_iter):
    m = len(rows)
    nvar = len(c)
    n_slack = sum(1 for k in kinds if k == "le")
    n_surp = sum(1 for k in kinds if k == "ge")
    n_art = sum(1 for k in kinds if k in ("eq", "ge"))
    ncols = nvar + n_slack + n_surp + n_art

    T = np.zeros((m + 1, ncols + 1))
    basis = np.empty(m, dtype=int)
    dual_col = np.empty(m, dtype=int)
    artificial = np.zeros(ncols, dtype=bool)
    s_at, g_at, a_at = nvar, nvar + n_slack, nvar + n_slack + n_surp
    for r, ((row, rhs), kind) in enumerate(zip(rows, kinds)):
        T[r, :nvar] = row
        T[r, ncols] = rhs
        if kind == "le":
            T[r, s_at] = 1.0
            basis[r] = s_at
            dual_col[r] = s_at
            s_at += 1
        else:
            if kind == "ge":
                T[r, g_at] = -1.0
                g_at += 1
            T[r, a_at] = 1.0
            basis[r] = a_at
            dual_col[r] = a_at
            artificial[a_at] = True
            a_at += 1

    iters = 0

    def pivot(r, j):
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T[...] -= np.outer(col, T[r])
        basis[r] = j

    def run(allow_artificial):
        nonlocal iters
        while True:
            obj = T[m, :ncols]
            candidates = np.nonzero(obj < -_FLOAT_TOL)[0]
            if not allow_artificial:
                candidates = candidates[~artificial[candidates]]
            if candidates.size == 0:
                return
            j = int(candidates[0])  # Bland: lowest index enters
            colv = T[:m, j]
            rowsel = np.nonzero(colv > _FLOAT_TOL)[0]
            if rowsel.size == 0:
                raise Unbounded("LP is unbounded")
            ratios = T[rowsel, ncols] / colv[rowsel]
            best = ratios.min()
            tied = rowsel[ratios <= best + _FLOAT_TOL]
            r = int(tied[np.argmin(basis[tied])])  # Bland: lowest basis index leaves
            pivot(r, j)
            iters += 1
            if iters > max_iter:
                raise SimplexError("simplex iteration limit exceeded")

    # Phase 1: minimize the sum of artificials.
    T[m, artificial.nonzero()[0]] = 1.0
    for r in range(m):
        if artificial[basis[r]]:
            T[m] -= T[r]
    run(allow_artificial=True)
    if -T[m, ncols] > 1e-7:
        raise InfeasibleLP(f"phase 1 optimum {-T[m, ncols]:.3e} > 0")
    for r in range(m):
        if artificial[basis[r]]:
            nz = np.nonzero(np.abs(T[r, :ncols]) > _FLOAT_TOL)[0]
            nz = nz[~artificial[nz]]
            if nz.size:
                pivot(r, int(nz[0]))

    # Phase 2: original objective.
    T[m, :] = 0.0
    T[m, :nvar] = c
    for r in range(m):
        if basis[r] < nvar:
            T[m] -= c[basis[r]] * T[r]
    run(allow_artificial=False)

    x = [0.0] * nvar
    for r in range(m):
        if basis[r] < nvar:
            x[basis[r]] = float(T[r, ncols])
    duals = [float(-T[m, dual_col[r]]) for r in range(m)]
    return x, float(-T[m, ncols]), duals, iters


def _solve_exact(c, rows, kinds, max_iter):
    c = [Fraction(v) for v in c]
    m = len(rows)
    nvar = len(c)
    n_slack = sum(1 for k in kinds if k == "le")
    n_surp = sum(1 for k in kinds if k == "ge")
    ncols = nvar + n_slack + n_surp + sum(1 for k in kinds if k in ("eq", "ge"))

    zero, one = Fraction(0), Fraction(1)
    T = [[zero] * (ncols + 1) for _ in range(m + 1)]
    basis = [0] * m
    dual_col = [0] * m
    artificial = [False] * ncols
    s_at, g_at = nvar, nvar + n_slack
    a_at = nvar + n_slack + n_surp
    for r, ((row, rhs), kind) in enumerate(zip(rows, kinds)):
        for j, v in enumerate(row):
            T[r][j] = Fraction(v)
        T[r][ncols] = Fraction(rhs)
        if kind == "le":
            T[r][s_at] = one
            basis[r] = dual_col[r] = s_at
            s_at += 1
        else:
            if kind == "ge":
                T[r][g_at] = -one
                g_at += 1
            T[r][a_at] = one
            basis[r] = dual_col[r] = a_at
            artificial[a_at] = True
            a_at += 1

    iters = 0

    def pivot(r, j):
        piv = T[r][j]
        T[r] = [v / piv for v in T[r]]
        prow = T[r]
        for i in range(m + 1):
            if i != r and T[i][j] != 0:
                f = T[i][j]
                T[i] = [a - f * b for a, b in zip(T[i], prow)]
        basis[r] = j

    def run(allow_artificial):
        nonlocal iters
        while True:
            j = -1
            for col in range(ncols):
                if T[m][col] < 0 and (allow_artificial or not artificial[col]):
                    j = col
                    break
            if j < 0:
                return
            r, best = -1, None
            for i in range(m):
                if T[i][j] > 0:
                    ratio = T[i][ncols] / T[i][j]
                    if best is None or ratio < best or (ratio == best and basis[i] < basis[r]):
                        r, best = i, ratio
            if r < 0:
                raise Unbounded("LP is unbounded")
            pivot(r, j)
            iters += 1
            if iters > max_iter:
                raise SimplexError("simplex iteration limit exceeded")

    for col in range(ncols):
        if artificial[col]:
            T[m][col] = one
    for r in range(m):
        if artificial[basis[r]]:
            T[m] = [a - b for a, b in zip(T[m], T[r])]
    run(allow_artificial=True)
    if -T[m][ncols] > 0:
        raise InfeasibleLP("phase 1 optimum positive")
    for r in range(m):
        if artificial[basis[r]]:
            for j in range(ncols):
                if not artificial[j] and T[r][j] != 0:
                    pivot(r, j)
                    break

    T[m] = [zero] * (ncols + 1)
    for j in range(nvar):
        T[m][j] = c[j]
    for r in range(m):
        if basis[r] < nvar and c[basis[r]] != 0:
            f = c[basis[r]]
            T[m] = [a - f * b for a, b in zip(T[m], T[r])]
    run(allow_artificial=False)

    x = [zero] * nvar
    for r in range(m):
        if basis[r] < nvar:
            x[basis[r]] = T[r][ncols]
    duals = [-T[m][dual_col[r]] for r in range(m)]
    return x, -T[m][ncols], duals, iters

"""Exact two-phase simplex over rationals with Bland's anti-cycling rule.

Standard form: minimize c·x subject to A x = b, x >= 0.  Everything is
computed with exact rational pivots, so optima, optimal bases and
infeasibility certificates are exact.  Problems here are desk scale (tens of
rows and columns), which a dense tableau handles comfortably.

For an infeasible system the phase-1 dual vector y is returned; it satisfies
y·A_j <= 0 for every column j and y·b > 0, i.e. it is a Farkas certificate
that no nonnegative solution exists.  Callers turn it into separating
hyperplanes and Dutch-book stakes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .exact import ONE, Rat, ZERO

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    status: str
    x: tuple | None = None
    value: object = None
    farkas: tuple | None = None


def _pivot(tableau: list[list], basis: list[int], row: int, col: int) -> None:
    piv = tableau[row][col]
    inv = ONE / piv
    tableau[row] = [v * inv for v in tableau[row]]
    prow = tableau[row]
    for r, line in enumerate(tableau):
        if r != row and line[col] != 0:
            factor = line[col]
            tableau[r] = [a - factor * b for a, b in zip(line, prow)]
    basis[row] = col


def _run_simplex(tableau: list[list], basis: list[int], ncols: int, allowed) -> str:
    """Minimize the objective row in place; Bland's rule throughout."""
    while True:
        obj = tableau[-1]
        col = next((j for j in range(ncols) if allowed(j) and obj[j] < 0), None)
        if col is None:
            return OPTIMAL
        best_row = None
        best_ratio = None
        for r in range(len(tableau) - 1):
            coeff = tableau[r][col]
            if coeff > 0:
                ratio = tableau[r][ncols] / coeff
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[r] < basis[best_row])
                ):
                    best_ratio = ratio
                    best_row = r
        if best_row is None:
            return UNBOUNDED
        _pivot(tableau, basis, best_row, col)


def solve_standard(c: Sequence, A: Sequence[Sequence], b: Sequence) -> LPResult:
    """Minimize c·x s.t. A x = b, x >= 0 (all entries rational or int)."""
    m = len(A)
    n = len(c)
    rows = [[Rat(v) for v in row] for row in A]
    rhs = [Rat(v) for v in b]
    cost = [Rat(v) for v in c]
    flipped = [False] * m
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
            flipped[i] = True

    # Phase 1: artificial variable per row, minimize their sum.
    ncols = n + m
    tableau = [rows[i] + [ONE if j == i else ZERO for j in range(m)] + [rhs[i]] for i in range(m)]
    obj = [ZERO] * (ncols + 1)
    for i in range(m):
        for j in range(n):
            obj[j] -= tableau[i][j]
        obj[ncols] -= tableau[i][ncols]
    # Artificial columns keep reduced cost 0 in this row; forbid re-entering.
    tableau.append(obj)
    basis = [n + i for i in range(m)]
    status = _run_simplex(tableau, basis, ncols, allowed=lambda j: j < n)
    assert status == OPTIMAL  # phase 1 is bounded below by 0
    if tableau[-1][ncols] < 0:
        # Infeasible.  The artificial column of row i is e_i, so its stored
        # reduced cost is 1 - y_i; the dual y then satisfies y·(row j of the
        # scaled system) <= 0 for every original column and y·rhs > 0.
        y = [ONE - tableau[-1][n + i] for i in range(m)]
        farkas = tuple(-y[i] if flipped[i] else y[i] for i in range(m))
        return LPResult(INFEASIBLE, farkas=farkas)

    # Drive any basic artificial (at level 0) out of the basis.
    for r in range(m):
        if basis[r] >= n:
            col = next((j for j in range(n) if tableau[r][j] != 0), None)
            if col is not None:
                _pivot(tableau, basis, r, col)
    keep = [r for r in range(m) if basis[r] < n]

    # Phase 2 on the original objective.
    tableau2 = [tableau[r][:n] + [tableau[r][ncols]] for r in keep]
    basis2 = [basis[r] for r in keep]
    obj2 = list(cost) + [ZERO]
    for r, line in enumerate(tableau2):
        factor = obj2[basis2[r]]
        if factor != 0:
            obj2 = [a - factor * v for a, v in zip(obj2, line)]
    tableau2.append(obj2)
    status = _run_simplex(tableau2, basis2, n, allowed=lambda j: True)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    x = [ZERO] * n
    for r, j in enumerate(basis2):
        x[j] = tableau2[r][n]
    value = -tableau2[-1][n]
    return LPResult(OPTIMAL, x=tuple(x), value=value)


def feasible_point(A: Sequence[Sequence], b: Sequence) -> LPResult:
    """Find any x >= 0 with A x = b, or a Farkas certificate."""
    n = len(A[0]) if A else 0
    return solve_standard([ZERO] * n, A, b)


def minimize(c: Sequence, A: Sequence[Sequence], b: Sequence) -> LPResult:
    return solve_standard(c, A, b)


def maximize(c: Sequence, A: Sequence[Sequence], b: Sequence) -> LPResult:
    res = solve_standard([-Rat(v) for v in c], A, b)
    if res.status == OPTIMAL:
        res.value = -res.value
    return res


def bound_linear(
    objective: Sequence,
    A_ub: Sequence[Sequence],
    b_ub: Sequence,
    sense: str,
) -> LPResult:
    """Optimize objective·y over {y free : A_ub y <= b_ub}.

    Free variables are split as y = y+ - y-, inequalities get slacks.  Used
    for exact bounding boxes of H-polytopes; `sense` is "min" or "max".
    """
    m = len(A_ub)
    d = len(objective)
    n = 2 * d + m
    A = []
    for i, row in enumerate(A_ub):
        line = []
        for v in row:
            line.append(Rat(v))
        for v in row:
            line.append(-Rat(v))
        line.extend(ONE if j == i else ZERO for j in range(m))
        A.append(line)
    c = [Rat(v) for v in objective] + [-Rat(v) for v in objective] + [ZERO] * m
    if sense == "max":
        c = [-v for v in c]
    res = solve_standard(c, A, b_ub)
    if res.status != OPTIMAL:
        return res
    y = tuple(res.x[j] - res.x[d + j] for j in range(d))
    value = -res.value if sense == "max" else res.value
    return LPResult(OPTIMAL, x=y, value=value)

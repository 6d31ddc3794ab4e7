"""Exact rational linear feasibility.

Finds x >= 0 with Ax = b over `fractions.Fraction`, or proves that none
exists.  Phase-one simplex with Bland's rule: pivoting is finite, every
arithmetic step is exact, and an infeasible system yields a Farkas
certificate y with y'A <= 0 and y'b > 0, verified before it is returned.
The solver is deliberately dense and simple; problem sizes here are a
few thousand variables at most.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class LPResult:
    feasible: bool
    solution: list[Fraction] | None = None
    farkas: list[Fraction] | None = None


def solve_equalities(rows: list[list[Fraction]], rhs: list[Fraction]) -> LPResult:
    """Solve {x >= 0 : Ax = b}; returns a point or a Farkas certificate."""
    m = len(rows)
    if m == 0:
        return LPResult(True, [])
    n = len(rows[0])
    signs = [ONE] * m
    tableau: list[list[Fraction]] = []
    b: list[Fraction] = []
    for i in range(m):
        row = list(rows[i])
        beta = rhs[i]
        if beta < 0:
            row = [-v for v in row]
            beta = -beta
            signs[i] = -ONE
        # artificial identity block follows the structural columns
        art = [ZERO] * m
        art[i] = ONE
        tableau.append(row + art)
        b.append(beta)
    basis = [n + i for i in range(m)]
    total_cols = n + m

    # objective: minimize the sum of artificials; track reduced costs of
    # structural columns as obj[j] = sum of tableau rows (artificial basis)
    obj = [ZERO] * total_cols
    objval = ZERO
    for i in range(m):
        for j in range(total_cols):
            obj[j] += tableau[i][j]
        objval += b[i]
    for i in range(m):
        obj[n + i] -= ONE  # cost coefficient of the artificial itself

    while True:
        entering = -1
        for j in range(total_cols):
            if obj[j] > 0 and j not in basis:
                entering = j
                break
        if entering < 0:
            break
        leaving = -1
        best: Fraction | None = None
        for i in range(m):
            coef = tableau[i][entering]
            if coef > 0:
                ratio = b[i] / coef
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leaving]):
                    best = ratio
                    leaving = i
        if leaving < 0:
            break  # unbounded cannot happen in phase one; defensive
        pivot = tableau[leaving][entering]
        inv = ONE / pivot
        tableau[leaving] = [v * inv for v in tableau[leaving]]
        b[leaving] *= inv
        for i in range(m):
            if i != leaving and tableau[i][entering] != 0:
                factor = tableau[i][entering]
                prow = tableau[leaving]
                irow = tableau[i]
                for j in range(total_cols):
                    if prow[j] != 0:
                        irow[j] -= factor * prow[j]
                b[i] -= factor * b[leaving]
        factor = obj[entering]
        if factor != 0:
            prow = tableau[leaving]
            for j in range(total_cols):
                if prow[j] != 0:
                    obj[j] -= factor * prow[j]
            objval -= factor * b[leaving]
        basis[leaving] = entering

    if objval > 0:
        # the artificial column's reduced cost is y_i - 1, where y is the
        # dual vector of the (sign-flipped) system; undo the flips
        y_local = [obj[n + i] + ONE for i in range(m)]
        farkas = [signs[i] * y_local[i] for i in range(m)]
        _verify_farkas(rows, rhs, farkas)
        return LPResult(False, farkas=farkas)

    solution = [ZERO] * n
    for i in range(m):
        if basis[i] < n:
            solution[basis[i]] = b[i]
    # artificials still basic at level zero are redundant rows; ignore them
    return LPResult(True, solution=solution)


def _verify_farkas(rows: list[list[Fraction]], rhs: list[Fraction], y: list[Fraction]) -> None:
    n = len(rows[0]) if rows else 0
    for j in range(n):
        combo = sum((y[i] * rows[i][j] for i in range(len(rows))), ZERO)
        if combo > 0:
            raise AssertionError("invalid infeasibility certificate (y'A has a positive entry)")
    value = sum((y[i] * rhs[i] for i in range(len(rows))), ZERO)
    if value <= 0:
        raise AssertionError("invalid infeasibility certificate (y'b <= 0)")

"""Exact rational linear programming via a dense two-phase tableau simplex.

Small and deterministic: Bland's smallest-index pivot rule guarantees
termination without cycling, and repeated solves of the same program give
bit-identical outcomes.  Intended for desk-scale programs (a few hundred
variables), where exactness matters more than speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

LE, EQ, GE = "<=", "=", ">="


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class LinearProgram:
    """Minimize objective . x subject to constraints; variables >= lower bounds."""

    objective: tuple[Fraction, ...]
    constraints: tuple[tuple[tuple[Fraction, ...], str, Fraction], ...]
    lower_bounds: Optional[tuple[Fraction, ...]] = None

    @property
    def n_vars(self) -> int:
        return len(self.objective)


def linear_program(
    objective: Sequence,
    constraints: Sequence[tuple[Sequence, str, object]],
    lower_bounds: Optional[Sequence] = None,
) -> LinearProgram:
    obj = tuple(Fraction(c) for c in objective)
    rows = []
    for coeffs, rel, rhs in constraints:
        row = tuple(Fraction(c) for c in coeffs)
        if len(row) != len(obj):
            raise DimensionError(
                f"constraint has {len(row)} coefficients, expected {len(obj)}"
            )
        if rel not in (LE, EQ, GE):
            raise ValueError(f"unknown relation {rel!r}")
        rows.append((row, rel, Fraction(rhs)))
    lbs = None
    if lower_bounds is not None:
        lbs = tuple(Fraction(b) for b in lower_bounds)
        if len(lbs) != len(obj):
            raise DimensionError("lower_bounds length mismatch")
    return LinearProgram(obj, tuple(rows), lbs)


@dataclass(frozen=True)
class LpOutcome:
    status: str
    solution: Optional[tuple[Fraction, ...]] = None
    objective: Optional[Fraction] = None


class _Tableau:
    """Dense simplex tableau over Fraction with Bland's rule."""

    def __init__(self, n_cols: int):
        self.rows: list[list[Fraction]] = []  # each row: coeffs + rhs
        self.basis: list[int] = []
        self.n_cols = n_cols

    def add_row(self, coeffs: list[Fraction], rhs: Fraction, basic: int) -> None:
        self.rows.append(coeffs + [rhs])
        self.basis.append(basic)

    def pivot(self, r: int, c: int) -> None:
        piv = self.rows[r][c]
        self.rows[r] = [v / piv for v in self.rows[r]]
        for i, row in enumerate(self.rows):
            if i != r and row[c] != 0:
                f = row[c]
                prow = self.rows[r]
                self.rows[i] = [v - f * pv for v, pv in zip(row, prow)]
        self.basis[r] = c

    def solve(self, cost: list[Fraction], allowed: list[bool]) -> tuple[str, Fraction]:
        """Minimize cost over the current basis, pivoting only on allowed columns.

        Returns (status, objective).  The tableau is left at the optimum.
        """
        while True:
            # reduced costs z_j = c_j - c_B . B^-1 A_j
            red = list(cost)
            for r, b in enumerate(self.basis):
                cb = cost[b]
                if cb != 0:
                    row = self.rows[r]
                    for j in range(self.n_cols):
                        if red[j] != 0 or row[j] != 0:
                            red[j] -= cb * row[j]
            enter = -1
            for j in range(self.n_cols):
                if allowed[j] and red[j] < 0:
                    enter = j
                    break
            if enter < 0:
                obj = Fraction(0)
                for r, b in enumerate(self.basis):
                    obj += cost[b] * self.rows[r][-1]
                return OPTIMAL, obj
            leave = -1
            best: Optional[Fraction] = None
            for r, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    if best is None or ratio < best or (
                        ratio == best and self.basis[r] < self.basis[leave]
                    ):
                        best = ratio
                        leave = r
            if leave < 0:
                return UNBOUNDED, Fraction(0)
            self.pivot(leave, enter)


def solve_lp(lp: LinearProgram) -> LpOutcome:
    """Exact optimum (minimization) or a correct infeasible/unbounded status."""
    n = lp.n_vars
    lbs = lp.lower_bounds or tuple(Fraction(0) for _ in range(n))

    # shift x = lb + y with y >= 0
    rows = []
    for coeffs, rel, rhs in lp.constraints:
        shift = sum(c * b for c, b in zip(coeffs, lbs))
        rows.append((list(coeffs), rel, rhs - shift))

    # column layout: y (n) | slack/surplus | artificials
    n_slack = sum(1 for _, rel, _ in rows if rel != EQ)
    slack_base = n
    art_base = n + n_slack
    n_art = len(rows)
    n_cols = art_base + n_art

    tab = _Tableau(n_cols)
    si = 0
    for ri, (coeffs, rel, rhs) in enumerate(rows):
        row = [Fraction(0)] * n_cols
        sign = 1 if rhs >= 0 else -1
        for j, c in enumerate(coeffs):
            row[j] = sign * c
        if rel != EQ:
            s = Fraction(1) if rel == LE else Fraction(-1)
            row[slack_base + si] = sign * s
            si += 1
        row[art_base + ri] = Fraction(1)
        tab.add_row(row, sign * rhs, art_base + ri)

    # phase 1: minimize artificial sum
    cost1 = [Fraction(0)] * n_cols
    for j in range(art_base, n_cols):
        cost1[j] = Fraction(1)
    allowed = [True] * n_cols
    status, obj = tab.solve(cost1, allowed)
    if status != OPTIMAL or obj != 0:
        return LpOutcome(INFEASIBLE)

    # drive remaining artificials out of the basis where possible
    for r in range(len(tab.rows)):
        if tab.basis[r] >= art_base:
            for j in range(art_base):
                if tab.rows[r][j] != 0:
                    tab.pivot(r, j)
                    break

    # phase 2: real objective, artificial columns barred
    for j in range(art_base, n_cols):
        allowed[j] = False
    cost2 = [Fraction(0)] * n_cols
    for j in range(n):
        cost2[j] = lp.objective[j]
    status, obj = tab.solve(cost2, allowed)
    if status == UNBOUNDED:
        return LpOutcome(UNBOUNDED)

    y = [Fraction(0)] * n_cols
    for r, b in enumerate(tab.basis):
        y[b] = tab.rows[r][-1]
    x = tuple(y[j] + lbs[j] for j in range(n))
    return LpOutcome(OPTIMAL, x, obj + sum(c * b for c, b in zip(lp.objective, lbs)))


def check_feasible(lp: LinearProgram) -> tuple[bool, Optional[tuple[Fraction, ...]]]:
    """Phase-one feasibility check; returns a witness point when feasible."""
    probe = LinearProgram(tuple(Fraction(0) for _ in range(lp.n_vars)),
                          lp.constraints, lp.lower_bounds)
    out = solve_lp(probe)
    if out.status == OPTIMAL:
        return True, out.solution
    return False, None

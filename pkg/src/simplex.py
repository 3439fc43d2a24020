"""
Two-phase primal simplex on a dense numpy tableau.

Works on float arrays or on object arrays of fractions.Fraction; in the
latter case every pivot is exact. Entering and leaving variables follow
Bland's rule, so the method cannot cycle.

Tableau layout: one row per constraint followed by the objective row,
one column per variable followed by the right-hand side. The objective
row holds reduced costs of the maximisation problem and its last entry
is the current objective value.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from src.numeric import NumericBackend, Number

logger = logging.getLogger(__name__)

LE = "<="
GE = ">="
EQ = "="

# Pivot and optimality tolerance in float mode
PIVOT_TOL = 1e-12

# Phase-one residual accepted as feasible in float mode
FEASIBILITY_TOL = 1e-9

MAX_PIVOTS = 100000


class Unbounded(OverflowError):
    pass


class Infeasible(ArithmeticError):
    pass


class PivotLimit(ArithmeticError):
    pass


@dataclass
class LpSolution:
    """Optimal objective value and primal solution."""

    objective: Number
    x: List[Number]


def _pivot(T: np.ndarray, basis: List[int], row: int, col: int, exact: bool) -> None:
    T[row] = T[row] / T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0
    T -= np.multiply.outer(factors, T[row])
    if not exact:
        T[np.abs(T) < PIVOT_TOL] = 0.0
    basis[row] = col


def _run(T: np.ndarray, basis: List[int], columns: Sequence[int], tol, exact: bool) -> None:
    rows = T.shape[0] - 1
    for _ in range(MAX_PIVOTS):
        costs = T[-1]
        entering = next((j for j in columns if costs[j] < -tol), None)
        if entering is None:
            return
        leaving, best = None, None
        for i in range(rows):
            coef = T[i, entering]
            if coef > tol:
                ratio = T[i, -1] / coef
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leaving]):
                    leaving, best = i, ratio
        if leaving is None:
            raise Unbounded("unbounded linear program")
        _pivot(T, basis, leaving, entering, exact)
    raise PivotLimit(f"no optimum after {MAX_PIVOTS} pivots")


def maximize(
    c: Sequence[Number],
    rows: Sequence[Sequence[Number]],
    senses: Sequence[str],
    rhs: Sequence[Number],
    backend: NumericBackend
) -> LpSolution:
    """
    Maximize c.x subject to rows[i].x (<=, >=, =) rhs[i] and x >= 0.

    Args:
        c: objective coefficients
        rows: constraint coefficient rows
        senses: LE, GE or EQ per row
        rhs: right-hand sides
        backend: numeric backend (float or rational)

    Returns:
        LpSolution with the optimal value and the solution vector

    Raises:
        Infeasible: no feasible point
        Unbounded: objective unbounded above
    """
    exact = backend.exact
    tol = backend.zero if exact else PIVOT_TOL
    n, m = len(c), len(rows)
    A = np.array([[backend.convert(x) for x in row] for row in rows], dtype=backend.dtype).reshape(m, n)
    b = np.array([backend.convert(x) for x in rhs], dtype=backend.dtype)
    senses = list(senses)
    for i in range(m):
        if senses[i] not in (LE, GE, EQ):
            raise ValueError(f"Invalid constraint sense: {senses[i]}")
        if b[i] < 0:
            A[i], b[i] = -A[i], -b[i]
            senses[i] = {LE: GE, GE: LE, EQ: EQ}[senses[i]]

    n_slack = sum(1 for s in senses if s != EQ)
    n_art = sum(1 for s in senses if s != LE)
    width = n + n_slack + n_art
    T = np.full((m + 1, width + 1), backend.zero, dtype=backend.dtype)
    basis: List[int] = []
    slack, art = n, n + n_slack
    for i in range(m):
        T[i, :n] = A[i]
        T[i, -1] = b[i]
        if senses[i] == LE:
            T[i, slack] = backend.one
            basis.append(slack)
            slack += 1
        elif senses[i] == GE:
            T[i, slack] = -backend.one
            slack += 1
            T[i, art] = backend.one
            basis.append(art)
            art += 1
        else:
            T[i, art] = backend.one
            basis.append(art)
            art += 1

    artificial = set(range(n + n_slack, width))
    if artificial:
        # Phase 1: maximize -sum(artificials)
        for j in artificial:
            T[-1, j] = backend.one
        for i, j in enumerate(basis):
            if j in artificial:
                T[-1] -= T[i]
        _run(T, basis, range(width), tol, exact)
        if T[-1, -1] < (0 if exact else -FEASIBILITY_TOL):
            raise Infeasible("infeasible linear program")
        redundant = []
        for i, j in enumerate(basis):
            if j not in artificial:
                continue
            col = next((k for k in range(n + n_slack) if abs(T[i, k]) > tol), None)
            if col is None:
                redundant.append(i)
            else:
                _pivot(T, basis, i, col, exact)
        keep_rows = [i for i in range(m) if i not in redundant]
        basis = [basis[i] for i in keep_rows]
        keep_cols = list(range(n + n_slack)) + [width]
        T = T[keep_rows + [m]][:, keep_cols]
        width = n + n_slack

    # Phase 2
    T[-1, :] = backend.zero
    for j in range(n):
        T[-1, j] = -backend.convert(c[j])
    for i, j in enumerate(basis):
        if T[-1, j] != 0:
            T[-1] -= T[-1, j] * T[i]
    _run(T, basis, range(width), tol, exact)

    x = [backend.zero] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = backend.clean(T[i, -1])
    return LpSolution(objective=T[-1, -1], x=x)

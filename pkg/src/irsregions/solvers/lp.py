"""Dense simplex solver for the small time-sharing LPs.

Two-phase tableau simplex with Bland's rule throughout, which prevents
cycling on the degenerate instances that time-sharing produces (atoms
with identical rate tuples are common). Problem sizes here are at most
dozens of variables, so no effort is spent on sparsity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

_PIVOT_TOL = 1e-10
_FEAS_TOL = 1e-9


class LPStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True)
class LinearProgram:
    """maximize c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= lb."""

    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lb: np.ndarray | None = None

    def __post_init__(self) -> None:
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        object.__setattr__(self, "c", c)
        n = c.shape[0]
        for mat_name, rhs_name in (("A_ub", "b_ub"), ("A_eq", "b_eq")):
            mat, rhs = getattr(self, mat_name), getattr(self, rhs_name)
            if (mat is None) != (rhs is None):
                raise ValueError(f"{mat_name} and {rhs_name} must be given together")
            if mat is not None:
                mat = np.atleast_2d(np.asarray(mat, dtype=float))
                rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
                if mat.shape != (rhs.shape[0], n):
                    raise ValueError(f"{mat_name} shape {mat.shape} inconsistent with c ({n}) / rhs ({rhs.shape})")
                object.__setattr__(self, mat_name, mat)
                object.__setattr__(self, rhs_name, rhs)
        lb = self.lb
        lb = np.zeros(n) if lb is None else np.asarray(lb, dtype=float)
        if lb.shape != (n,):
            raise ValueError(f"lb shape {lb.shape} != ({n},)")
        object.__setattr__(self, "lb", lb)
        for name in ("c", "A_ub", "b_ub", "A_eq", "b_eq", "lb"):
            arr = getattr(self, name)
            if arr is not None and not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite entries in {name}")

    @property
    def n(self) -> int:
        return self.c.shape[0]


@dataclass
class LPResult:
    status: LPStatus
    value: float = np.nan
    x: np.ndarray | None = None


def _bland_pivot(T: np.ndarray, basis: list[int], red: np.ndarray, ncols: int,
                 max_iter: int) -> LPStatus:
    """Run Bland-rule simplex (minimization) on the tableau in place."""
    m = T.shape[0]
    for _ in range(max_iter):
        entering = -1
        for j in range(ncols):
            if red[j] < -_PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return LPStatus.OPTIMAL
        col = T[:, entering]
        ratios = np.full(m, np.inf)
        positive = col > _PIVOT_TOL
        ratios[positive] = T[positive, -1] / col[positive]
        best = np.inf
        leave = -1
        for i in range(m):
            if ratios[i] < best - 1e-15 or (
                ratios[i] <= best + 1e-15 and leave >= 0 and basis[i] < basis[leave]
            ):
                if np.isfinite(ratios[i]):
                    best = ratios[i]
                    leave = i
        if leave < 0:
            return LPStatus.UNBOUNDED
        piv = T[leave, entering]
        T[leave] /= piv
        for i in range(m):
            if i != leave and abs(T[i, entering]) > 1e-14:
                T[i] -= T[i, entering] * T[leave]
        red -= red[entering] * T[leave, :ncols]
        basis[leave] = entering
    return LPStatus.ITERATION_LIMIT


def lp_solve(lp: LinearProgram, max_iter: int = 20000) -> LPResult:
    """Solve the LP; status distinguishes optimal/infeasible/unbounded."""
    n = lp.n
    # shift out lower bounds: x = y + lb, y >= 0
    shift = lp.c @ lp.lb
    rows = []
    rhs = []
    kinds = []  # "ub" or "eq"
    if lp.A_ub is not None:
        for a, b in zip(lp.A_ub, lp.b_ub):
            rows.append(a)
            rhs.append(b - a @ lp.lb)
            kinds.append("ub")
    if lp.A_eq is not None:
        for a, b in zip(lp.A_eq, lp.b_eq):
            rows.append(a)
            rhs.append(b - a @ lp.lb)
            kinds.append("eq")
    m = len(rows)
    if m == 0:
        # only sign constraints: bounded iff c <= 0 in every coordinate
        if np.any(lp.c > _PIVOT_TOL):
            return LPResult(LPStatus.UNBOUNDED)
        return LPResult(LPStatus.OPTIMAL, float(shift), lp.lb.copy())

    A = np.asarray(rows, dtype=float)
    b = np.asarray(rhs, dtype=float)
    n_slack = sum(1 for k in kinds if k == "ub")

    # columns: structural | slack | artificial | rhs
    T = np.zeros((m, n + n_slack + m + 1))
    T[:, :n] = A
    T[:, -1] = b
    slack_j = n
    for i, kind in enumerate(kinds):
        if kind == "ub":
            T[i, slack_j] = 1.0
            slack_j += 1
    neg = T[:, -1] < 0
    T[neg] *= -1.0

    basis: list[int] = []
    art_cols: list[int] = []
    for i in range(m):
        j = n + n_slack + i
        T[i, j] = 1.0
        basis.append(j)
        art_cols.append(j)
    ncols = n + n_slack + m

    # phase 1: minimize sum of artificials
    c1 = np.zeros(ncols)
    c1[art_cols] = 1.0
    red = c1.copy()
    for i, bi in enumerate(basis):
        red -= c1[bi] * T[i, :ncols]
    status = _bland_pivot(T, basis, red, ncols, max_iter)
    if status is not LPStatus.OPTIMAL:
        return LPResult(status)
    phase1 = sum(T[i, -1] for i, bi in enumerate(basis) if bi in set(art_cols))
    if phase1 > _FEAS_TOL:
        return LPResult(LPStatus.INFEASIBLE)

    # drive remaining (degenerate) artificials out of the basis
    art_set = set(art_cols)
    keep_rows = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] in art_set:
            pivot_j = -1
            for j in range(n + n_slack):
                if abs(T[i, j]) > _PIVOT_TOL:
                    pivot_j = j
                    break
            if pivot_j < 0:
                keep_rows[i] = False  # redundant constraint
                continue
            piv = T[i, pivot_j]
            T[i] /= piv
            for r in range(m):
                if r != i and abs(T[r, pivot_j]) > 1e-14:
                    T[r] -= T[r, pivot_j] * T[i]
            basis[i] = pivot_j

    if not np.all(keep_rows):
        T = T[keep_rows]
        basis = [bi for bi, keep in zip(basis, keep_rows) if keep]

    # phase 2 on structural + slack columns only
    ncols2 = n + n_slack
    T2 = np.hstack([T[:, :ncols2], T[:, -1:]])
    c2 = np.zeros(ncols2)
    c2[:n] = -lp.c  # maximize -> minimize
    red = c2.copy()
    for i, bi in enumerate(basis):
        red -= c2[bi] * T2[i, :ncols2]
    status = _bland_pivot(T2, basis, red, ncols2, max_iter)
    if status is not LPStatus.OPTIMAL:
        return LPResult(status)

    y = np.zeros(ncols2)
    for i, bi in enumerate(basis):
        y[bi] = T2[i, -1]
    x = y[:n] + lp.lb
    return LPResult(LPStatus.OPTIMAL, float(lp.c @ x), x)

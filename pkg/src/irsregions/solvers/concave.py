"""Concave maximization engine for the resource-allocation subproblems.

Feasible sets are products of "capped simplex" blocks
``{lb <= x[idx] <= ub, sum(x[idx]) <= budget}``, which covers per-block
power budgets and orthogonal-resource shares. The engine runs projected
supergradient ascent with diminishing normalized steps, then polishes
with cyclic coordinate golden-section sweeps (each coordinate
restriction of a concave function is concave, hence unimodal).

``maximize_min_ratio`` layers the common-rate bisection on top: a
max-min-ratio program ``max_x min_k f_k(x)/alpha_k`` is reduced to
feasibility checks ``exists x: min_k (f_k(x) - alpha_k t) >= 0`` that
the ascent core solves with an early-out. The value it returns is
always attained by the returned point, never extrapolated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class BlockSimplex:
    """One block: lb <= x[indices] <= ub, sum(x[indices]) <= budget."""

    indices: tuple[int, ...]
    budget: float
    lb: float = 0.0
    ub: float = np.inf

    def __post_init__(self) -> None:
        if self.budget < len(self.indices) * self.lb - 1e-15:
            raise ValueError("budget smaller than sum of lower bounds")
        if self.ub < self.lb:
            raise ValueError("upper bound below lower bound")
        object.__setattr__(self, "_idx", np.asarray(self.indices, dtype=int))

    def project(self, values: np.ndarray) -> np.ndarray:
        """Euclidean projection onto the block.

        Exact shift-and-clip: the shifted sum t -> sum(clip(v - t)) is
        piecewise linear, so the budget-matching shift is interpolated
        between breakpoints."""
        y = np.clip(values, self.lb, self.ub)
        if y.sum() <= self.budget + 1e-15:
            return y
        v = np.asarray(values, dtype=float)
        bps = v - self.lb
        if np.isfinite(self.ub):
            bps = np.concatenate([bps, v - self.ub])
        # anchor below every breakpoint so the bracketing segment always
        # exists (the sum there is >= budget by construction)
        anchor = float(np.min(bps)) - max(self.budget, 1.0)
        bps = np.unique(np.concatenate([[anchor], bps]))
        sums = np.clip(v[None, :] - bps[:, None], self.lb, self.ub).sum(axis=1)
        # sums is non-increasing in the shift; find the bracketing segment
        j = int(np.searchsorted(-sums, -self.budget))
        if j == 0:
            t = bps[0]
        elif j >= bps.shape[0]:
            t = bps[-1]
        else:
            s0, s1 = sums[j - 1], sums[j]
            t0, t1 = bps[j - 1], bps[j]
            t = t1 if s0 == s1 else t0 + (self.budget - s0) * (t1 - t0) / (s1 - s0)
        return np.clip(v - t, self.lb, self.ub)

    def coord_interval(self, values: np.ndarray, local_i: int) -> tuple[float, float]:
        """Feasible range of one coordinate with the others held fixed."""
        others = values.sum() - values[local_i]
        hi = min(self.ub, self.budget - others)
        return self.lb, max(hi, self.lb)


@dataclass(frozen=True)
class FeasibleProduct:
    """Product of disjoint BlockSimplex constraints covering all coords."""

    dim: int
    blocks: tuple[BlockSimplex, ...]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for blk in self.blocks:
            if seen.intersection(blk.indices):
                raise ValueError("blocks must not share coordinates")
            seen.update(blk.indices)
        if seen != set(range(self.dim)):
            raise ValueError("blocks must cover every coordinate exactly once")

    def project(self, x: np.ndarray) -> np.ndarray:
        out = np.array(x, dtype=float)
        for blk in self.blocks:
            idx = blk._idx
            out[idx] = blk.project(out[idx])
        return out

    def coord_interval(self, x: np.ndarray, i: int) -> tuple[float, float]:
        for blk in self.blocks:
            if i in blk.indices:
                local = blk.indices.index(i)
                return blk.coord_interval(x[blk._idx], local)
        raise KeyError(i)

    def linear_max(self, g: np.ndarray) -> float:
        """max of g.x over the feasible set (greedy per block)."""
        total = 0.0
        for blk in self.blocks:
            gb = np.asarray(g, dtype=float)[blk._idx]
            room = blk.budget - blk.lb * len(blk.indices)
            total += blk.lb * float(gb.sum())
            cap = blk.ub - blk.lb
            for gi in sorted(gb[gb > 0.0], reverse=True):
                take = min(cap, room)
                if take <= 0.0:
                    break
                total += gi * take
                room -= take
        return total

    def diameter(self) -> float:
        return float(np.sqrt(sum(blk.budget**2 for blk in self.blocks)) + 1e-12)


@dataclass
class ConcaveProgram:
    """Callbacks for one concave maximization.

    ``value`` and ``supergradient`` must be pure; ``feasible`` describes
    the constraint set. Tolerance is relative on the objective.
    """

    value: Callable[[np.ndarray], float]
    supergradient: Callable[[np.ndarray], np.ndarray]
    feasible: FeasibleProduct
    tol: float = 1e-9

    def __post_init__(self) -> None:
        if self.tol <= 0.0:
            raise ValueError("tolerance must be positive")


@dataclass
class ConcaveResult:
    value: float
    x: np.ndarray
    iterations: int
    history: list[float] = field(default_factory=list)


def _golden_section(f: Callable[[float], float], lo: float, hi: float,
                    iters: int = 40) -> tuple[float, float]:
    if hi - lo < 1e-15:
        v = f(lo)
        return lo, v
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
    if f1 >= f2:
        return x1, f1
    return x2, f2


def concave_maximize(
    prog: ConcaveProgram,
    x0: np.ndarray,
    max_iter: int = 2000,
    early_stop_value: float | None = None,
    refine_sweeps: int = 8,
    patience: int = 200,
) -> ConcaveResult:
    """Maximize a concave function over the product feasible set.

    Phase one is projected supergradient ascent with diminishing
    normalized steps; phase two refines coordinate-by-coordinate with
    golden-section line searches. Accepted iterates are monotone in the
    objective (best-so-far is tracked and returned).
    """
    feas = prog.feasible
    x = feas.project(np.asarray(x0, dtype=float))
    best_x = x.copy()
    best_val = prog.value(x)
    if not np.isfinite(best_val):
        raise FloatingPointError(f"objective is non-finite at the start point: {best_val}")
    history = [best_val]
    radius = feas.diameter()
    iters = 0
    since_improve = 0
    for t in range(1, max_iter + 1):
        iters = t
        if early_stop_value is not None and best_val >= early_stop_value:
            break
        g = np.asarray(prog.supergradient(x), dtype=float)
        norm = float(np.linalg.norm(g))
        if norm < 1e-15:
            break
        x = feas.project(x + (radius / np.sqrt(t)) * g / norm)
        val = prog.value(x)
        if not np.isfinite(val):
            raise FloatingPointError("objective became non-finite during ascent")
        if val > best_val + prog.tol * max(1.0, abs(best_val)):
            since_improve = 0
        else:
            since_improve += 1
        if val > best_val:
            best_val = val
            best_x = x.copy()
            history.append(best_val)
        if since_improve >= patience:
            break

    # coordinate polish (skip if the early-out already fired)
    if early_stop_value is None or best_val < early_stop_value:
        x = best_x.copy()
        for _ in range(refine_sweeps):
            sweep_start = best_val
            for i in range(feas.dim):
                lo, hi = feas.coord_interval(x, i)
                if hi - lo < 1e-14:
                    continue
                keep = x[i]

                def along(v: float, i: int = i) -> float:
                    x[i] = v
                    return prog.value(x)

                xi, vi = _golden_section(along, lo, hi)
                # move only on strict improvement; on the flat plateaus of
                # min() objectives the probe point is otherwise arbitrary
                if vi > best_val:
                    x[i] = xi
                    best_val = vi
                    best_x = x.copy()
                    history.append(best_val)
                else:
                    x[i] = keep
            if best_val - sweep_start <= prog.tol * max(1.0, abs(best_val)):
                break
            if early_stop_value is not None and best_val >= early_stop_value:
                break

    return ConcaveResult(value=float(best_val), x=best_x, iterations=iters, history=history)


@dataclass
class MinRatioResult:
    value: float
    x: np.ndarray
    bisection_steps: int
    feasibility_checks: int


def maximize_min_ratio(
    values: Callable[[np.ndarray], np.ndarray],
    supergradients: Callable[[np.ndarray], np.ndarray],
    alpha: np.ndarray,
    feasible: FeasibleProduct,
    x0: np.ndarray,
    r_hi: float,
    tol: float = 1e-6,
    inner_iter: int = 1200,
    max_bisect: int = 25,
) -> MinRatioResult:
    """Solve max_x min_{k: alpha_k > 0} f_k(x) / alpha_k.

    ``values(x)`` returns the vector (f_k(x)); ``supergradients(x)`` the
    stacked supergradient rows. The ratio objective is maximized
    directly first, then the common rate is bisected over [attained,
    r_hi] with cheap feasibility programs max_x min_k (f_k - alpha_k t)
    that tighten the bracket and can only improve the incumbent. The
    returned value is always attained by the returned point.
    """
    alpha = np.asarray(alpha, dtype=float)
    active = np.flatnonzero(alpha > 0.0)
    if active.size == 0:
        raise ValueError("all ratio weights are zero")

    def ratio_value(x: np.ndarray) -> float:
        f = values(x)
        return float(np.min(f[active] / alpha[active]))

    def ratio_grad(x: np.ndarray) -> np.ndarray:
        f = values(x)
        j = active[int(np.argmin(f[active] / alpha[active]))]
        return supergradients(x)[j] / alpha[j]

    def make_program(t: float) -> ConcaveProgram:
        def val(x: np.ndarray) -> float:
            f = values(x)
            return float(np.min(f[active] - alpha[active] * t))

        def grad(x: np.ndarray) -> np.ndarray:
            f = values(x)
            j = active[int(np.argmin(f[active] - alpha[active] * t))]
            return supergradients(x)[j]

        return ConcaveProgram(value=val, supergradient=grad, feasible=feasible)

    direct = concave_maximize(
        ConcaveProgram(value=ratio_value, supergradient=ratio_grad, feasible=feasible),
        x0, max_iter=inner_iter,
    )
    x_best = direct.x
    lo = direct.value
    # concavity certificate: every component's tangent plane at the
    # incumbent upper-bounds the ratio, which usually collapses the
    # bisection bracket to a sliver
    f_star = values(x_best)
    g_star = supergradients(x_best)
    hi = float(r_hi)
    for k in active:
        lin = feasible.linear_max(g_star[k]) - float(g_star[k] @ x_best)
        hi = min(hi, (float(f_star[k]) + max(lin, 0.0)) / alpha[k])
    hi = max(hi, lo)
    checks = 0
    steps = 0
    probe_iter = max(inner_iter // 4, 100)
    while hi - lo > tol * max(1.0, lo) and steps < max_bisect:
        steps += 1
        t = 0.5 * (lo + hi)
        res = concave_maximize(make_program(t), x_best, max_iter=probe_iter,
                               early_stop_value=0.0, refine_sweeps=3, patience=60)
        checks += 1
        achieved = ratio_value(res.x)
        if achieved > lo:
            lo = achieved
            x_best = res.x
        if res.value < 0.0:
            hi = t
        elif achieved < t - tol * max(1.0, t):
            break  # feasible at t but the attained ratio stalled below it
    return MinRatioResult(value=float(lo), x=x_best, bisection_steps=steps,
                          feasibility_checks=checks)


def check_gradient(
    value: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    h: float = 1e-6,
) -> float:
    """Max abs difference between the callback gradient and central
    finite differences at x."""
    x = np.asarray(x, dtype=float)
    g = np.asarray(gradient(x), dtype=float)
    fd = np.empty_like(g)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        fd[i] = (value(x + e) - value(x - e)) / (2.0 * h)
    return float(np.max(np.abs(g - fd)))

"""Constrained ellipsoid method for the dual-variable search.

Minimizes a convex (possibly non-differentiable) function over
``{lam >= 0, a . lam = rhs}``. The equality is handled as the two
inequality cuts ``a . lam <= rhs`` and ``-a . lam <= -rhs``; violated
constraints produce deep feasibility cuts, otherwise the subgradient
returned by the oracle produces an objective cut. The oracle is always
evaluated at the exact projection of the center onto the feasible set
(clip to the orthant, rescale onto the hyperplane), so every recorded
value is a valid dual value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

Oracle = Callable[[np.ndarray], tuple[float, np.ndarray]]

# Width of the tolerated band around the equality hyperplane. Two-sided
# cuts flatten the ellipsoid along the equality normal; below this width
# they stop firing, which keeps the shape matrix numerically PD while
# the oracle is still evaluated at exactly feasible (projected) points.
_EQ_TOL = 1e-7
_NONNEG_TOL = 1e-11


def _ensure_pd(shape: np.ndarray) -> np.ndarray:
    """Symmetrize and floor tiny/negative eigenvalues left by roundoff."""
    shape = 0.5 * (shape + shape.T)
    try:
        np.linalg.cholesky(shape)
        return shape
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(shape)
        w = np.maximum(w, np.max(np.abs(w)) * 1e-14)
        return (v * w) @ v.T


@dataclass
class EllipsoidState:
    """Center/shape pair describing {x : (x-c)^T A^-1 (x-c) <= 1}."""

    center: np.ndarray
    shape: np.ndarray
    iteration: int = 0

    def __post_init__(self) -> None:
        self.center = np.atleast_1d(np.asarray(self.center, dtype=float))
        self.shape = np.atleast_2d(np.asarray(self.shape, dtype=float))
        n = self.center.shape[0]
        if self.shape.shape != (n, n):
            raise ValueError(f"shape matrix {self.shape.shape} != ({n},{n})")
        if not np.all(np.isfinite(self.center)):
            raise ValueError("non-finite center")
        np.linalg.cholesky(self.shape)  # raises unless symmetric PD

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def volume_proxy(self) -> float:
        """Product of semi-axes, sqrt(det A)."""
        chol = np.linalg.cholesky(self.shape)
        return float(np.prod(np.diag(chol)))


@dataclass
class EllipsoidResult:
    x: np.ndarray
    value: float
    iterations: int
    objective_cuts: int
    degraded: bool
    gap_bound: float
    state: EllipsoidState | None = None
    volume_history: list[float] = field(default_factory=list)


def initial_ellipsoid(a: np.ndarray, rhs: float = 1.0) -> EllipsoidState:
    """Ball containing every feasible point of {lam >= 0, a.lam = rhs}.

    Center satisfies the equality exactly; the radius covers the box
    [0, rhs/min(a)]^n that contains the whole feasible set.
    """
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0.0):
        raise ValueError("equality coefficients must be positive (drop zero entries first)")
    n = a.shape[0]
    center = rhs / (n * a)
    radius_sq = float(np.sum((rhs / a) ** 2))
    return EllipsoidState(center=center, shape=radius_sq * np.eye(n))


def project_feasible(x: np.ndarray, a: np.ndarray, rhs: float) -> np.ndarray:
    """Clip to the non-negative orthant and rescale onto a.lam = rhs."""
    y = np.maximum(x, 0.0)
    s = float(a @ y)
    if s <= 0.0:
        y = rhs / (len(a) * a)
        return y
    return y * (rhs / s)


def ellipsoid_cut(state: EllipsoidState, g: np.ndarray, depth: float = 0.0) -> EllipsoidState:
    """Apply the (deep) cut ``g . (x - center) + depth <= 0``.

    ``depth = 0`` is a central cut. Returns the updated state; raises if
    the cut reveals an empty intersection (depth too large).
    """
    n = state.dim
    A = state.shape
    g = np.asarray(g, dtype=float)
    gAg = float(g @ A @ g)
    if gAg <= 0.0 or not np.isfinite(gAg):
        raise FloatingPointError("degenerate cut direction")
    rho = np.sqrt(gAg)
    alpha = depth / rho
    if alpha >= 1.0:
        raise FloatingPointError("cut excludes the whole ellipsoid")
    alpha = max(alpha, 0.0)
    if n == 1:
        # interval halving
        lo = state.center[0] - rho
        hi = state.center[0] + rho
        if g[0] > 0:
            hi = state.center[0] - depth / g[0]
        else:
            lo = state.center[0] - depth / g[0]
        c = 0.5 * (lo + hi)
        r = 0.5 * (hi - lo)
        return EllipsoidState(center=np.array([c]), shape=np.array([[r * r]]),
                              iteration=state.iteration + 1)
    Ag = A @ g
    tau = (1.0 + n * alpha) / (n + 1.0)
    delta = (n * n / (n * n - 1.0)) * (1.0 - alpha * alpha)
    beta = 2.0 * (1.0 + n * alpha) / ((n + 1.0) * (1.0 + alpha))
    center = state.center - tau * Ag / rho
    shape = _ensure_pd(delta * (A - beta * np.outer(Ag, Ag) / gAg))
    return EllipsoidState(center=center, shape=shape, iteration=state.iteration + 1)


def ellipsoid_minimize(
    oracle: Oracle,
    a: np.ndarray,
    rhs: float = 1.0,
    init: EllipsoidState | None = None,
    eps: float = 1e-4,
    max_iter: int | None = None,
    track_volume: bool = False,
) -> EllipsoidResult:
    """Minimize a convex function over {lam >= 0, a.lam = rhs}.

    Stops when the objective-cut gap bound sqrt(g A g) certifies
    eps-relative accuracy, when the volume proxy falls below eps**dim,
    or at the iteration cap. The returned value is the best one seen at
    a feasible point, so it is always a valid upper bound for the dual
    minimum even on degraded exits.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 1:
        x = np.array([rhs / a[0]])
        value, _ = oracle(x)
        return EllipsoidResult(x=x, value=value, iterations=0, objective_cuts=1,
                               degraded=False, gap_bound=0.0)
    state = init if init is not None else initial_ellipsoid(a, rhs)
    if max_iter is None:
        max_iter = min(int(10 * n * n / eps), 20000)

    best_x = project_feasible(state.center, a, rhs)
    best_val = np.inf
    gap_bound = np.inf
    obj_cuts = 0
    degraded = True
    volumes: list[float] = []

    for _ in range(max_iter):
        c = state.center
        worst = int(np.argmin(c))
        eq_violation = float(a @ c - rhs)
        if c[worst] < -_NONNEG_TOL:
            g = -np.eye(n)[worst]
            depth = -c[worst]
        elif abs(eq_violation) > _EQ_TOL:
            g = a if eq_violation > 0 else -a
            depth = abs(eq_violation)
        else:
            lam = project_feasible(c, a, rhs)
            value, sub = oracle(lam)
            if not np.isfinite(value):
                raise FloatingPointError(f"oracle returned non-finite value {value}")
            if value < best_val:
                best_val = value
                best_x = lam
            g = np.asarray(sub, dtype=float)
            depth = 0.0
            obj_cuts += 1
            gAg = float(g @ state.shape @ g)
            gap_bound = np.sqrt(max(gAg, 0.0))
            if gap_bound <= eps * max(1.0, abs(best_val)):
                degraded = False
                break
        try:
            state = ellipsoid_cut(state, g, depth)
        except FloatingPointError:
            break
        if track_volume:
            volumes.append(state.volume_proxy())
        if state.volume_proxy() < eps**n:
            degraded = gap_bound > np.sqrt(eps) * max(1.0, abs(best_val))
            break

    if not np.isfinite(best_val):
        lam = project_feasible(state.center, a, rhs)
        best_val, _ = oracle(lam)
        best_x = lam
        obj_cuts += 1
    return EllipsoidResult(
        x=best_x,
        value=float(best_val),
        iterations=state.iteration,
        objective_cuts=obj_cuts,
        degraded=degraded,
        gap_bound=float(gap_bound),
        state=state,
        volume_history=volumes,
    )

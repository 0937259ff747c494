"""Shared numeric kernels: dense LP, constrained ellipsoid method, and
a concave-maximization engine (projected supergradient + bisection)."""

from .lp import LinearProgram, LPResult, LPStatus, lp_solve
from .ellipsoid import EllipsoidState, EllipsoidResult, ellipsoid_minimize, initial_ellipsoid
from .concave import (
    BlockSimplex,
    FeasibleProduct,
    ConcaveProgram,
    ConcaveResult,
    MinRatioResult,
    concave_maximize,
    maximize_min_ratio,
    check_gradient,
)

__all__ = [
    "LinearProgram",
    "LPResult",
    "LPStatus",
    "lp_solve",
    "EllipsoidState",
    "EllipsoidResult",
    "ellipsoid_minimize",
    "initial_ellipsoid",
    "BlockSimplex",
    "FeasibleProduct",
    "ConcaveProgram",
    "ConcaveResult",
    "MinRatioResult",
    "concave_maximize",
    "maximize_min_ratio",
    "check_gradient",
]

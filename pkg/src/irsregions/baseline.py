"""Exhaustive-search reference for finitely many reflection blocks.

Every assignment of a reflection pattern to each of the N blocks is
enumerated (L**(M*N) schedules, guarded by a hard budget) and the
residual resource allocation is solved per schedule. For the
orthogonal scheme the per-schedule problem is convex, so the sweep is
the ground-truth optimum at desk scale; for superposition coding the
per-schedule solve is the same local iteration the proposed scheme
uses, so the sweep is a strong but not provably optimal reference.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

from .channel import (
    DEFAULT_ENUM_BUDGET,
    BudgetExceededError,
    ChannelRealization,
    PhaseConfig,
    phase_config_from_flat,
)
from .config import SystemConfig
from .noma import NomaFiniteResult, RateProfile, solve_noma_finite
from .oma import OmaFiniteResult, solve_oma_finite

PROGRESS_EVERY = 2**12


def schedule_count(config: SystemConfig, N: int) -> int:
    return config.n_phase_configs**N


def enumerate_schedules(
    config: SystemConfig,
    N: int,
    budget: int = DEFAULT_ENUM_BUDGET,
    start_index: int = 0,
) -> Iterator[tuple[int, list[PhaseConfig]]]:
    """Yield (schedule index, per-block patterns) in deterministic
    lexicographic order; resumable from ``start_index``."""
    total = schedule_count(config, N)
    if total > budget:
        raise BudgetExceededError(total, budget, what=f"{N}-block schedules")
    n_cfg = config.n_phase_configs
    for flat in range(start_index, total):
        rem = flat
        blocks = []
        for _ in range(N):
            blocks.append(rem % n_cfg)
            rem //= n_cfg
        thetas = [phase_config_from_flat(c, config.M, config.L) for c in reversed(blocks)]
        yield flat, thetas


@dataclass
class BaselineResult:
    value: float
    schedule_index: int
    theta_blocks: list[PhaseConfig]
    detail: NomaFiniteResult | OmaFiniteResult
    n_schedules: int


def _baseline(
    solver: Callable[[list[PhaseConfig]], NomaFiniteResult | OmaFiniteResult],
    config: SystemConfig,
    N: int,
    budget: int,
    start_index: int,
    progress: Callable[[int, int], None] | None,
) -> BaselineResult:
    best = None
    total = schedule_count(config, N)
    for flat, thetas in enumerate_schedules(config, N, budget=budget, start_index=start_index):
        result = solver(thetas)
        if best is None or result.value > best.value:
            best = BaselineResult(
                value=result.value,
                schedule_index=flat,
                theta_blocks=thetas,
                detail=result,
                n_schedules=total,
            )
        if progress is not None and (flat + 1) % PROGRESS_EVERY == 0:
            progress(flat + 1, total)
    if best is None:
        raise RuntimeError("no schedules enumerated")
    return best


def baseline_noma(
    alpha: RateProfile,
    ch: ChannelRealization,
    config: SystemConfig,
    N: int,
    budget: int = DEFAULT_ENUM_BUDGET,
    start_index: int = 0,
    progress: Callable[[int, int], None] | None = None,
    **solver_kwargs,
) -> BaselineResult:
    """Best superposition-coding inner bound over every block schedule."""

    def solver(thetas: list[PhaseConfig]) -> NomaFiniteResult:
        return solve_noma_finite(alpha, ch, config, theta_blocks=thetas, **solver_kwargs)

    return _baseline(solver, config, N, budget, start_index, progress)


def baseline_oma(
    alpha: RateProfile,
    ch: ChannelRealization,
    config: SystemConfig,
    N: int,
    budget: int = DEFAULT_ENUM_BUDGET,
    start_index: int = 0,
    progress: Callable[[int, int], None] | None = None,
    **solver_kwargs,
) -> BaselineResult:
    """Best orthogonal-access point over every block schedule; the
    per-schedule problem is convex, so this is the finite-N optimum."""

    def solver(thetas: list[PhaseConfig]) -> OmaFiniteResult:
        return solve_oma_finite(alpha, ch, config, theta_blocks=thetas, **solver_kwargs)

    return _baseline(solver, config, N, budget, start_index, progress)

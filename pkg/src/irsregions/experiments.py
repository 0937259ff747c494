"""Experiment orchestration: region sweeps, common-rate studies, output.

A sweep walks the rate-profile simplex for two users and dispatches
each point to the selected engine; a common-rate study fixes the
symmetric profile and averages the common rate over seeds along a
transmit-power or IRS-size grid. Rows are produced in deterministic
order regardless of worker scheduling, and per-row failures are
recorded without aborting the run.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import DEFAULT_ENUM_BUDGET, PhaseGainTable, sample_channels
from .config import ChannelParams, SystemConfig
from .baseline import baseline_noma, baseline_oma
from .noma import RateProfile, solve_noma_finite, solve_noma_infinite
from .oma import solve_oma_finite, solve_oma_infinite
from .units import dbm_to_watts

MODES = (
    "noma-inf",
    "noma-finite",
    "oma-inf",
    "oma-finite",
    "baseline-noma",
    "baseline-oma",
    "no-irs-noma",
    "no-irs-oma",
    "oma-continuous",
)

_INFINITE_MODES = {"noma-inf", "oma-inf", "no-irs-noma", "no-irs-oma", "oma-continuous"}


@dataclass(frozen=True)
class ExperimentSpec:
    """One batch of region points.

    ``modes`` selects the engines; the sweep enumerates alpha_1 over
    ``alpha_steps`` equispaced points for K = 2. Config overrides are
    taken in dBm/dB and converted once.
    """

    modes: tuple[str, ...] = ("noma-inf",)
    alpha_steps: int = 11
    seeds: tuple[int, ...] = (0,)
    n_blocks: int = 1
    system: SystemConfig = field(default_factory=SystemConfig)
    channel: ChannelParams = field(default_factory=ChannelParams)
    budget: int = DEFAULT_ENUM_BUDGET
    workers: int = 1

    def __post_init__(self) -> None:
        for mode in self.modes:
            if mode not in MODES:
                raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
        if self.alpha_steps < 2:
            raise ValueError("alpha_steps must be at least 2")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class RegionPoint:
    """One achieved rate tuple on (or inside) a region boundary."""

    mode: str
    seed: int
    n_blocks: int
    alpha: tuple[float, ...]
    rates: tuple[float, ...]
    common_rate: float
    wall_ms: float
    error: str | None = None

    def ok(self) -> bool:
        return self.error is None


def config_for_mode(mode: str, system: SystemConfig) -> SystemConfig:
    if mode in ("no-irs-noma", "no-irs-oma"):
        return system.with_overrides(M_R=0)
    return system


def run_region_point(
    mode: str,
    alpha: np.ndarray,
    seed: int,
    system: SystemConfig,
    channel: ChannelParams,
    n_blocks: int,
    budget: int = DEFAULT_ENUM_BUDGET,
    table: PhaseGainTable | None = None,
) -> RegionPoint:
    """Solve one (mode, profile, seed) point; failures land in ``error``."""
    start = time.perf_counter()
    config = config_for_mode(mode, system)
    profile = RateProfile(alpha)
    try:
        ch = sample_channels(config, channel, seed)
        if table is None and mode != "oma-continuous":
            table = PhaseGainTable(ch, config, budget=budget)
        if mode in ("noma-inf", "no-irs-noma"):
            res = solve_noma_infinite(profile, ch, config, budget=budget, table=table)
            rates, value = res.rates, res.value
        elif mode in ("oma-inf", "no-irs-oma"):
            res = solve_oma_infinite(profile, ch, config, budget=budget, table=table)
            rates, value = res.rates, res.value
        elif mode == "oma-continuous":
            res = solve_oma_infinite(profile, ch, config, budget=budget,
                                     phase_mode="continuous")
            rates, value = res.rates, res.value
        elif mode == "noma-finite":
            inf = solve_noma_infinite(profile, ch, config, budget=budget, table=table)
            res = solve_noma_finite(profile, ch, config, N=n_blocks, budget=budget,
                                    infinite_result=inf)
            rates, value = res.rates, res.value
        elif mode == "oma-finite":
            inf = solve_oma_infinite(profile, ch, config, budget=budget, table=table)
            res = solve_oma_finite(profile, ch, config, N=n_blocks, budget=budget,
                                   infinite_result=inf)
            rates, value = res.rates, res.value
        elif mode == "baseline-noma":
            res = baseline_noma(profile, ch, config, N=n_blocks, budget=budget)
            rates, value = res.detail.rates, res.value
        elif mode == "baseline-oma":
            res = baseline_oma(profile, ch, config, N=n_blocks, budget=budget)
            rates, value = res.detail.rates, res.value
        else:
            raise ValueError(f"unknown mode {mode!r}")
        wall = (time.perf_counter() - start) * 1e3
        return RegionPoint(
            mode=mode, seed=seed, n_blocks=n_blocks,
            alpha=tuple(float(a) for a in profile.alpha),
            rates=tuple(float(r) for r in rates),
            common_rate=float(value), wall_ms=wall,
        )
    except Exception as exc:  # per-row failure: record and continue
        wall = (time.perf_counter() - start) * 1e3
        return RegionPoint(
            mode=mode, seed=seed, n_blocks=n_blocks,
            alpha=tuple(float(a) for a in profile.alpha),
            rates=tuple([float("nan")] * profile.K),
            common_rate=float("nan"), wall_ms=wall,
            error=f"{type(exc).__name__}: {exc}",
        )


def alpha_grid(steps: int, K: int = 2) -> list[np.ndarray]:
    """alpha_1 in {0, 1/(steps-1), ..., 1} for the two-user sweep."""
    if K != 2:
        raise ValueError("the sweep front door covers K = 2 (general K via the library)")
    return [np.array([a1, 1.0 - a1]) for a1 in np.linspace(0.0, 1.0, steps)]


def _run_task(args: tuple) -> list[RegionPoint]:
    mode, seed, spec = args
    config = config_for_mode(mode, spec.system)
    points = []
    table = None
    try:
        if mode != "oma-continuous":
            ch = sample_channels(config, spec.channel, seed)
            table = PhaseGainTable(ch, config, budget=spec.budget)
    except Exception:
        table = None  # per-point calls will surface the error per row
    for alpha in alpha_grid(spec.alpha_steps, config.K):
        points.append(
            run_region_point(mode, alpha, seed, spec.system, spec.channel,
                             spec.n_blocks, budget=spec.budget, table=table)
        )
    return points


def sweep_region(spec: ExperimentSpec) -> list[RegionPoint]:
    """Trace region boundaries: rows ordered by (mode, seed, alpha)."""
    tasks = [(mode, seed, spec) for mode in spec.modes for seed in spec.seeds]
    if spec.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(_run_task, tasks))
    else:
        chunks = [_run_task(t) for t in tasks]
    points: list[RegionPoint] = []
    for chunk in chunks:
        points.extend(chunk)
    return points


@dataclass(frozen=True)
class CommonRateRow:
    """Seed-averaged common rate at one grid point of one mode."""

    mode: str
    axis: str
    axis_value: float
    mean_common_rate: float
    n_seeds: int
    n_failed: int


def common_rate_study(
    spec: ExperimentSpec,
    axis: str = "pmax_dbm",
    values: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0),
) -> tuple[list[CommonRateRow], list[RegionPoint]]:
    """Symmetric-profile study: mean common rate per (mode, grid point).

    ``axis`` is ``pmax_dbm`` or ``mr``; failures are excluded from the
    mean and counted per row. Returns the aggregate rows plus every
    underlying point."""
    if axis not in ("pmax_dbm", "mr"):
        raise ValueError("axis must be 'pmax_dbm' or 'mr'")
    alpha = np.full(spec.system.K, 1.0 / spec.system.K)
    rows: list[CommonRateRow] = []
    all_points: list[RegionPoint] = []
    for mode in spec.modes:
        for val in values:
            if axis == "pmax_dbm":
                system = spec.system.with_overrides(P_max=dbm_to_watts(val))
            else:
                system = spec.system.with_overrides(M_R=int(val))
            ok_rates = []
            failed = 0
            for seed in spec.seeds:
                pt = run_region_point(mode, alpha, seed, system, spec.channel,
                                      spec.n_blocks, budget=spec.budget)
                all_points.append(pt)
                if pt.ok():
                    ok_rates.append(pt.common_rate)
                else:
                    failed += 1
            mean = float(np.mean(ok_rates)) if ok_rates else float("nan")
            rows.append(CommonRateRow(mode=mode, axis=axis, axis_value=float(val),
                                      mean_common_rate=mean,
                                      n_seeds=len(ok_rates), n_failed=failed))
    return rows, all_points


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _jnum(x: float) -> float | None:
    """JSON-safe number: 12 significant digits, None for non-finite."""
    return float(_fmt(x)) if np.isfinite(x) else None


def render_points(points: list[RegionPoint], fmt: str) -> str:
    """Points as CSV or JSON text: stable column order, floats at 12
    significant digits."""
    K = len(points[0].alpha) if points else 2
    if fmt == "csv":
        header = (
            ["mode", "seed", "N"]
            + [f"alpha_{k + 1}" for k in range(K)]
            + [f"rate_{k + 1}" for k in range(K)]
            + ["common_rate", "wall_ms"]
        )
        lines = [",".join(header)]
        for pt in points:
            row = [pt.mode, str(pt.seed), str(pt.n_blocks)]
            row += [_fmt(a) for a in pt.alpha]
            row += [_fmt(r) for r in pt.rates]
            row += [_fmt(pt.common_rate), _fmt(pt.wall_ms)]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"
    if fmt == "json":
        payload = [
            {
                "mode": pt.mode,
                "seed": pt.seed,
                "N": pt.n_blocks,
                "alpha": [_jnum(a) for a in pt.alpha],
                "rates": [_jnum(r) for r in pt.rates],
                "common_rate": _jnum(pt.common_rate),
                "wall_ms": _jnum(pt.wall_ms),
                "error": pt.error,
            }
            for pt in points
        ]
        return json.dumps(payload, indent=2) + "\n"
    raise ValueError(f"unknown output format {fmt!r}")


def render_common_rate(rows: list[CommonRateRow], fmt: str) -> str:
    """Aggregated study rows as CSV or JSON text."""
    if fmt == "csv":
        lines = ["mode,axis,axis_value,mean_common_rate,n_seeds,n_failed"]
        for r in rows:
            lines.append(
                f"{r.mode},{r.axis},{_fmt(r.axis_value)},{_fmt(r.mean_common_rate)},"
                f"{r.n_seeds},{r.n_failed}"
            )
        return "\n".join(lines) + "\n"
    if fmt == "json":
        payload = [
            {
                "mode": r.mode,
                "axis": r.axis,
                "axis_value": _jnum(r.axis_value),
                "mean_common_rate": _jnum(r.mean_common_rate),
                "n_seeds": r.n_seeds,
                "n_failed": r.n_failed,
            }
            for r in rows
        ]
        return json.dumps(payload, indent=2) + "\n"
    raise ValueError(f"unknown output format {fmt!r}")


def emit_output(points: list[RegionPoint], fmt: str, path: str | Path) -> Path:
    """Write points as CSV or JSON; I/O errors carry the path."""
    path = Path(path)
    text = render_points(points, fmt)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path

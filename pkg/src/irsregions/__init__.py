"""Capacity and rate region boundaries of an IRS-assisted downlink.

Core layout:

* :mod:`irsregions.channel` - path loss, fading, reflection patterns,
  combined gains, decode orders.
* :mod:`irsregions.solvers` - dense LP, constrained ellipsoid,
  concave maximization.
* :mod:`irsregions.noma` / :mod:`irsregions.oma` - region engines for
  the superposition and orthogonal schemes (ideal limit + finite-block
  inner bounds).
* :mod:`irsregions.baseline` - exhaustive schedule search reference.
* :mod:`irsregions.experiments` - sweeps, common-rate studies, output.
* :mod:`irsregions.service` / :mod:`irsregions.cli` - HTTP wrapper and
  thin command-line client.
"""

from .config import ChannelParams, ConfigError, SystemConfig, load_config
from .channel import (
    BudgetExceededError,
    ChannelRealization,
    DecodingOrder,
    PhaseConfig,
    PhaseGainTable,
    decoding_order,
    effective_gain,
    effective_gains,
    enumerate_phase_configs,
    path_loss,
    sample_channels,
)
from .noma import (
    InfeasibleProfileError,
    NomaFiniteResult,
    NomaInfiniteResult,
    PowerCandidate,
    RateProfile,
    SolutionAtom,
    TimeSharingSchedule,
    noma_rate,
    solve_noma_finite,
    solve_noma_infinite,
)
from .oma import (
    GammaSolution,
    OmaFiniteResult,
    OmaInfiniteResult,
    ResourceAllocation,
    best_phase_for_user,
    oma_rate,
    solve_oma_finite,
    solve_oma_infinite,
)
from .baseline import BaselineResult, baseline_noma, baseline_oma
from .experiments import (
    ExperimentSpec,
    RegionPoint,
    common_rate_study,
    emit_output,
    run_region_point,
    sweep_region,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineResult",
    "BudgetExceededError",
    "ChannelParams",
    "ChannelRealization",
    "ConfigError",
    "DecodingOrder",
    "ExperimentSpec",
    "GammaSolution",
    "InfeasibleProfileError",
    "NomaFiniteResult",
    "NomaInfiniteResult",
    "OmaFiniteResult",
    "OmaInfiniteResult",
    "PhaseConfig",
    "PhaseGainTable",
    "PowerCandidate",
    "RateProfile",
    "RegionPoint",
    "ResourceAllocation",
    "SolutionAtom",
    "SystemConfig",
    "TimeSharingSchedule",
    "baseline_noma",
    "baseline_oma",
    "best_phase_for_user",
    "common_rate_study",
    "decoding_order",
    "effective_gain",
    "effective_gains",
    "emit_output",
    "enumerate_phase_configs",
    "load_config",
    "noma_rate",
    "oma_rate",
    "path_loss",
    "run_region_point",
    "sample_channels",
    "solve_noma_finite",
    "solve_noma_infinite",
    "solve_oma_finite",
    "solve_oma_infinite",
    "sweep_region",
]

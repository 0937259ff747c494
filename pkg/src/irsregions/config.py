"""System and propagation parameters.

``SystemConfig`` collects the scalar knobs of the transmission problem
(users, IRS geometry of sub-surfaces, phase resolution, power budget,
noise, number of reflection-reconfiguration blocks). ``ChannelParams``
collects the propagation model (path-loss law, Rician factors, node
geometry). Both are immutable; powers are stored in linear watts and
ratios in linear scale, converted once from dBm/dB by the loaders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .units import db_to_linear, dbm_to_watts


class ConfigError(ValueError):
    """Raised for inconsistent or out-of-range configuration values."""


@dataclass(frozen=True)
class SystemConfig:
    """Scalar system parameters (linear units).

    ``M_R`` reflecting elements are grouped into ``M = M_R / B``
    sub-surfaces sharing one reflection coefficient; each sub-surface
    phase takes one of ``L = 2**b`` values. ``n_blocks`` is the number
    of times the reflection pattern may be reconfigured within the
    (normalized, T = 1) coherence block. ``coherence_time`` and
    ``config_time`` are informational only; they never enter any
    computation.
    """

    K: int = 2
    M_R: int = 32
    B: int = 4
    b: int = 1
    P_max: float = dbm_to_watts(10.0)
    sigma2: float = dbm_to_watts(-80.0)
    n_blocks: int = 1
    T_norm: float = 1.0
    coherence_time: float | None = None
    config_time: float | None = None

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ConfigError(f"K must be >= 1, got {self.K}")
        if self.M_R < 0 or self.B < 1:
            raise ConfigError(f"need M_R >= 0 and B >= 1, got M_R={self.M_R}, B={self.B}")
        if self.M_R % self.B != 0:
            raise ConfigError(f"M_R={self.M_R} is not a multiple of sub-surface size B={self.B}")
        if self.b < 1:
            raise ConfigError(f"phase resolution b must be >= 1 bit, got {self.b}")
        if self.P_max <= 0.0 or self.sigma2 <= 0.0:
            raise ConfigError("P_max and sigma2 must be positive (watts)")
        if self.n_blocks < 1:
            raise ConfigError(f"n_blocks must be >= 1, got {self.n_blocks}")
        if self.T_norm != 1.0:
            raise ConfigError("block duration is normalized; T_norm must stay 1")

    @property
    def M(self) -> int:
        """Number of sub-surfaces."""
        return self.M_R // self.B

    @property
    def L(self) -> int:
        """Number of discrete phase levels per sub-surface."""
        return 2**self.b

    @property
    def n_phase_configs(self) -> int:
        """Size of the full reflection-pattern set, L**M."""
        return self.L**self.M

    def with_overrides(self, **kwargs) -> "SystemConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class ChannelParams:
    """Propagation model parameters (linear units, distances in meters).

    Path loss is ``rho0 * (d / d0) ** -alpha``. The AP sits at the
    origin, the IRS at ``(d_R, d_V, 0)`` and user k on the x-axis at
    ``(d_users[k], 0, 0)``.
    """

    rho0: float = db_to_linear(-30.0)
    d0: float = 1.0
    alpha_AU: float = 3.5
    alpha_AI: float = 2.2
    alpha_IU: float = 2.8
    K_AI: float = db_to_linear(3.0)
    K_IU: float = db_to_linear(3.0)
    d_R: float = 49.0
    d_V: float = 1.0
    d_users: tuple[float, ...] = (43.0, 50.0)

    def __post_init__(self) -> None:
        if self.rho0 <= 0.0 or self.d0 <= 0.0:
            raise ConfigError("rho0 and d0 must be positive")
        if min(self.alpha_AU, self.alpha_AI, self.alpha_IU) <= 0.0:
            raise ConfigError("path-loss exponents must be positive")
        if self.K_AI < 0.0 or self.K_IU < 0.0:
            raise ConfigError("Rician factors must be non-negative")
        if not self.d_users or min(self.d_users) <= 0.0 or min(self.d_R, self.d_V) <= 0.0:
            raise ConfigError("all node distances must be positive")

    @property
    def ap_position(self) -> tuple[float, float, float]:
        return (0.0, 0.0, 0.0)

    @property
    def irs_position(self) -> tuple[float, float, float]:
        return (self.d_R, self.d_V, 0.0)

    def d_AI(self) -> float:
        """AP to IRS distance."""
        return math.hypot(self.d_R, self.d_V)

    def d_AU(self, k: int) -> float:
        """AP to user-k distance."""
        return self.d_users[k]

    def d_IU(self, k: int) -> float:
        """IRS to user-k distance."""
        return math.hypot(self.d_users[k] - self.d_R, self.d_V)

    def with_overrides(self, **kwargs) -> "ChannelParams":
        return replace(self, **kwargs)


# Keys accepted by the plain-text config file. Powers/ratios carry a
# _dbm/_db suffix and are converted on load; everything else is taken
# verbatim.
_SYSTEM_KEYS = {"K", "M_R", "B", "b", "n_blocks"}
_SYSTEM_DB_KEYS = {"P_max_dBm": "P_max", "sigma2_dBm": "sigma2"}
_CHANNEL_KEYS = {"d0", "alpha_AU", "alpha_AI", "alpha_IU", "d_R", "d_V"}
_CHANNEL_DB_KEYS = {"rho0_dB": "rho0", "K_AI_dB": "K_AI", "K_IU_dB": "K_IU"}


def read_config_items(text: str) -> dict[str, object]:
    """Parse ``key = value`` lines into raw typed values.

    Unknown keys are rejected; '#' starts a comment; ``d_users`` takes a
    comma-separated list of distances. dB/dBm values are returned as
    written (conversion happens when configs are built)."""
    items: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in _SYSTEM_KEYS:
            items[key] = int(value)
        elif key in _SYSTEM_DB_KEYS or key in _CHANNEL_DB_KEYS or key in _CHANNEL_KEYS:
            items[key] = float(value)
        elif key == "d_users":
            items[key] = tuple(float(v) for v in value.split(","))
        else:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
    return items


def parse_config_text(text: str) -> tuple[SystemConfig, ChannelParams]:
    """Parse ``key = value`` lines into config objects."""
    sys_kwargs: dict = {}
    chan_kwargs: dict = {}
    for key, value in read_config_items(text).items():
        if key in _SYSTEM_KEYS:
            sys_kwargs[key] = value
        elif key in _SYSTEM_DB_KEYS:
            sys_kwargs[_SYSTEM_DB_KEYS[key]] = dbm_to_watts(value)
        elif key in _CHANNEL_KEYS or key == "d_users":
            chan_kwargs[key] = value
        elif key in _CHANNEL_DB_KEYS:
            chan_kwargs[_CHANNEL_DB_KEYS[key]] = db_to_linear(value)
    return SystemConfig(**sys_kwargs), ChannelParams(**chan_kwargs)


def load_config(path: str | Path) -> tuple[SystemConfig, ChannelParams]:
    """Load a plain-text config file (see ``parse_config_text``)."""
    return parse_config_text(Path(path).read_text())

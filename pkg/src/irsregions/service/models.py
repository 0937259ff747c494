"""Request/response schemas for the HTTP service.

Configuration values cross the wire in dB/dBm and are converted to
linear units exactly once, when the request is turned into an
``ExperimentSpec``.
"""

from __future__ import annotations

from pydantic import BaseModel, Field, field_validator

from ..config import ChannelParams, SystemConfig
from ..experiments import MODES, ExperimentSpec
from ..units import db_to_linear, dbm_to_watts


class ConfigOverrides(BaseModel):
    """Optional overrides of the default scenario (dB/dBm on the wire)."""

    pmax_dbm: float | None = None
    sigma2_dbm: float | None = None
    mr: int | None = Field(default=None, description="total reflecting elements")
    subsurface: int | None = Field(default=None, description="elements per sub-surface")
    bits: int | None = Field(default=None, description="phase resolution bits")
    users: int | None = None
    rho0_db: float | None = None
    d0: float | None = None
    alpha_au: float | None = None
    alpha_ai: float | None = None
    alpha_iu: float | None = None
    k_ai_db: float | None = None
    k_iu_db: float | None = None
    d_r: float | None = None
    d_v: float | None = None
    d_users: list[float] | None = None

    def apply(self) -> tuple[SystemConfig, ChannelParams]:
        sys_kwargs: dict = {}
        if self.pmax_dbm is not None:
            sys_kwargs["P_max"] = dbm_to_watts(self.pmax_dbm)
        if self.sigma2_dbm is not None:
            sys_kwargs["sigma2"] = dbm_to_watts(self.sigma2_dbm)
        if self.mr is not None:
            sys_kwargs["M_R"] = self.mr
        if self.subsurface is not None:
            sys_kwargs["B"] = self.subsurface
        if self.bits is not None:
            sys_kwargs["b"] = self.bits
        if self.users is not None:
            sys_kwargs["K"] = self.users
        chan_kwargs: dict = {}
        if self.rho0_db is not None:
            chan_kwargs["rho0"] = db_to_linear(self.rho0_db)
        if self.d0 is not None:
            chan_kwargs["d0"] = self.d0
        if self.alpha_au is not None:
            chan_kwargs["alpha_AU"] = self.alpha_au
        if self.alpha_ai is not None:
            chan_kwargs["alpha_AI"] = self.alpha_ai
        if self.alpha_iu is not None:
            chan_kwargs["alpha_IU"] = self.alpha_iu
        if self.k_ai_db is not None:
            chan_kwargs["K_AI"] = db_to_linear(self.k_ai_db)
        if self.k_iu_db is not None:
            chan_kwargs["K_IU"] = db_to_linear(self.k_iu_db)
        if self.d_r is not None:
            chan_kwargs["d_R"] = self.d_r
        if self.d_v is not None:
            chan_kwargs["d_V"] = self.d_v
        if self.d_users is not None:
            chan_kwargs["d_users"] = tuple(self.d_users)
        return SystemConfig(**sys_kwargs), ChannelParams(**chan_kwargs)


class SweepRequest(BaseModel):
    """Region sweep over the two-user rate-profile grid."""

    modes: list[str] = ["noma-inf"]
    alpha_steps: int = 11
    seeds: list[int] = [0]
    n_blocks: int = 1
    budget: int = 2**20
    workers: int = 1
    overrides: ConfigOverrides = ConfigOverrides()

    @field_validator("modes")
    @classmethod
    def _known_modes(cls, v: list[str]) -> list[str]:
        for mode in v:
            if mode not in MODES:
                raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
        return v

    def to_spec(self) -> ExperimentSpec:
        system, channel = self.overrides.apply()
        return ExperimentSpec(
            modes=tuple(self.modes),
            alpha_steps=self.alpha_steps,
            seeds=tuple(self.seeds),
            n_blocks=self.n_blocks,
            system=system,
            channel=channel,
            budget=self.budget,
            workers=self.workers,
        )


class RegionPointModel(BaseModel):
    mode: str
    seed: int
    N: int
    alpha: list[float]
    rates: list[float | None]
    common_rate: float | None
    wall_ms: float
    error: str | None = None


class SweepResponse(BaseModel):
    points: list[RegionPointModel]
    n_failed: int


class CommonRateRequest(BaseModel):
    """Symmetric-profile common-rate study along a grid axis."""

    modes: list[str] = ["noma-inf", "oma-inf"]
    seeds: list[int] = [0]
    n_blocks: int = 1
    axis: str = "pmax_dbm"
    values: list[float] = [0.0, 5.0, 10.0, 15.0, 20.0]
    budget: int = 2**20
    overrides: ConfigOverrides = ConfigOverrides()

    @field_validator("modes")
    @classmethod
    def _known_modes(cls, v: list[str]) -> list[str]:
        for mode in v:
            if mode not in MODES:
                raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
        return v

    @field_validator("axis")
    @classmethod
    def _known_axis(cls, v: str) -> str:
        if v not in ("pmax_dbm", "mr"):
            raise ValueError("axis must be 'pmax_dbm' or 'mr'")
        return v

    def to_spec(self) -> ExperimentSpec:
        system, channel = self.overrides.apply()
        return ExperimentSpec(
            modes=tuple(self.modes),
            alpha_steps=2,
            seeds=tuple(self.seeds),
            n_blocks=self.n_blocks,
            system=system,
            channel=channel,
            budget=self.budget,
        )


class CommonRateRowModel(BaseModel):
    mode: str
    axis: str
    axis_value: float
    mean_common_rate: float | None
    n_seeds: int
    n_failed: int


class CommonRateResponse(BaseModel):
    rows: list[CommonRateRowModel]
    points: list[RegionPointModel]


class HealthResponse(BaseModel):
    status: str
    version: str
    modes: list[str]

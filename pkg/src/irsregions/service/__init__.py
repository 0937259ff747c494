"""FastAPI service wrapping the region engines."""

from .app import app
from .models import (
    CommonRateRequest,
    CommonRateResponse,
    ConfigOverrides,
    HealthResponse,
    RegionPointModel,
    SweepRequest,
    SweepResponse,
)

__all__ = [
    "app",
    "CommonRateRequest",
    "CommonRateResponse",
    "ConfigOverrides",
    "HealthResponse",
    "RegionPointModel",
    "SweepRequest",
    "SweepResponse",
]

"""HTTP wrapper around the region engines.

Endpoints:

* ``GET /health`` - liveness plus the supported mode list.
* ``POST /sweep`` - two-user region sweep, rows per (mode, seed, alpha).
* ``POST /common-rate`` - symmetric-profile study along a grid axis.

Run with ``uvicorn irsregions.service.app:app``. The CLI drives the
same handlers in process, so everything reachable over HTTP is also
reachable offline.
"""

from __future__ import annotations

import math

from fastapi import FastAPI

from .. import __version__
from ..experiments import (
    MODES,
    RegionPoint,
    common_rate_study,
    sweep_region,
)
from .models import (
    CommonRateRequest,
    CommonRateResponse,
    CommonRateRowModel,
    HealthResponse,
    RegionPointModel,
    SweepRequest,
    SweepResponse,
)

app = FastAPI(title="irsregions", version=__version__)


def _point_model(pt: RegionPoint) -> RegionPointModel:
    def clean(x: float) -> float | None:
        return x if math.isfinite(x) else None

    return RegionPointModel(
        mode=pt.mode,
        seed=pt.seed,
        N=pt.n_blocks,
        alpha=list(pt.alpha),
        rates=[clean(r) for r in pt.rates],
        common_rate=clean(pt.common_rate),
        wall_ms=pt.wall_ms,
        error=pt.error,
    )


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__, modes=list(MODES))


@app.post("/sweep", response_model=SweepResponse)
def sweep(request: SweepRequest) -> SweepResponse:
    points = sweep_region(request.to_spec())
    return SweepResponse(
        points=[_point_model(p) for p in points],
        n_failed=sum(1 for p in points if not p.ok()),
    )


@app.post("/common-rate", response_model=CommonRateResponse)
def common_rate(request: CommonRateRequest) -> CommonRateResponse:
    rows, points = common_rate_study(
        request.to_spec(), axis=request.axis, values=tuple(request.values)
    )
    return CommonRateResponse(
        rows=[
            CommonRateRowModel(
                mode=r.mode,
                axis=r.axis,
                axis_value=r.axis_value,
                mean_common_rate=(
                    r.mean_common_rate if math.isfinite(r.mean_common_rate) else None
                ),
                n_seeds=r.n_seeds,
                n_failed=r.n_failed,
            )
            for r in rows
        ],
        points=[_point_model(p) for p in points],
    )

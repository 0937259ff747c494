"""Command-line client for region sweeps and common-rate studies.

The CLI builds the same request models the HTTP service consumes. By
default the request is executed in process; with ``--server`` it is
posted to a running service instead, and ``--serve`` starts one.

Exit codes: 0 full success, 2 some rows failed, 1 fatal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import httpx

from .config import ConfigError, read_config_items
from .experiments import (
    MODES,
    CommonRateRow,
    RegionPoint,
    common_rate_study,
    render_common_rate,
    render_points,
    sweep_region,
)
from .service.models import CommonRateRequest, ConfigOverrides, SweepRequest

# config-file key -> override field
_FILE_TO_OVERRIDE = {
    "K": "users",
    "M_R": "mr",
    "B": "subsurface",
    "b": "bits",
    "P_max_dBm": "pmax_dbm",
    "sigma2_dBm": "sigma2_dbm",
    "rho0_dB": "rho0_db",
    "d0": "d0",
    "alpha_AU": "alpha_au",
    "alpha_AI": "alpha_ai",
    "alpha_IU": "alpha_iu",
    "K_AI_dB": "k_ai_db",
    "K_IU_dB": "k_iu_db",
    "d_R": "d_r",
    "d_V": "d_v",
    "d_users": "d_users",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irsregions",
        description="Pareto boundaries and common-rate studies for an "
        "IRS-assisted multi-user downlink.",
    )
    parser.add_argument("--study", choices=["sweep", "common-rate"], default="sweep",
                        help="region sweep (default) or symmetric common-rate study")
    parser.add_argument("--mode", default="noma-inf",
                        help=f"engine(s), comma separated; one of {', '.join(MODES)}")
    parser.add_argument("--alpha-steps", type=int, default=11,
                        help="points on the two-user profile grid")
    parser.add_argument("--seeds", default="0", help="comma-separated channel seeds")
    parser.add_argument("--n-blocks", type=int, default=1,
                        help="reflection reconfiguration blocks for finite-N modes")
    parser.add_argument("--pmax-dbm", type=float, default=None, help="transmit power budget")
    parser.add_argument("--mr", type=int, default=None, help="total reflecting elements")
    parser.add_argument("--bits", type=int, default=None, help="phase resolution bits")
    parser.add_argument("--config", type=Path, default=None, help="key = value config file")
    parser.add_argument("--out", default="-", help="output path, '-' for stdout")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    parser.add_argument("--budget", type=int, default=2**20,
                        help="hard cap on enumerated configurations/schedules")
    parser.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    parser.add_argument("--axis", choices=["pmax_dbm", "mr"], default="pmax_dbm",
                        help="grid axis for the common-rate study")
    parser.add_argument("--axis-values", default="0,5,10,15,20",
                        help="comma-separated grid values for the study axis")
    parser.add_argument("--server", default=None,
                        help="base URL of a running service; default runs in process")
    parser.add_argument("--serve", action="store_true", help="start the HTTP service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    return parser


def overrides_from_args(args: argparse.Namespace) -> ConfigOverrides:
    """File keys first, flags override (flags > file > defaults)."""
    fields: dict = {}
    if args.config is not None:
        try:
            items = read_config_items(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        for key, value in items.items():
            if key == "n_blocks":
                continue  # handled through --n-blocks only
            fields[_FILE_TO_OVERRIDE[key]] = list(value) if key == "d_users" else value
    if args.pmax_dbm is not None:
        fields["pmax_dbm"] = args.pmax_dbm
    if args.mr is not None:
        fields["mr"] = args.mr
    if args.bits is not None:
        fields["bits"] = args.bits
    return ConfigOverrides(**fields)


def _parse_csv_list(text: str, cast) -> list:
    return [cast(v.strip()) for v in text.split(",") if v.strip() != ""]


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def run_sweep(args: argparse.Namespace) -> int:
    request = SweepRequest(
        modes=_parse_csv_list(args.mode, str),
        alpha_steps=args.alpha_steps,
        seeds=_parse_csv_list(args.seeds, int),
        n_blocks=args.n_blocks,
        budget=args.budget,
        workers=args.workers,
        overrides=overrides_from_args(args),
    )
    if args.server:
        with httpx.Client(base_url=args.server, timeout=None) as client:
            resp = client.post("/sweep", json=request.model_dump())
            resp.raise_for_status()
            body = resp.json()
        points = [
            RegionPoint(
                mode=p["mode"], seed=p["seed"], n_blocks=p["N"],
                alpha=tuple(p["alpha"]),
                rates=tuple(r if r is not None else float("nan") for r in p["rates"]),
                common_rate=(p["common_rate"] if p["common_rate"] is not None
                             else float("nan")),
                wall_ms=p["wall_ms"], error=p.get("error"),
            )
            for p in body["points"]
        ]
        n_failed = body["n_failed"]
    else:
        points = sweep_region(request.to_spec())
        n_failed = sum(1 for p in points if not p.ok())
    _write(render_points(points, args.format), args.out)
    return 2 if n_failed else 0


def run_common_rate(args: argparse.Namespace) -> int:
    request = CommonRateRequest(
        modes=_parse_csv_list(args.mode, str),
        seeds=_parse_csv_list(args.seeds, int),
        n_blocks=args.n_blocks,
        axis=args.axis,
        values=_parse_csv_list(args.axis_values, float),
        budget=args.budget,
        overrides=overrides_from_args(args),
    )
    if args.server:
        with httpx.Client(base_url=args.server, timeout=None) as client:
            resp = client.post("/common-rate", json=request.model_dump())
            resp.raise_for_status()
            body = resp.json()
        rows = [
            CommonRateRow(
                mode=r["mode"], axis=r["axis"], axis_value=r["axis_value"],
                mean_common_rate=(r["mean_common_rate"]
                                  if r["mean_common_rate"] is not None else float("nan")),
                n_seeds=r["n_seeds"], n_failed=r["n_failed"],
            )
            for r in body["rows"]
        ]
        n_failed = sum(r.n_failed for r in rows)
    else:
        rows, points = common_rate_study(request.to_spec(), axis=request.axis,
                                         values=tuple(request.values))
        n_failed = sum(r.n_failed for r in rows)
    _write(render_common_rate(rows, args.format), args.out)
    return 2 if n_failed else 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.serve:
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0
    try:
        if args.study == "sweep":
            return run_sweep(args)
        return run_common_rate(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except httpx.HTTPError as exc:
        print(f"server error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

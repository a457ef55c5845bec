"""FastAPI service exposing the experiment engine.

The command-line front end is a thin client of these endpoints; any other
client (notebooks, batch schedulers) can drive the same API. Computation is
synchronous: a request returns when its experiment finishes, carrying the
CSV text and run manifest for the caller to persist.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import ConfigError, SystemConfig
from ..de import DeError
from ..experiments import CurveSpec, rate_region, run_curve, validate_de
from .schemas import (
    ConfigPayload,
    CurveRequest,
    CurveResponse,
    HealthResponse,
    RateRegionRequest,
    RateRegionResponse,
    ValidateRequest,
    ValidateResponse,
)

app = FastAPI(
    title="jrcsim",
    version=__version__,
    description="Monte Carlo and deterministic-equivalent analysis of a "
                "MIMO radar coexisting with a massive MIMO cell.",
)


def _build_config(payload: ConfigPayload) -> SystemConfig:
    try:
        return payload.to_config()
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.get("/config/defaults")
def config_defaults() -> dict:
    return SystemConfig().as_dict()


@app.post("/curves", response_model=CurveResponse)
def curves(request: CurveRequest) -> CurveResponse:
    config = _build_config(request.config)
    spec = CurveSpec(
        kind=request.kind,
        sweep=request.sweep,
        grid=tuple(request.grid) if request.grid else None,
        trials=request.trials,
        seed=request.seed,
        threads=request.threads,
    )
    try:
        result = run_curve(config, spec)
    except (ConfigError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return CurveResponse(
        kind=result.kind, points=result.points, csv=result.csv,
        manifest=result.manifest, failures=result.failures,
    )


@app.post("/rate-region", response_model=RateRegionResponse)
def rate_region_endpoint(request: RateRegionRequest) -> RateRegionResponse:
    config = _build_config(request.config)
    try:
        result = rate_region(
            config,
            mode=request.mode,
            radar_grid=tuple(request.radar_grid) if request.radar_grid else None,
            comm_grid=tuple(request.comm_grid) if request.comm_grid else None,
            trials=request.trials,
            seed=request.seed,
            threads=request.threads,
            mc_check_trials=request.mc_check_trials,
        )
    except (ConfigError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    except DeError as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc
    return RateRegionResponse(
        mode=result.mode, points=result.points, frontier=result.frontier,
        chord=result.chord, csv=result.csv, manifest=result.manifest,
        failures=result.failures,
    )


@app.post("/validate-de", response_model=ValidateResponse)
def validate_de_endpoint(request: ValidateRequest) -> ValidateResponse:
    config = _build_config(request.config)
    report = validate_de(
        config,
        trials=request.trials,
        seed=request.seed,
        threads=request.threads,
        gamma_threshold=request.gamma_threshold,
        term_threshold=request.term_threshold,
    )
    return ValidateResponse(
        passed=report["passed"], flags=report["flags"],
        failures=report["failures"], report=report,
    )

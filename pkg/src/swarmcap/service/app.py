"""HTTP API wrapping the simulator: validate, run, batch.

Endpoints compute synchronously; a batch request blocks until every run in
the experiment finishes. The CLI offers the same operations for local use.
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import ConfigError, ExperimentSpec, SimConfig
from ..engine import PlacementError, Simulation, validate_config
from ..harness import run_experiment
from .schemas import (
    BatchResponse,
    BoundsReportModel,
    HealthResponse,
    RunRequest,
    RunResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="swarmcap", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/validate", response_model=BoundsReportModel)
    def validate(config: SimConfig):
        try:
            report = validate_config(config)
        except (PlacementError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return BoundsReportModel.model_validate(report.to_dict())

    @app.post("/run", response_model=RunResponse)
    def run(request: RunRequest):
        try:
            report = validate_config(request.config)
            if not report.passed and not (
                request.force or request.config.allow_bound_violation
            ):
                raise HTTPException(
                    status_code=400,
                    detail={
                        "message": "certificate failed",
                        "failures": [c.to_dict() for c in report.failures()],
                    },
                )
            sim = Simulation(request.config, run_seed=request.seed)
            result = sim.run(collect_trace=request.include_trace)
        except HTTPException:
            raise
        except (ConfigError, PlacementError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return RunResponse.model_validate(result.to_dict(with_trace=request.include_trace))

    @app.post("/batch", response_model=BatchResponse)
    def batch(spec: ExperimentSpec, workers: int | None = None):
        try:
            summary = run_experiment(spec, workers=workers)
        except (ConfigError, PlacementError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return BatchResponse.model_validate(summary.to_dict())

    return app


app = create_app()

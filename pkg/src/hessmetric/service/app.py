"""FastAPI application wrapping the scenario commands.

Each endpoint accepts a scenario (params, named profiles, optional weight,
options) and returns a report: one row per check with expected/actual values,
the tolerance used, and the provenance of the expected value.
"""

from __future__ import annotations

import inspect

from fastapi import FastAPI, HTTPException

from .. import __version__
from .. import scenarios as sc
from ..profiles import ConvexityError, CoordinateError
from .schemas import (
    HealthModel,
    ReportModel,
    ReportRowModel,
    ReproduceRequest,
    ScenarioModel,
)


def _report(command: str, rows) -> ReportModel:
    row_models = [ReportRowModel(**r.to_dict()) for r in rows]
    return ReportModel(
        command=command,
        rows=row_models,
        all_passed=all(r.passed for r in rows),
        version=__version__,
    )


def _scenario_from_model(model: ScenarioModel) -> sc.Scenario:
    try:
        return sc.scenario_from_dict(model.model_dump())
    except sc.ScenarioError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _filtered_kwargs(func, options: dict) -> dict:
    accepted = inspect.signature(func).parameters
    out = {}
    for key, value in options.items():
        if key not in accepted:
            raise HTTPException(
                status_code=422, detail=f"unknown option {key!r} for this example"
            )
        out[key] = value
    return out


def create_app() -> FastAPI:
    app = FastAPI(title="hessmetric", version=__version__)

    @app.get("/health", response_model=HealthModel)
    def health() -> HealthModel:
        return HealthModel(status="ok", version=__version__)

    @app.post("/commands/{command}", response_model=ReportModel)
    def run_command(command: str, scenario: ScenarioModel) -> ReportModel:
        if command not in sc.COMMANDS:
            raise HTTPException(
                status_code=404,
                detail=f"unknown command {command!r}; known: {', '.join(sorted(sc.COMMANDS))}",
            )
        scn = _scenario_from_model(scenario)
        try:
            rows = sc.COMMANDS[command](scn)
        except (sc.ScenarioError, CoordinateError, ConvexityError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except ArithmeticError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return _report(command, rows)

    @app.post("/reproduce/{example_id}", response_model=ReportModel)
    def run_reproduce(example_id: str, request: ReproduceRequest) -> ReportModel:
        if example_id not in sc.EXAMPLES:
            raise HTTPException(
                status_code=404,
                detail=f"unknown example id {example_id!r}; known: {', '.join(sorted(sc.EXAMPLES))}",
            )
        func = sc.EXAMPLES[example_id]
        rows = func(**_filtered_kwargs(func, request.options))
        return _report(f"reproduce:{example_id}", rows)

    @app.post("/selftest", response_model=ReportModel)
    def run_selftest(request: ReproduceRequest) -> ReportModel:
        rows = sc.selftest(**_filtered_kwargs(sc.selftest, request.options))
        return _report("selftest", rows)

    return app


app = create_app()

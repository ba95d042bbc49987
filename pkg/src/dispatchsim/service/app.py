"""FastAPI service wrapping the simulator, the optimizer, and the study runner.

Long-running requests (a full study in particular) are served synchronously;
clients should disable their read timeout.  The bundled CLI is a thin client
of these endpoints.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..model import (
    ConfigError,
    SCENARIOS,
    baseline_config,
    bounds_for_scenario,
    config_from_mapping,
    config_violations,
    scenario_from_id,
    validate_config,
)
from ..runner import (
    fast_profile,
    RunManifest,
    ga_params_from_mapping,
    ga_result_payload,
    policy_from_values,
    optimize_scenario,
    run_study,
    scenario_study_payload,
    sim_result_payload,
    simulate_once,
    stats_from_mapping,
)
from . import schemas


def _manifest_from_request(config: schemas.ConfigModel | None,
                           ga: schemas.GaModel | None = None,
                           stats: schemas.StatsModel | None = None,
                           fast: bool = False) -> RunManifest:
    try:
        network = validate_config(config_from_mapping(config.to_mapping() if config else {}))
        manifest = RunManifest(
            config=network,
            ga=ga_params_from_mapping(ga.model_dump(exclude_none=True) if ga else None),
            stats=stats_from_mapping(stats.model_dump(exclude_none=True) if stats else None),
        )
    except ConfigError as e:
        raise HTTPException(status_code=422, detail={"violations": e.violations}) from e
    return fast_profile(manifest) if fast else manifest


def _scenario_or_422(scenario_id: int):
    try:
        return scenario_from_id(scenario_id)
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e)) from e


def create_app() -> FastAPI:
    app = FastAPI(
        title="dispatchsim",
        version=__version__,
        description=(
            "Single-warehouse, multi-retailer order dispatch simulation and "
            "policy optimization under delivery-window penalties."
        ),
    )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.get("/scenarios", response_model=list[schemas.ScenarioInfo])
    def scenarios() -> list[schemas.ScenarioInfo]:
        config = baseline_config()
        return [
            schemas.ScenarioInfo(
                id=s.id,
                description=s.description,
                dispatch_kind=s.dispatch_kind,
                topology=s.topology,
                priority=s.priority,
                variables=[b.name for b in bounds_for_scenario(s, config)],
            )
            for s in SCENARIOS.values()
        ]

    @app.post("/validate", response_model=schemas.ValidateResponse)
    def validate(request: schemas.ValidateRequest) -> schemas.ValidateResponse:
        try:
            config = config_from_mapping(request.config.to_mapping() if request.config else {})
        except ConfigError as e:
            return schemas.ValidateResponse(valid=False, violations=e.violations)
        violations = config_violations(config)
        return schemas.ValidateResponse(valid=not violations, violations=violations)

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(request: schemas.SimulateRequest) -> schemas.SimulateResponse:
        manifest = _manifest_from_request(request.config)
        scenario = _scenario_or_422(request.scenario)
        try:
            policy = policy_from_values(
                scenario, manifest.config, request.policy.r, request.policy.Q,
                thresholds=request.policy.M, intervals=request.policy.S,
            )
        except ConfigError as e:
            raise HTTPException(status_code=422, detail={"violations": e.violations}) from e
        result = simulate_once(manifest.config, scenario, policy, request.seed,
                               horizon=request.horizon, record_trace=request.include_trace)
        return schemas.SimulateResponse(**sim_result_payload(result))

    @app.post("/optimize", response_model=schemas.GaRunModel)
    def optimize(request: schemas.OptimizeRequest) -> schemas.GaRunModel:
        manifest = _manifest_from_request(request.config, request.ga, request.stats,
                                          request.fast)
        scenario = _scenario_or_422(request.scenario)
        result = optimize_scenario(manifest.config, scenario, manifest.ga,
                                   manifest.stats.sim_precision(), request.seed)
        bounds = bounds_for_scenario(scenario, manifest.config)
        return schemas.GaRunModel(**ga_result_payload(result, scenario, bounds))

    @app.post("/study", response_model=schemas.StudyResponse)
    def study(request: schemas.StudyRequest) -> schemas.StudyResponse:
        manifest = _manifest_from_request(request.config, request.ga, request.stats,
                                          request.fast)
        ids = request.scenarios if request.scenarios is not None else sorted(SCENARIOS)
        for scenario_id in ids:
            _scenario_or_422(scenario_id)
        report = run_study(manifest.config, ids, manifest.ga, manifest.stats,
                           request.seed, workers=request.workers)
        entries = [scenario_study_payload(s, manifest.config) for s in report.scenarios]
        return schemas.StudyResponse(base_seed=request.seed, scenarios=entries)

    return app


app = create_app()

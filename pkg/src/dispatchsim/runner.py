"""Orchestration: manifests, single runs, the six-scenario study, artifacts.

Everything here returns plain JSON-able payload dicts alongside typed results,
so the HTTP service can ship them unchanged and the CLI can render the same
payloads to CSV files.  A study's outputs are fully determined by the base
seed: scenario run k uses a seed derived from (base seed, scenario id, k).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from itertools import count
from pathlib import Path
from typing import Any, Iterable, Mapping

from .ga import GaParams, GaResult, make_simulation_evaluator, run_ssga
from .model import (
    ConfigError,
    DecisionBounds,
    NetworkConfig,
    PolicyParams,
    QuantityDispatch,
    Scenario,
    ScheduleDispatch,
    bounds_for_scenario,
    check_policy,
    config_from_mapping,
    decode_chromosome,
    scenario_from_id,
    validate_config,
)
from .randomness import derive_seed
from .simulation import SimResult, run_replication
from .stats import PrecisionPolicy, mean_and_ci, run_until_precise

_TAG_STUDY = 20


@dataclass(frozen=True)
class StatsSettings:
    """Replication-control settings for both layers of the study."""

    confidence: float = 0.95
    delta: float = 0.05
    max_sim_reps: int = 100  # cap on simulation replicates per fitness evaluation
    max_ga_reps: int = 10    # cap on whole-optimizer replicates per scenario

    def sim_precision(self) -> PrecisionPolicy:
        return PrecisionPolicy(self.confidence, self.delta, self.max_sim_reps)

    def ga_precision(self) -> PrecisionPolicy:
        return PrecisionPolicy(self.confidence, self.delta, self.max_ga_reps)


@dataclass(frozen=True)
class RunManifest:
    """Validated run inputs parsed from a configuration document."""

    config: NetworkConfig
    ga: GaParams
    stats: StatsSettings
    scenario_id: int | None = None


def ga_params_from_mapping(data: Mapping[str, Any] | None) -> GaParams:
    data = dict(data or {})
    return GaParams(
        population_size=int(data.get("population_size", 100)),
        generations=int(data.get("generations", 1000)),
        crossover_probability=float(data.get("crossover_probability", 1.0)),
        mutation_probability=float(data.get("mutation_probability", 0.2)),
        tournament_size=int(data.get("tournament_size", 3)),
        gaussian_sigma=float(data.get("gaussian_sigma", 10.0)),
    )


def stats_from_mapping(data: Mapping[str, Any] | None) -> StatsSettings:
    data = dict(data or {})
    return StatsSettings(
        confidence=float(data.get("confidence", 0.95)),
        delta=float(data.get("delta", 0.05)),
        max_sim_reps=int(data.get("max_sim_reps", 100)),
        max_ga_reps=int(data.get("max_ga_reps", 10)),
    )


def manifest_from_mapping(data: Mapping[str, Any]) -> RunManifest:
    config = validate_config(config_from_mapping(data))
    scenario_raw = data.get("scenario")
    scenario_id: int | None = None
    if scenario_raw is not None:
        scenario_id = int(scenario_raw.get("id")) if isinstance(scenario_raw, Mapping) else int(scenario_raw)
        scenario_from_id(scenario_id)  # unknown ids fail here
    return RunManifest(
        config=config,
        ga=ga_params_from_mapping(data.get("ga")),
        stats=stats_from_mapping(data.get("stats")),
        scenario_id=scenario_id,
    )


def load_manifest(path: str | Path) -> RunManifest:
    """Parse and validate a configuration file, filling defaults where omitted."""
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"config file not found: {path}"])
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError([f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}"]) from e
    if not isinstance(data, Mapping):
        raise ConfigError([f"{path}: top level must be an object"])
    return manifest_from_mapping(data)


def fast_profile(manifest: RunManifest) -> RunManifest:
    """Small search settings for pipeline smoke runs; not study quality."""
    return RunManifest(
        config=manifest.config,
        ga=replace(manifest.ga, population_size=20, generations=100),
        stats=replace(manifest.stats, max_sim_reps=10),
        scenario_id=manifest.scenario_id,
    )


def policy_from_values(scenario: Scenario, config: NetworkConfig, r: int, q: int,
                       thresholds: Iterable[int] | None = None,
                       intervals: Iterable[int] | None = None) -> PolicyParams:
    """Assemble and structurally validate explicit policy parameters."""
    thresholds = tuple(int(v) for v in (thresholds or ()))
    intervals = tuple(int(v) for v in (intervals or ()))
    if thresholds and intervals:
        raise ConfigError(["give either thresholds (M) or intervals (S), not both"])
    if thresholds:
        dispatch: QuantityDispatch | ScheduleDispatch = QuantityDispatch(thresholds)
    elif intervals:
        dispatch = ScheduleDispatch(intervals)
    else:
        raise ConfigError([f"scenario {scenario.id} needs dispatch parameters "
                           f"({'M' if scenario.dispatch_kind == 'quantity' else 'S'} values)"])
    policy = PolicyParams(int(r), int(q), dispatch)
    check_policy(policy, scenario, config)
    return policy


def simulate_once(config: NetworkConfig, scenario: Scenario, policy: PolicyParams,
                  seed: int, horizon: float | None = None,
                  record_trace: bool = True) -> SimResult:
    """One seeded replication with the given explicit policy."""
    check_policy(policy, scenario, config)
    return run_replication(config, policy, scenario, seed, horizon=horizon,
                           record_trace=record_trace)


def optimize_scenario(config: NetworkConfig, scenario: Scenario, ga: GaParams,
                      sim_precision: PrecisionPolicy, seed: int) -> GaResult:
    """One optimizer run for a scenario with simulation-backed fitness."""
    bounds = bounds_for_scenario(scenario, config)
    evaluator = make_simulation_evaluator(config, scenario, bounds, sim_precision, seed)
    return run_ssga(bounds, evaluator, ga, seed)


def study_run_seed(base_seed: int, scenario_id: int, run_index: int) -> int:
    return derive_seed(base_seed, _TAG_STUDY, scenario_id, run_index)


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    ci_halfwidth: float


@dataclass(frozen=True)
class ScenarioStudy:
    """Aggregated outcome of the optimizer replicates for one scenario."""

    scenario: Scenario
    n_runs: int
    precise: bool
    fitness: MetricSummary
    total_cost: MetricSummary
    fill_rate: MetricSummary
    r: MetricSummary
    q: MetricSummary
    best_run: GaResult          # lowest mean total cost among the replicates
    runs: tuple[GaResult, ...]


@dataclass(frozen=True)
class StudyReport:
    base_seed: int
    scenarios: tuple[ScenarioStudy, ...]


def _summarize(values: list[float], confidence: float) -> MetricSummary:
    mean, width = mean_and_ci(values, confidence)
    return MetricSummary(mean, width / 2.0)


def run_scenario_study(config: NetworkConfig, scenario: Scenario, ga: GaParams,
                       stats: StatsSettings, base_seed: int) -> ScenarioStudy:
    """Replicate the optimizer for one scenario until its best fitness is precise."""
    sim_precision = stats.sim_precision()
    runs: list[GaResult] = []

    def one_run(seed: int) -> float:
        result = optimize_scenario(config, scenario, ga, sim_precision, seed)
        runs.append(result)
        return result.best_fitness.fitness

    summary = run_until_precise(
        one_run, stats.ga_precision(),
        (study_run_seed(base_seed, scenario.id, k) for k in count()),
    )
    confidence = stats.confidence
    best_run = min(runs, key=lambda run: run.best_fitness.total_cost)
    return ScenarioStudy(
        scenario=scenario,
        n_runs=summary.n,
        precise=summary.precise,
        fitness=_summarize([run.best_fitness.fitness for run in runs], confidence),
        total_cost=_summarize([run.best_fitness.total_cost for run in runs], confidence),
        fill_rate=_summarize([run.best_fitness.fill_rate for run in runs], confidence),
        r=_summarize([float(run.best_genes[0]) for run in runs], confidence),
        q=_summarize([float(run.best_genes[1]) for run in runs], confidence),
        best_run=best_run,
        runs=tuple(runs),
    )


def run_study(config: NetworkConfig, scenario_ids: Iterable[int], ga: GaParams,
              stats: StatsSettings, base_seed: int, workers: int = 1) -> StudyReport:
    """Study one or more scenarios; results are independent of ``workers``.

    Scenario seeds derive from (base seed, scenario id, run index) alone, so
    running scenarios in parallel processes changes wall time only.
    """
    ids = [int(sid) for sid in scenario_ids]
    for sid in ids:
        scenario_from_id(sid)
    if workers > 1 and len(ids) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=min(workers, len(ids))) as pool:
            futures = [
                pool.submit(run_scenario_study, config, scenario_from_id(sid), ga, stats, base_seed)
                for sid in ids
            ]
            scenarios = tuple(f.result() for f in futures)
    else:
        scenarios = tuple(
            run_scenario_study(config, scenario_from_id(sid), ga, stats, base_seed)
            for sid in ids
        )
    return StudyReport(base_seed, scenarios)


# -- payloads: JSON-able mirrors of the result types --------------------------

def breakdown_payload(result: SimResult) -> dict[str, Any]:
    b = result.breakdown
    return {
        "holding": b.holding,
        "ordering": b.ordering,
        "delivery": b.delivery,
        "penalty": b.penalty,
        "orders_received": b.orders_received,
        "orders_filled_immediately": b.orders_filled_immediately,
    }


def sim_result_payload(result: SimResult) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "total_cost": result.total_cost,
        "fill_rate": result.fill_rate,
        "breakdown": breakdown_payload(result),
        "audit": {
            "initial_stock": result.audit.initial_stock,
            "items_supplied": result.audit.items_supplied,
            "items_dispatched": result.audit.items_dispatched,
            "items_in_queues": result.audit.items_in_queues,
            "on_hand_end": result.audit.on_hand_end,
            "replenishments_ordered": result.audit.replenishments_ordered,
            "truck_departures": len(result.audit.departures),
        },
    }
    if result.trace is not None:
        payload["trace"] = [[t, on_hand, position] for t, on_hand, position in result.trace]
    return payload


def best_solution_payload(run: GaResult, scenario: Scenario,
                          bounds: DecisionBounds) -> dict[str, Any]:
    policy = decode_chromosome(run.best_genes, scenario, bounds)
    record = run.best_fitness
    return {
        "genes": list(run.best_genes),
        "r": policy.r,
        "Q": policy.Q,
        "dispatch_params": policy.describe_dispatch(),
        "fitness": record.fitness,
        "total_cost": record.total_cost,
        "fill_rate": record.fill_rate,
        "n_reps": record.n_reps,
        "precise": record.precise,
    }


def convergence_payload(run: GaResult) -> list[list[float]]:
    return [[s.generation, s.best_f, s.worst_f, s.spread] for s in run.log]


def ga_result_payload(run: GaResult, scenario: Scenario,
                      bounds: DecisionBounds) -> dict[str, Any]:
    return {
        "scenario": scenario.id,
        "seed": run.seed,
        "best": best_solution_payload(run, scenario, bounds),
        "convergence": convergence_payload(run),
        "evaluations": run.evaluations,
    }


def _metric_payload(m: MetricSummary) -> dict[str, float]:
    return {"mean": m.mean, "ci_halfwidth": m.ci_halfwidth}


def scenario_study_payload(study: ScenarioStudy, config: NetworkConfig) -> dict[str, Any]:
    bounds = bounds_for_scenario(study.scenario, config)
    return {
        "scenario": study.scenario.id,
        "description": study.scenario.description,
        "n_runs": study.n_runs,
        "precise": study.precise,
        "metrics": {
            "fitness": _metric_payload(study.fitness),
            "total_cost": _metric_payload(study.total_cost),
            "fill_rate": _metric_payload(study.fill_rate),
        },
        "decision_summary": {
            "r": _metric_payload(study.r),
            "Q": _metric_payload(study.q),
        },
        "best": best_solution_payload(study.best_run, study.scenario, bounds),
        "runs": [ga_result_payload(run, study.scenario, bounds) for run in study.runs],
    }


def study_payload(report: StudyReport, config: NetworkConfig) -> dict[str, Any]:
    return {
        "base_seed": report.base_seed,
        "scenarios": [scenario_study_payload(s, config) for s in report.scenarios],
    }


# -- artifact writers ----------------------------------------------------------

TRACE_HEADER = ["time", "on_hand", "inventory_position"]
LEDGER_HEADER = ["component", "amount"]
CONVERGENCE_HEADER = ["generation", "best_F", "worst_F", "spread"]
SUMMARY_HEADER = ["scenario", "metric", "mean", "ci_halfwidth"]
BEST_SOLUTIONS_HEADER = ["scenario", "TC", "r", "Q", "dispatch_params"]
RQ_HEADER = ["scenario", "variable", "mean", "ci_halfwidth"]


def _write_csv(path: Path, header: list[str], rows: Iterable[Iterable[Any]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(list(row))


def write_trace_csv(trace: Iterable[Iterable[Any]], path: str | Path) -> None:
    _write_csv(Path(path), TRACE_HEADER, trace)


def write_ledger_csv(breakdown: Mapping[str, Any], path: str | Path) -> None:
    rows = [[name, breakdown[name]] for name in ("holding", "ordering", "delivery", "penalty")]
    _write_csv(Path(path), LEDGER_HEADER, rows)


def write_convergence_csv(convergence: Iterable[Iterable[Any]], path: str | Path) -> None:
    _write_csv(Path(path), CONVERGENCE_HEADER, convergence)


def summary_rows(study: Mapping[str, Any]) -> list[list[Any]]:
    rows = []
    for entry in study["scenarios"]:
        for metric in ("fitness", "total_cost", "fill_rate"):
            m = entry["metrics"][metric]
            rows.append([entry["scenario"], metric, m["mean"], m["ci_halfwidth"]])
    return rows


def best_solution_rows(study: Mapping[str, Any]) -> list[list[Any]]:
    rows = []
    for entry in study["scenarios"]:
        best = entry["best"]
        rows.append([entry["scenario"], best["total_cost"], best["r"], best["Q"],
                     best["dispatch_params"]])
    return rows


def rq_rows(study: Mapping[str, Any]) -> list[list[Any]]:
    rows = []
    for entry in study["scenarios"]:
        for variable in ("r", "Q"):
            m = entry["decision_summary"][variable]
            rows.append([entry["scenario"], variable, m["mean"], m["ci_halfwidth"]])
    return rows


def write_study_artifacts(study: Mapping[str, Any], out_dir: str | Path) -> list[Path]:
    """Write the study CSV set plus the JSON mirror; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    targets = [
        (out / "summary.csv", SUMMARY_HEADER, summary_rows(study)),
        (out / "best_solutions.csv", BEST_SOLUTIONS_HEADER, best_solution_rows(study)),
        (out / "rq_summary.csv", RQ_HEADER, rq_rows(study)),
    ]
    for path, header, rows in targets:
        _write_csv(path, header, rows)
        written.append(path)
    for entry in study["scenarios"]:
        for run in entry["runs"]:
            path = out / f"convergence_scenario{entry['scenario']}_run{run['seed']}.csv"
            write_convergence_csv(run["convergence"], path)
            written.append(path)
    json_path = out / "study.json"
    json_path.write_text(json.dumps(study, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written.append(json_path)
    return written

"""Manifest loading, study orchestration, and artifact emission."""

import csv
import json
from itertools import count

import pytest

from dispatchsim.ga import GaParams
from dispatchsim.model import ConfigError, scenario_from_id
from dispatchsim.runner import (
    StatsSettings,
    best_solution_rows,
    fast_profile,
    ga_params_from_mapping,
    load_manifest,
    manifest_from_mapping,
    optimize_scenario,
    policy_from_values,
    rq_rows,
    run_scenario_study,
    run_study,
    sim_result_payload,
    simulate_once,
    study_payload,
    study_run_seed,
    summary_rows,
    write_study_artifacts,
)
from dispatchsim.stats import run_until_precise

SMALL_GA = GaParams(population_size=6, generations=12)
SMALL_STATS = StatsSettings(max_sim_reps=4, max_ga_reps=3)


def write_config(tmp_path, payload):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_empty_document_yields_baseline_defaults(tmp_path):
    manifest = load_manifest(write_config(tmp_path, {}))
    config = manifest.config
    assert [r.order_quantity for r in config.retailers] == [50, 100, 150]
    assert config.costs.delivery_cost == 500.0
    assert config.horizon_days == 100.0
    assert manifest.ga == GaParams()  # population 100, 1000 generations, Pm 0.2
    assert manifest.stats.delta == 0.05
    assert manifest.scenario_id is None


def test_bundled_baseline_file_matches_defaults(tmp_path):
    from importlib.resources import files

    bundled = files("dispatchsim.configs").joinpath("baseline.json")
    manifest = manifest_from_mapping(json.loads(bundled.read_text()))
    defaults = load_manifest(write_config(tmp_path, {}))
    assert manifest.config == defaults.config
    assert manifest.ga == defaults.ga
    assert manifest.scenario_id == 2


def test_partial_ga_block_fills_rest(tmp_path):
    manifest = load_manifest(write_config(tmp_path, {"ga": {"generations": 77}}))
    assert manifest.ga.generations == 77
    assert manifest.ga.population_size == 100
    assert manifest.ga.mutation_probability == 0.2


def test_unknown_scenario_rejected(tmp_path):
    with pytest.raises(ValueError, match="unknown scenario"):
        load_manifest(write_config(tmp_path, {"scenario": {"id": 7}}))


def test_parse_error_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "horizon_days": 100,\n  oops\n}', encoding="utf-8")
    with pytest.raises(ConfigError, match="line 3"):
        load_manifest(path)


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_manifest(tmp_path / "nope.json")


def test_invalid_instance_forwards_violations(tmp_path):
    path = write_config(tmp_path, {"window": {"earliest": 3, "latest": 3}})
    with pytest.raises(ConfigError, match="C1 < C2"):
        load_manifest(path)


def test_fast_profile_settings(tmp_path):
    manifest = fast_profile(load_manifest(write_config(tmp_path, {})))
    assert manifest.ga.population_size == 20
    assert manifest.ga.generations == 100
    assert manifest.stats.max_sim_reps == 10


def test_ga_params_from_mapping_defaults():
    params = ga_params_from_mapping(None)
    assert (params.population_size, params.generations) == (100, 1000)
    assert params.crossover_probability == 1.0
    assert params.tournament_size == 3
    assert params.gaussian_sigma == 10.0


def test_policy_from_values_validation(baseline):
    scenario = scenario_from_id(2)
    with pytest.raises(ConfigError, match="dispatch parameters"):
        policy_from_values(scenario, baseline, 300, 350)
    with pytest.raises(ConfigError, match="not both"):
        policy_from_values(scenario, baseline, 300, 350, thresholds=[300], intervals=[2])
    with pytest.raises(ConfigError, match="interval"):
        policy_from_values(scenario, baseline, 300, 350, intervals=[2])
    with pytest.raises(ConfigError, match="3 threshold"):
        policy_from_values(scenario_from_id(1), baseline, 300, 350, thresholds=[300])
    policy = policy_from_values(scenario, baseline, 303, 261, thresholds=[300])
    assert policy.describe_dispatch() == "M=300"


def test_simulate_once_trace_and_payload(baseline):
    scenario = scenario_from_id(2)
    policy = policy_from_values(scenario, baseline, 50, 350, thresholds=[300])
    result = simulate_once(baseline, scenario, policy, seed=3, horizon=30.0)
    payload = sim_result_payload(result)
    assert set(payload) == {"total_cost", "fill_rate", "breakdown", "audit", "trace"}
    # position jumps by +Q at reorders; on-hand drops by an order size at fulfillments
    positions = [p for _, _, p in result.trace]
    jumps = {b - a for a, b in zip(positions, positions[1:]) if b > a}
    assert 350 in jumps
    on_hand = [h for _, h, _ in result.trace]
    drops = {a - b for a, b in zip(on_hand, on_hand[1:]) if a > b}
    assert drops <= {50, 100, 150, 200, 250, 300, 350, 400}
    assert {50, 100, 150} & drops


def test_single_scenario_study_equals_wrapped_optimize(baseline):
    config = baseline
    scenario = scenario_from_id(2)
    base_seed = 11
    study = run_scenario_study(config, scenario, SMALL_GA, SMALL_STATS, base_seed)

    runs = []

    def one_run(seed):
        result = optimize_scenario(config, scenario, SMALL_GA,
                                   SMALL_STATS.sim_precision(), seed)
        runs.append(result)
        return result.best_fitness.fitness

    summary = run_until_precise(one_run, SMALL_STATS.ga_precision(),
                                (study_run_seed(base_seed, 2, k) for k in count()))
    assert study.n_runs == summary.n
    assert study.runs == tuple(runs)
    assert study.best_run == min(runs, key=lambda r: r.best_fitness.total_cost)


def test_run_study_workers_equivalence(baseline):
    sequential = run_study(baseline, [2, 5], SMALL_GA, SMALL_STATS, 4, workers=1)
    parallel = run_study(baseline, [2, 5], SMALL_GA, SMALL_STATS, 4, workers=2)
    assert sequential == parallel


def test_study_payload_and_artifacts(tmp_path, baseline):
    report = run_study(baseline, [2], SMALL_GA, SMALL_STATS, 9)
    payload = study_payload(report, baseline)

    entry = payload["scenarios"][0]
    assert entry["scenario"] == 2
    assert entry["n_runs"] >= 3
    assert set(entry["metrics"]) == {"fitness", "total_cost", "fill_rate"}
    assert len(entry["runs"]) == entry["n_runs"]
    for run in entry["runs"]:
        assert len(run["convergence"]) == SMALL_GA.generations + 1

    out = tmp_path / "artifacts"
    written = write_study_artifacts(payload, out)
    names = {p.name for p in written}
    assert {"summary.csv", "best_solutions.csv", "rq_summary.csv", "study.json"} <= names

    with (out / "summary.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["scenario", "metric", "mean", "ci_halfwidth"]
    assert len(rows) == 1 + 3  # one scenario, three metrics
    assert {row[1] for row in rows[1:]} == {"fitness", "total_cost", "fill_rate"}

    with (out / "best_solutions.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["scenario", "TC", "r", "Q", "dispatch_params"]
    assert rows[1][0] == "2"
    assert rows[1][4].startswith("M=")

    with (out / "rq_summary.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["scenario", "variable", "mean", "ci_halfwidth"]
    assert [row[1] for row in rows[1:]] == ["r", "Q"]

    convergence_files = sorted(out.glob("convergence_scenario2_run*.csv"))
    assert len(convergence_files) == entry["n_runs"]
    with convergence_files[0].open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["generation", "best_F", "worst_F", "spread"]
    assert len(rows) == 1 + SMALL_GA.generations + 1

    mirrored = json.loads((out / "study.json").read_text())
    assert mirrored == payload


def test_artifacts_fully_determined_by_seed(tmp_path, baseline):
    def produce(into):
        report = run_study(baseline, [5], SMALL_GA, SMALL_STATS, 21)
        write_study_artifacts(study_payload(report, baseline), into)
        return {p.name: p.read_bytes() for p in into.iterdir()}

    first = produce(tmp_path / "a")
    second = produce(tmp_path / "b")
    assert first == second


def test_summary_row_builders_cover_all_scenarios(baseline):
    report = run_study(baseline, [2, 5], SMALL_GA, SMALL_STATS, 13)
    payload = study_payload(report, baseline)
    assert {row[0] for row in summary_rows(payload)} == {2, 5}
    assert len(best_solution_rows(payload)) == 2
    assert len(rq_rows(payload)) == 4

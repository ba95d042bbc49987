"""HTTP service endpoints, exercised in-process."""

import pytest
from fastapi.testclient import TestClient

from dispatchsim.service.app import create_app

SMALL_GA = {"population_size": 6, "generations": 10}
SMALL_STATS = {"max_sim_reps": 4, "max_ga_reps": 3}


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"


def test_scenarios_listing(client):
    body = client.get("/scenarios").json()
    assert [entry["id"] for entry in body] == [1, 2, 3, 4, 5, 6]
    by_id = {entry["id"]: entry for entry in body}
    assert by_id[1]["variables"] == ["r", "Q", "M_1", "M_2", "M_3"]
    assert by_id[5]["variables"] == ["r", "Q", "S"]
    assert by_id[3]["priority"] == "sof"


def test_validate_defaults_ok(client):
    body = client.post("/validate", json={}).json()
    assert body == {"valid": True, "violations": []}


def test_validate_reports_violations(client):
    body = client.post("/validate", json={
        "config": {"window": {"earliest": 3, "latest": 3}}}).json()
    assert body["valid"] is False
    assert any("C1 < C2" in v for v in body["violations"])


def test_simulate_round_trip(client):
    request = {
        "scenario": 2,
        "policy": {"r": 303, "Q": 261, "M": [300]},
        "seed": 42,
        "include_trace": True,
    }
    body = client.post("/simulate", json=request).json()
    b = body["breakdown"]
    assert body["total_cost"] == pytest.approx(
        b["holding"] + b["ordering"] + b["delivery"] + b["penalty"], rel=1e-9)
    assert 0.0 <= body["fill_rate"] <= 1.0
    assert body["trace"][0] == [0.0, 303, 303]
    # same request, same bytes of data
    again = client.post("/simulate", json=request).json()
    assert again == body


def test_simulate_without_trace(client):
    request = {"scenario": 2, "policy": {"r": 100, "Q": 300, "M": [300]},
               "seed": 1, "include_trace": False, "horizon": 20}
    body = client.post("/simulate", json=request).json()
    assert body["trace"] is None


def test_simulate_wrong_dispatch_kind_422(client):
    response = client.post("/simulate", json={
        "scenario": 5, "policy": {"r": 100, "Q": 300, "M": [300]}})
    assert response.status_code == 422
    assert "interval" in str(response.json()["detail"])


def test_simulate_unknown_scenario_422(client):
    response = client.post("/simulate", json={
        "scenario": 7, "policy": {"r": 100, "Q": 300, "M": [300]}})
    assert response.status_code == 422
    assert "unknown scenario" in str(response.json()["detail"])


def test_simulate_invalid_config_422(client):
    response = client.post("/simulate", json={
        "scenario": 2, "policy": {"r": 100, "Q": 300, "M": [300]},
        "config": {"retailers": [{"order_quantity": 600, "arrival_rate": 0.5}]}})
    assert response.status_code == 422
    assert any("truck capacity" in v for v in response.json()["detail"]["violations"])


def test_optimize_small_run(client):
    request = {"scenario": 5, "seed": 3, "ga": SMALL_GA, "stats": SMALL_STATS,
               "config": {"horizon_days": 30}}
    body = client.post("/optimize", json=request).json()
    assert body["scenario"] == 5
    best = body["best"]
    assert best["dispatch_params"].startswith("S=")
    assert 50 <= best["r"] <= 300
    assert 200 <= best["Q"] <= 1000
    assert len(body["convergence"]) == SMALL_GA["generations"] + 1
    assert body["evaluations"] >= SMALL_GA["population_size"]


def test_study_single_scenario(client):
    request = {"scenarios": [2], "seed": 5, "ga": SMALL_GA, "stats": SMALL_STATS,
               "config": {"horizon_days": 30}}
    body = client.post("/study", json=request).json()
    assert body["base_seed"] == 5
    entry = body["scenarios"][0]
    assert entry["scenario"] == 2
    assert entry["n_runs"] >= 3
    assert entry["metrics"]["fill_rate"]["mean"] <= 1.0
    assert len(entry["runs"]) == entry["n_runs"]


def test_fast_profile_flag(client):
    request = {"scenario": 2, "seed": 1, "fast": True,
               "ga": {"generations": 40}, "config": {"horizon_days": 20}}
    body = client.post("/optimize", json=request).json()
    # fast profile overrides the generation count and population
    assert len(body["convergence"]) == 100 + 1

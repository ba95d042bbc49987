"""Domain model: validation, scenario bounds, gene encoding."""

import random

import pytest

from dispatchsim.model import (
    ConfigError,
    MULTI_QUEUE,
    NetworkConfig,
    QuantityDispatch,
    RetailerSpec,
    SCENARIOS,
    ScheduleDispatch,
    SOF,
    TransportSpec,
    DeliveryWindow,
    baseline_config,
    bounds_for_scenario,
    config_from_mapping,
    config_to_mapping,
    config_violations,
    decode_chromosome,
    encode_policy,
    scenario_from_id,
    validate_config,
)


def test_baseline_instance_is_valid():
    config = validate_config(baseline_config())
    assert config.n_retailers == 3
    assert [r.order_quantity for r in config.retailers] == [50, 100, 150]
    assert config.transport.truck_capacity == 500
    assert (config.window.earliest, config.window.latest) == (3.0, 6.0)


def test_degenerate_window_rejected():
    config = baseline_config()
    bad = NetworkConfig(retailers=config.retailers, window=DeliveryWindow(3.0, 3.0))
    violations = config_violations(bad)
    assert any("C1 < C2" in v for v in violations)
    with pytest.raises(ConfigError, match="C1 < C2"):
        validate_config(bad)


def test_order_exceeding_capacity_rejected():
    bad = NetworkConfig(retailers=(RetailerSpec(1, 600, 0.5),))
    violations = config_violations(bad)
    assert any("exceeds truck capacity" in v for v in violations)


def test_all_violations_reported_together():
    bad = NetworkConfig(
        retailers=(RetailerSpec(1, 600, -1.0),),
        window=DeliveryWindow(5.0, 2.0),
        transport=TransportSpec(min_dispatch_gap=0.0),
        horizon_days=-1,
    )
    with pytest.raises(ConfigError) as err:
        validate_config(bad)
    messages = err.value.violations
    assert len(messages) >= 4


def test_zero_arrival_rate_allowed():
    config = NetworkConfig(retailers=(RetailerSpec(1, 50, 0.0),))
    assert config_violations(config) == []


def test_config_mapping_round_trip(baseline):
    mapping = config_to_mapping(baseline)
    assert config_from_mapping(mapping) == baseline


def test_scenario_table():
    assert set(SCENARIOS) == {1, 2, 3, 4, 5, 6}
    assert SCENARIOS[2].dispatch_kind == "quantity"
    assert SCENARIOS[2].topology == "single"
    assert SCENARIOS[2].priority == "fifo"
    assert SCENARIOS[6].priority == "sof"
    with pytest.raises(ValueError, match="unknown scenario"):
        scenario_from_id(7)


def test_sof_multi_queue_rejected():
    from dispatchsim.model import Scenario

    with pytest.raises(ValueError, match="single queue"):
        Scenario(9, "quantity", MULTI_QUEUE, SOF, "invalid combination")


def test_bounds_scenario1_multi_quantity(baseline):
    bounds = bounds_for_scenario(scenario_from_id(1), baseline)
    assert [b.name for b in bounds] == ["r", "Q", "M_1", "M_2", "M_3"]
    assert (bounds[0].lower, bounds[0].upper, bounds[0].step) == (50, 300, 1)
    assert (bounds[1].lower, bounds[1].upper, bounds[1].step) == (200, 1000, 1)
    assert (bounds[2].lower, bounds[2].upper, bounds[2].step) == (50, 500, 50)
    assert (bounds[3].lower, bounds[3].upper, bounds[3].step) == (100, 500, 100)
    assert (bounds[4].lower, bounds[4].upper, bounds[4].step) == (150, 500, 150)
    # grids only contain multiples of the order size within capacity
    assert bounds[4].grid() == [150, 300, 450]
    assert bounds[3].grid() == [100, 200, 300, 400, 500]


def test_bounds_scenario2_single_quantity(baseline):
    bounds = bounds_for_scenario(scenario_from_id(2), baseline)
    assert [b.name for b in bounds] == ["r", "Q", "M"]
    m = bounds[2]
    assert (m.lower, m.upper, m.step) == (50, 500, 50)
    assert m.grid() == list(range(50, 501, 50))


@pytest.mark.parametrize("scenario_id", [5, 6])
def test_bounds_single_schedule(baseline, scenario_id):
    bounds = bounds_for_scenario(scenario_from_id(scenario_id), baseline)
    assert [b.name for b in bounds] == ["r", "Q", "S"]
    assert bounds[2].grid() == [1, 2, 3, 4, 5, 6]


def test_bounds_scenario4_multi_schedule(baseline):
    bounds = bounds_for_scenario(scenario_from_id(4), baseline)
    assert [b.name for b in bounds] == ["r", "Q", "S_1", "S_2", "S_3"]
    assert all(b.grid() == [1, 2, 3, 4, 5, 6] for b in bounds[2:])


def test_clamp_snaps_to_grid(baseline):
    bounds = bounds_for_scenario(scenario_from_id(1), baseline)
    m3 = bounds[4]  # multiples of 150 up to capacity 500
    assert m3.clamp(600) == 450
    assert m3.clamp(0) == 150
    assert m3.clamp(310) == 300
    r = bounds[0]
    assert r.clamp(45) == 50  # brought back to the nearest extreme
    assert r.clamp(107.3) == 107


def test_decode_scenario2(baseline):
    scenario = scenario_from_id(2)
    # The reported best for this scenario has r above the default search range;
    # widening the range is config data, decode itself stays strict.
    config = config_from_mapping({"bounds": {"r": [50, 310]}})
    bounds = bounds_for_scenario(scenario, config)
    policy = decode_chromosome((303, 261, 300), scenario, bounds)
    assert (policy.r, policy.Q) == (303, 261)
    assert policy.dispatch == QuantityDispatch((300,))
    assert policy.describe_dispatch() == "M=300"


def test_decode_scenario4(baseline):
    scenario = scenario_from_id(4)
    bounds = bounds_for_scenario(scenario, baseline)
    policy = decode_chromosome((277, 316, 3, 3, 3), scenario, bounds)
    assert (policy.r, policy.Q) == (277, 316)
    assert policy.dispatch == ScheduleDispatch((3, 3, 3))
    assert policy.describe_dispatch() == "S_1=3;S_2=3;S_3=3"


def test_decode_arity_mismatch(baseline):
    scenario = scenario_from_id(2)
    bounds = bounds_for_scenario(scenario, baseline)
    with pytest.raises(ValueError, match="expects 3 genes"):
        decode_chromosome((303, 261), scenario, bounds)


def test_decode_out_of_bounds_gene(baseline):
    scenario = scenario_from_id(2)
    bounds = bounds_for_scenario(scenario, baseline)
    with pytest.raises(ValueError, match="outside"):
        decode_chromosome((40, 261, 300), scenario, bounds)
    with pytest.raises(ValueError, match="outside"):
        decode_chromosome((100, 261, 225), scenario, bounds)  # M off the 50-grid


def test_encode_decode_round_trip_all_scenarios(baseline):
    rng = random.Random(7)
    for scenario_id in range(1, 7):
        scenario = scenario_from_id(scenario_id)
        bounds = bounds_for_scenario(scenario, baseline)
        for _ in range(200):
            genes = tuple(rng.choice(b.grid()) for b in bounds)
            policy = decode_chromosome(genes, scenario, bounds)
            assert encode_policy(policy, scenario) == genes

"""Warehouse order-dispatch simulation and policy optimization.

A discrete-event model of a single warehouse serving multiple retailers under
a continuous-review (r, Q) replenishment policy, delivery-window penalties,
and consolidated truck dispatch, paired with a steady-state genetic algorithm
that tunes reordering and dispatch parameters against a combined cost and
fill-rate objective.
"""

__version__ = "0.1.0"

from .model import (
    ConfigError,
    NetworkConfig,
    PolicyParams,
    QuantityDispatch,
    Scenario,
    ScheduleDispatch,
    SCENARIOS,
    baseline_config,
    bounds_for_scenario,
    decode_chromosome,
    encode_policy,
    scenario_from_id,
    validate_config,
)
from .simulation import SimResult, run_replication
from .stats import PrecisionPolicy, ReplicateSummary, mean_and_ci, run_until_precise, t_quantile
from .ga import FitnessRecord, GaParams, GaResult, run_ssga
from .runner import (
    RunManifest,
    StatsSettings,
    StudyReport,
    load_manifest,
    optimize_scenario,
    run_study,
    simulate_once,
)

__all__ = [
    "__version__",
    "ConfigError", "NetworkConfig", "PolicyParams", "QuantityDispatch", "Scenario",
    "ScheduleDispatch", "SCENARIOS", "baseline_config", "bounds_for_scenario",
    "decode_chromosome", "encode_policy", "scenario_from_id", "validate_config",
    "SimResult", "run_replication",
    "PrecisionPolicy", "ReplicateSummary", "mean_and_ci", "run_until_precise", "t_quantile",
    "FitnessRecord", "GaParams", "GaResult", "run_ssga",
    "RunManifest", "StatsSettings", "StudyReport", "load_manifest",
    "optimize_scenario", "run_study", "simulate_once",
]

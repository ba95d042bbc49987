"""Pydantic request and response models for the HTTP service.

Request models leave every instance field optional; omitted fields fall back
to the baseline three-retailer instance defaults when the core package builds
the actual configuration, so the service and library share one set of
defaults.
"""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field


class RetailerModel(BaseModel):
    id: int | None = None
    order_quantity: int
    arrival_rate: float


class CostsModel(BaseModel):
    delivery_cost: float | None = None
    ordering_cost: float | None = None
    holding_rate: float | None = None
    penalty_rate: float | None = None


class TransportModel(BaseModel):
    truck_capacity: int | None = None
    supplier_lead_time: tuple[float, float] | None = None
    direct_trip_time: tuple[float, float] | None = None
    leg_time: tuple[float, float] | None = None
    min_dispatch_gap: float | None = None


class WindowModel(BaseModel):
    earliest: float | None = None
    latest: float | None = None


class BoundsModel(BaseModel):
    r: tuple[int, int] | None = None
    Q: tuple[int, int] | None = None
    S: tuple[int, int] | None = None


class ConfigModel(BaseModel):
    retailers: list[RetailerModel] | None = None
    costs: CostsModel | None = None
    transport: TransportModel | None = None
    window: WindowModel | None = None
    horizon_days: float | None = None
    bounds: BoundsModel | None = None

    def to_mapping(self) -> dict[str, Any]:
        return self.model_dump(exclude_none=True)


class GaModel(BaseModel):
    population_size: int | None = None
    generations: int | None = None
    crossover_probability: float | None = None
    mutation_probability: float | None = None
    tournament_size: int | None = None
    gaussian_sigma: float | None = None


class StatsModel(BaseModel):
    confidence: float | None = None
    delta: float | None = None
    max_sim_reps: int | None = None
    max_ga_reps: int | None = None


class PolicyModel(BaseModel):
    """Explicit policy parameters: r, Q, and thresholds or intervals."""

    r: int
    Q: int
    M: list[int] | None = None  # quantity thresholds, one per queue
    S: list[int] | None = None  # schedule intervals in whole days, one per queue


class ValidateRequest(BaseModel):
    config: ConfigModel | None = None


class ValidateResponse(BaseModel):
    valid: bool
    violations: list[str]


class SimulateRequest(BaseModel):
    scenario: int
    policy: PolicyModel
    config: ConfigModel | None = None
    seed: int = 0
    horizon: float | None = None
    include_trace: bool = True


class BreakdownModel(BaseModel):
    holding: float
    ordering: float
    delivery: float
    penalty: float
    orders_received: int
    orders_filled_immediately: int


class AuditModel(BaseModel):
    initial_stock: int
    items_supplied: int
    items_dispatched: int
    items_in_queues: int
    on_hand_end: int
    replenishments_ordered: int
    truck_departures: int


class SimulateResponse(BaseModel):
    total_cost: float
    fill_rate: float
    breakdown: BreakdownModel
    audit: AuditModel
    trace: list[tuple[float, int, int]] | None = None


class OptimizeRequest(BaseModel):
    scenario: int
    config: ConfigModel | None = None
    seed: int = 0
    ga: GaModel | None = None
    stats: StatsModel | None = None
    fast: bool = False


class BestSolutionModel(BaseModel):
    genes: list[int]
    r: int
    Q: int
    dispatch_params: str
    fitness: float
    total_cost: float
    fill_rate: float
    n_reps: int
    precise: bool


class GaRunModel(BaseModel):
    scenario: int
    seed: int
    best: BestSolutionModel
    convergence: list[tuple[int, float, float, float]]
    evaluations: int


class MetricModel(BaseModel):
    mean: float
    ci_halfwidth: float


class ScenarioMetricsModel(BaseModel):
    fitness: MetricModel
    total_cost: MetricModel
    fill_rate: MetricModel


class DecisionSummaryModel(BaseModel):
    r: MetricModel
    Q: MetricModel


class ScenarioStudyModel(BaseModel):
    scenario: int
    description: str
    n_runs: int
    precise: bool
    metrics: ScenarioMetricsModel
    decision_summary: DecisionSummaryModel
    best: BestSolutionModel
    runs: list[GaRunModel]


class StudyRequest(BaseModel):
    config: ConfigModel | None = None
    scenarios: list[int] | None = Field(default=None, description="defaults to all six")
    seed: int = 0
    ga: GaModel | None = None
    stats: StatsModel | None = None
    fast: bool = False
    workers: int = Field(default=1, ge=1, le=8,
                         description="process parallelism across scenarios")


class StudyResponse(BaseModel):
    base_seed: int
    scenarios: list[ScenarioStudyModel]


class ScenarioInfo(BaseModel):
    id: int
    description: str
    dispatch_kind: str
    topology: str
    priority: str
    variables: list[str]


class HealthResponse(BaseModel):
    status: str
    version: str

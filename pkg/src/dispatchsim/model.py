"""Domain model: network instance data, scenarios, decision variables.

All instance parameters (retailers, costs, transport, delivery window) live
here, together with the six dispatch-process scenarios, the decision-variable
bounds that define the optimizer's search space, and the mapping between gene
sequences and dispatch policy parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

# Dispatch policy kinds
QUANTITY = "quantity"
SCHEDULE = "schedule"

# Queue topologies
SINGLE_QUEUE = "single"
MULTI_QUEUE = "multi"

# Loading priorities for the single shared queue
FIFO = "fifo"
SOF = "sof"  # smallest orders first, regardless of waiting time


class ConfigError(ValueError):
    """Invalid configuration; carries the full list of violations."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


@dataclass(frozen=True)
class RetailerSpec:
    """One retailer: fixed order size and Poisson order stream."""

    id: int
    order_quantity: int
    arrival_rate: float  # orders per day; 0 means the retailer never orders


@dataclass(frozen=True)
class CostParams:
    delivery_cost: float = 500.0   # per truck trip
    ordering_cost: float = 200.0   # per warehouse replenishment order
    holding_rate: float = 5.0      # per item per day on hand
    penalty_rate: float = 5.0      # per item per day of delay or window violation


@dataclass(frozen=True)
class DeliveryWindow:
    """Contractual delivery interval, measured from order placement."""

    earliest: float = 3.0
    latest: float = 6.0

    @property
    def width(self) -> float:
        return self.latest - self.earliest


@dataclass(frozen=True)
class TransportSpec:
    truck_capacity: int = 500
    supplier_lead_time: tuple[float, float] = (2.0, 4.0)  # warehouse replenishment, days
    direct_trip_time: tuple[float, float] = (2.0, 4.0)    # single-retailer trip, days
    leg_time: tuple[float, float] = (1.0, 2.0)            # each leg of a multi-stop trip
    min_dispatch_gap: float = 1.0                          # min days between truck departures


@dataclass(frozen=True)
class Scenario:
    """One design of the order dispatch process."""

    id: int
    dispatch_kind: str  # QUANTITY or SCHEDULE
    topology: str       # SINGLE_QUEUE or MULTI_QUEUE
    priority: str       # FIFO or SOF; SOF only meaningful for the single queue
    description: str

    def __post_init__(self):
        if self.priority == SOF and self.topology == MULTI_QUEUE:
            raise ValueError("smallest-order-first priority requires a single queue")


SCENARIOS: dict[int, Scenario] = {
    1: Scenario(1, QUANTITY, MULTI_QUEUE, FIFO, "quantity threshold, one queue per retailer"),
    2: Scenario(2, QUANTITY, SINGLE_QUEUE, FIFO, "quantity threshold, single queue, FIFO loading"),
    3: Scenario(3, QUANTITY, SINGLE_QUEUE, SOF, "quantity threshold, single queue, smallest-order-first loading"),
    4: Scenario(4, SCHEDULE, MULTI_QUEUE, FIFO, "fixed schedule, one queue per retailer"),
    5: Scenario(5, SCHEDULE, SINGLE_QUEUE, FIFO, "fixed schedule, single queue, FIFO loading"),
    6: Scenario(6, SCHEDULE, SINGLE_QUEUE, SOF, "fixed schedule, single queue, smallest-order-first loading"),
}


def scenario_from_id(scenario_id: int) -> Scenario:
    try:
        return SCENARIOS[scenario_id]
    except KeyError:
        raise ValueError(f"unknown scenario {scenario_id!r}; valid ids are 1..6") from None


@dataclass(frozen=True)
class NetworkConfig:
    """Full instance: retailers, costs, transport, window, horizon, variable ranges."""

    retailers: tuple[RetailerSpec, ...]
    costs: CostParams = CostParams()
    transport: TransportSpec = TransportSpec()
    window: DeliveryWindow = DeliveryWindow()
    horizon_days: float = 100.0
    r_bounds: tuple[int, int] = (50, 300)
    q_bounds: tuple[int, int] = (200, 1000)
    s_bounds: tuple[int, int] = (1, 6)

    @property
    def n_retailers(self) -> int:
        return len(self.retailers)

    @property
    def min_order_quantity(self) -> int:
        return min(r.order_quantity for r in self.retailers)


def baseline_retailers() -> tuple[RetailerSpec, ...]:
    """The three-retailer baseline instance (combined arrival rate 1/day)."""
    rate = 1.0 / 3.0
    return (
        RetailerSpec(1, 50, rate),
        RetailerSpec(2, 100, rate),
        RetailerSpec(3, 150, rate),
    )


def baseline_config() -> NetworkConfig:
    return NetworkConfig(retailers=baseline_retailers())


def _pair(value: Any, name: str) -> tuple[float, float]:
    try:
        lo, hi = value
        return (float(lo), float(hi))
    except (TypeError, ValueError):
        raise ConfigError([f"{name}: expected a [lo, hi] pair, got {value!r}"]) from None


def _int_pair(value: Any, name: str) -> tuple[int, int]:
    lo, hi = _pair(value, name)
    return (int(lo), int(hi))


def config_from_mapping(data: Mapping[str, Any]) -> NetworkConfig:
    """Build a NetworkConfig from a parsed JSON object, filling baseline defaults."""
    retailers_raw = data.get("retailers")
    if retailers_raw is None:
        retailers = baseline_retailers()
    else:
        retailers = tuple(
            RetailerSpec(
                id=int(r.get("id", i + 1)),
                order_quantity=int(r["order_quantity"]),
                arrival_rate=float(r["arrival_rate"]),
            )
            for i, r in enumerate(retailers_raw)
        )
        retailers = tuple(sorted(retailers, key=lambda r: r.id))

    costs_raw = dict(data.get("costs") or {})
    costs = CostParams(
        delivery_cost=float(costs_raw.get("delivery_cost", 500.0)),
        ordering_cost=float(costs_raw.get("ordering_cost", 200.0)),
        holding_rate=float(costs_raw.get("holding_rate", 5.0)),
        penalty_rate=float(costs_raw.get("penalty_rate", 5.0)),
    )

    transport_raw = dict(data.get("transport") or {})
    transport = TransportSpec(
        truck_capacity=int(transport_raw.get("truck_capacity", 500)),
        supplier_lead_time=_pair(transport_raw.get("supplier_lead_time", (2.0, 4.0)), "transport.supplier_lead_time"),
        direct_trip_time=_pair(transport_raw.get("direct_trip_time", (2.0, 4.0)), "transport.direct_trip_time"),
        leg_time=_pair(transport_raw.get("leg_time", (1.0, 2.0)), "transport.leg_time"),
        min_dispatch_gap=float(transport_raw.get("min_dispatch_gap", 1.0)),
    )

    window_raw = dict(data.get("window") or {})
    window = DeliveryWindow(
        earliest=float(window_raw.get("earliest", 3.0)),
        latest=float(window_raw.get("latest", 6.0)),
    )

    bounds_raw = dict(data.get("bounds") or {})
    return NetworkConfig(
        retailers=retailers,
        costs=costs,
        transport=transport,
        window=window,
        horizon_days=float(data.get("horizon_days", 100.0)),
        r_bounds=_int_pair(bounds_raw.get("r", (50, 300)), "bounds.r"),
        q_bounds=_int_pair(bounds_raw.get("Q", (200, 1000)), "bounds.Q"),
        s_bounds=_int_pair(bounds_raw.get("S", (1, 6)), "bounds.S"),
    )


def config_to_mapping(config: NetworkConfig) -> dict[str, Any]:
    return {
        "retailers": [
            {"id": r.id, "order_quantity": r.order_quantity, "arrival_rate": r.arrival_rate}
            for r in config.retailers
        ],
        "costs": {
            "delivery_cost": config.costs.delivery_cost,
            "ordering_cost": config.costs.ordering_cost,
            "holding_rate": config.costs.holding_rate,
            "penalty_rate": config.costs.penalty_rate,
        },
        "transport": {
            "truck_capacity": config.transport.truck_capacity,
            "supplier_lead_time": list(config.transport.supplier_lead_time),
            "direct_trip_time": list(config.transport.direct_trip_time),
            "leg_time": list(config.transport.leg_time),
            "min_dispatch_gap": config.transport.min_dispatch_gap,
        },
        "window": {"earliest": config.window.earliest, "latest": config.window.latest},
        "horizon_days": config.horizon_days,
        "bounds": {
            "r": list(config.r_bounds),
            "Q": list(config.q_bounds),
            "S": list(config.s_bounds),
        },
    }


def config_violations(config: NetworkConfig) -> list[str]:
    """Check every instance invariant; returns one message per violation."""
    v: list[str] = []
    if not config.retailers:
        v.append("retailers: at least one retailer is required")
    seen_ids: set[int] = set()
    for i, r in enumerate(config.retailers):
        path = f"retailers[{i}] (id {r.id})"
        if r.id in seen_ids:
            v.append(f"{path}: duplicate retailer id")
        seen_ids.add(r.id)
        if r.order_quantity <= 0:
            v.append(f"{path}: order_quantity must be > 0, got {r.order_quantity}")
        if r.arrival_rate < 0:
            v.append(f"{path}: arrival_rate must be >= 0, got {r.arrival_rate}")
        if r.order_quantity > config.transport.truck_capacity:
            v.append(
                f"{path}: order_quantity {r.order_quantity} exceeds truck capacity "
                f"{config.transport.truck_capacity} (order exceeds truck capacity)"
            )
    c = config.costs
    for name, value in (
        ("delivery_cost", c.delivery_cost),
        ("ordering_cost", c.ordering_cost),
        ("holding_rate", c.holding_rate),
        ("penalty_rate", c.penalty_rate),
    ):
        if value < 0:
            v.append(f"costs.{name}: must be >= 0, got {value}")
    w = config.window
    if w.earliest < 0:
        v.append(f"window.earliest: must be >= 0, got {w.earliest}")
    if not w.earliest < w.latest:
        v.append(f"window: C1 < C2 violated (earliest={w.earliest}, latest={w.latest})")
    t = config.transport
    if t.truck_capacity <= 0:
        v.append(f"transport.truck_capacity: must be > 0, got {t.truck_capacity}")
    for name, (lo, hi) in (
        ("supplier_lead_time", t.supplier_lead_time),
        ("direct_trip_time", t.direct_trip_time),
        ("leg_time", t.leg_time),
    ):
        if lo < 0:
            v.append(f"transport.{name}: lower end must be >= 0, got {lo}")
        if lo > hi:
            v.append(f"transport.{name}: range inverted ({lo}, {hi})")
    if t.min_dispatch_gap <= 0:
        v.append(f"transport.min_dispatch_gap: must be > 0, got {t.min_dispatch_gap}")
    if config.horizon_days <= 0:
        v.append(f"horizon_days: must be > 0, got {config.horizon_days}")
    for name, (lo, hi) in (
        ("bounds.r", config.r_bounds),
        ("bounds.Q", config.q_bounds),
        ("bounds.S", config.s_bounds),
    ):
        if lo > hi:
            v.append(f"{name}: lower bound {lo} exceeds upper bound {hi}")
    if config.s_bounds[0] < 1:
        v.append(f"bounds.S: intervals are whole days >= 1, got lower bound {config.s_bounds[0]}")
    return v


def validate_config(config: NetworkConfig) -> NetworkConfig:
    """Return the config unchanged if valid, else raise ConfigError with all violations."""
    violations = config_violations(config)
    if violations:
        raise ConfigError(violations)
    return config


# Mutation operators applied by the optimizer, per variable.
MUTATE_GAUSSIAN = "gaussian"  # add a rounded Normal(0, sigma) draw
MUTATE_STEP = "step"          # add or subtract one step, fair coin

# Crossover operators, per variable.
CROSS_LINEAR = "linear"    # rounded convex combination of the parents
CROSS_UNIFORM = "uniform"  # copy one parent's value, fair coin


@dataclass(frozen=True)
class VariableBound:
    """Range, grid step, and operator behavior for one decision variable."""

    name: str
    lower: int
    upper: int
    step: int = 1
    mutation: str = MUTATE_GAUSSIAN
    crossover: str = CROSS_LINEAR

    @property
    def grid_upper(self) -> int:
        """Largest value of the form lower + k*step that does not exceed upper."""
        return self.lower + (self.upper - self.lower) // self.step * self.step

    def grid(self) -> list[int]:
        return list(range(self.lower, self.grid_upper + 1, self.step))

    def clamp(self, value: float) -> int:
        """Snap to the step grid and pull back inside [lower, grid_upper]."""
        k = round((value - self.lower) / self.step)
        snapped = self.lower + int(k) * self.step
        return max(self.lower, min(self.grid_upper, snapped))

    def contains(self, value: int) -> bool:
        return (
            self.lower <= value <= self.upper
            and (value - self.lower) % self.step == 0
        )


DecisionBounds = tuple[VariableBound, ...]


def bounds_for_scenario(scenario: Scenario, config: NetworkConfig) -> DecisionBounds:
    """Decision variables for a scenario: always r and Q, plus its dispatch variables.

    Quantity thresholds move on multiples of the relevant order size (orders are
    never split, so only such thresholds are meaningful); schedule intervals are
    whole days.
    """
    out = [
        VariableBound("r", config.r_bounds[0], config.r_bounds[1], 1, MUTATE_GAUSSIAN, CROSS_LINEAR),
        VariableBound("Q", config.q_bounds[0], config.q_bounds[1], 1, MUTATE_GAUSSIAN, CROSS_LINEAR),
    ]
    capacity = config.transport.truck_capacity
    s_lo, s_hi = config.s_bounds
    if scenario.dispatch_kind == QUANTITY:
        if scenario.topology == MULTI_QUEUE:
            for r in config.retailers:
                out.append(
                    VariableBound(f"M_{r.id}", r.order_quantity, capacity, r.order_quantity,
                                  MUTATE_STEP, CROSS_UNIFORM)
                )
        else:
            q_min = config.min_order_quantity
            out.append(VariableBound("M", q_min, capacity, q_min, MUTATE_STEP, CROSS_UNIFORM))
    else:
        if scenario.topology == MULTI_QUEUE:
            for r in config.retailers:
                out.append(VariableBound(f"S_{r.id}", s_lo, s_hi, 1, MUTATE_STEP, CROSS_LINEAR))
        else:
            out.append(VariableBound("S", s_lo, s_hi, 1, MUTATE_STEP, CROSS_LINEAR))
    return tuple(out)


@dataclass(frozen=True)
class QuantityDispatch:
    """Dispatch when a queue's accumulated size reaches its threshold."""

    thresholds: tuple[int, ...]  # one value (single queue) or one per retailer

    def describe(self) -> str:
        if len(self.thresholds) == 1:
            return f"M={self.thresholds[0]}"
        return ";".join(f"M_{i + 1}={m}" for i, m in enumerate(self.thresholds))


@dataclass(frozen=True)
class ScheduleDispatch:
    """Dispatch every fixed number of days."""

    intervals: tuple[int, ...]  # one value (single queue) or one per retailer

    def describe(self) -> str:
        if len(self.intervals) == 1:
            return f"S={self.intervals[0]}"
        return ";".join(f"S_{i + 1}={s}" for i, s in enumerate(self.intervals))


@dataclass(frozen=True)
class PolicyParams:
    """Decoded decision variables: reorder point, reorder quantity, dispatch rule."""

    r: int
    Q: int
    dispatch: QuantityDispatch | ScheduleDispatch

    def describe_dispatch(self) -> str:
        return self.dispatch.describe()


@dataclass
class Chromosome:
    """Integer gene sequence over a scenario's decision variables, with cached fitness."""

    genes: tuple[int, ...]
    fitness: Any = None


def check_policy(policy: PolicyParams, scenario: Scenario, config: NetworkConfig) -> None:
    """Structural validation of explicit policy parameters against a scenario."""
    problems: list[str] = []
    if policy.r < 0:
        problems.append(f"r must be >= 0, got {policy.r}")
    if policy.Q <= 0:
        problems.append(f"Q must be > 0, got {policy.Q}")
    expected = 1 if scenario.topology == SINGLE_QUEUE else config.n_retailers
    if scenario.dispatch_kind == QUANTITY:
        if not isinstance(policy.dispatch, QuantityDispatch):
            problems.append(f"scenario {scenario.id} needs quantity thresholds (M), got {policy.dispatch!r}")
        elif len(policy.dispatch.thresholds) != expected:
            problems.append(
                f"scenario {scenario.id} needs {expected} threshold value(s), "
                f"got {len(policy.dispatch.thresholds)}"
            )
        elif any(m <= 0 for m in policy.dispatch.thresholds):
            problems.append("all thresholds must be > 0")
    else:
        if not isinstance(policy.dispatch, ScheduleDispatch):
            problems.append(f"scenario {scenario.id} needs schedule intervals (S), got {policy.dispatch!r}")
        elif len(policy.dispatch.intervals) != expected:
            problems.append(
                f"scenario {scenario.id} needs {expected} interval value(s), "
                f"got {len(policy.dispatch.intervals)}"
            )
        elif any(s < 1 for s in policy.dispatch.intervals):
            problems.append("all intervals must be whole days >= 1")
    if problems:
        raise ConfigError(problems)


def decode_chromosome(
    genes: Sequence[int] | Chromosome,
    scenario: Scenario,
    bounds: DecisionBounds,
) -> PolicyParams:
    """Map a gene sequence to policy parameters.

    Gene order is fixed: r, Q, then the dispatch variables in ascending
    retailer-index order, matching ``bounds_for_scenario``.
    """
    if isinstance(genes, Chromosome):
        genes = genes.genes
    if len(genes) != len(bounds):
        raise ValueError(
            f"scenario {scenario.id} expects {len(bounds)} genes "
            f"({', '.join(b.name for b in bounds)}), got {len(genes)}"
        )
    for value, bound in zip(genes, bounds):
        if not bound.contains(value):
            raise ValueError(
                f"gene {bound.name}={value} outside [{bound.lower}, {bound.upper}] "
                f"step {bound.step}"
            )
    r, q = int(genes[0]), int(genes[1])
    rest = tuple(int(g) for g in genes[2:])
    if scenario.dispatch_kind == QUANTITY:
        return PolicyParams(r, q, QuantityDispatch(rest))
    return PolicyParams(r, q, ScheduleDispatch(rest))


def encode_policy(policy: PolicyParams, scenario: Scenario) -> tuple[int, ...]:
    """Inverse of decode_chromosome: policy parameters back to a gene tuple."""
    if scenario.dispatch_kind == QUANTITY:
        if not isinstance(policy.dispatch, QuantityDispatch):
            raise ValueError("quantity scenario requires threshold dispatch parameters")
        tail: Iterable[int] = policy.dispatch.thresholds
    else:
        if not isinstance(policy.dispatch, ScheduleDispatch):
            raise ValueError("schedule scenario requires interval dispatch parameters")
        tail = policy.dispatch.intervals
    return (policy.r, policy.Q, *tail)

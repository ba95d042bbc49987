"""Event-scheduling simulation of the warehouse.

One replication plays out retailer order arrivals, continuous-review (r, Q)
replenishment with FIFO backordering, accumulation of fulfilled orders in
dispatch queues, truck loading under a capacity and a minimum-gap constraint,
travel, and delivery-window settlement, while a ledger accrues holding,
ordering, delivery, and penalty costs.

Replications are strictly sequential internally; distinct replications are
independent given distinct seeds and can safely run concurrently.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

from .model import (
    FIFO,
    MULTI_QUEUE,
    QUANTITY,
    SCHEDULE,
    SINGLE_QUEUE,
    DeliveryWindow,
    NetworkConfig,
    PolicyParams,
    QuantityDispatch,
    Scenario,
    ScheduleDispatch,
)
from .randomness import SimulationStreams


class SimulationError(RuntimeError):
    """An internal invariant was violated during a replication."""


# Event kinds double as tie-break ranks at equal times: replenishments are
# applied first so that stock arriving "now" can serve demand arriving "now",
# then deliveries settle, then new demand, then dispatch bookkeeping.
REPLENISHMENT_ARRIVAL = 0
DELIVERY_ARRIVAL = 1
ORDER_ARRIVAL = 2
SCHEDULED_DISPATCH = 3
DISPATCH_ELIGIBLE = 4

KIND_NAMES = {
    REPLENISHMENT_ARRIVAL: "replenishment_arrival",
    DELIVERY_ARRIVAL: "delivery_arrival",
    ORDER_ARRIVAL: "order_arrival",
    SCHEDULED_DISPATCH: "scheduled_dispatch",
    DISPATCH_ELIGIBLE: "dispatch_eligible",
}


class Event(NamedTuple):
    time: float
    kind: int
    seq: int
    payload: object


class EventCalendar:
    """Pending events ordered by (time, kind rank, insertion sequence).

    The total order makes a replication deterministic for a fixed seed; the
    insertion counter breaks remaining ties in favor of earlier scheduling.
    """

    def __init__(self):
        self._heap: list[Event] = []
        self._seq = 0
        self._floor = float("-inf")  # time of the last popped event

    def __len__(self) -> int:
        return len(self._heap)

    def push(self, time: float, kind: int, payload: object = None) -> None:
        if time < self._floor:
            raise SimulationError(
                f"event scheduled in the past: {KIND_NAMES[kind]} at {time} < clock {self._floor}"
            )
        heapq.heappush(self._heap, Event(time, kind, self._seq, payload))
        self._seq += 1

    def peek_time(self) -> float:
        return self._heap[0].time

    def pop(self) -> Event:
        if not self._heap:
            raise SimulationError("pop from an empty event calendar")
        event = heapq.heappop(self._heap)
        self._floor = event.time
        return event


def pop_next_event(calendar: EventCalendar) -> Event:
    """Remove and return the minimum event under (time, kind rank, sequence)."""
    return calendar.pop()


class Order:
    """A single retailer order; fulfilled and delivered whole, never split."""

    __slots__ = ("retailer_index", "retailer_id", "quantity", "placement_time",
                 "fulfillment_time", "delivery_time")

    def __init__(self, retailer_index: int, retailer_id: int, quantity: int,
                 placement_time: float):
        self.retailer_index = retailer_index
        self.retailer_id = retailer_id
        self.quantity = quantity
        self.placement_time = placement_time
        self.fulfillment_time: float | None = None
        self.delivery_time: float | None = None

    def __repr__(self):
        return (f"Order(retailer={self.retailer_id}, q={self.quantity}, "
                f"placed={self.placement_time:g})")


# Outcomes of presenting an order to the warehouse.
FILLED_NOW = "filled_now"
BACKORDERED = "backordered"


@dataclass
class CostLedger:
    """Accumulators for the four cost components plus fill-rate counters."""

    holding: float = 0.0
    ordering: float = 0.0
    delivery: float = 0.0
    penalty: float = 0.0
    orders_received: int = 0
    orders_filled_immediately: int = 0

    @property
    def total(self) -> float:
        return self.holding + self.ordering + self.delivery + self.penalty

    def snapshot(self) -> "CostLedger":
        return CostLedger(self.holding, self.ordering, self.delivery, self.penalty,
                          self.orders_received, self.orders_filled_immediately)


@dataclass(frozen=True)
class Departure:
    time: float
    queue: int
    load: int  # total items on the truck


@dataclass(frozen=True)
class Audit:
    """Whole-order item counts for conservation and truck-law checks."""

    initial_stock: int
    items_supplied: int       # replenishment items that arrived within the horizon
    items_dispatched: int     # items that left on trucks
    items_in_queues: int      # fulfilled but undispatched items at the horizon
    on_hand_end: int
    departures: tuple[Departure, ...]
    replenishments_ordered: int


@dataclass(frozen=True)
class SimResult:
    """One replication's outcome: total cost, fill rate, and the cost breakdown."""

    total_cost: float
    fill_rate: float
    breakdown: CostLedger
    audit: Audit
    trace: tuple[tuple[float, int, int], ...] | None = None  # (time, on_hand, position)


def window_penalty(quantity: int, lead_time: float, window: DeliveryWindow,
                   penalty_rate: float) -> float:
    """Penalty for delivering outside [earliest, latest]; early and late both count."""
    early = max(0.0, window.earliest - lead_time)
    late = max(0.0, lead_time - window.latest)
    return penalty_rate * quantity * (early + late)


def build_truckload(queue: list[Order], priority: str, capacity: int) -> list[Order]:
    """Load one truck from a dispatch queue; loaded orders are removed.

    FIFO walks the queue head first and stops at the first order that does not
    fit (strict head of line, no skip-ahead).  Smallest-orders-first applies
    the same walk to the queue stably sorted by (quantity, placement time).
    Orders are loaded whole.
    """
    if priority == FIFO:
        total = 0
        count = 0
        for order in queue:
            if total + order.quantity > capacity:
                break
            total += order.quantity
            count += 1
        load = queue[:count]
        del queue[:count]
        return load
    candidates = sorted(queue, key=lambda o: (o.quantity, o.placement_time))
    load = []
    total = 0
    for order in candidates:
        if total + order.quantity > capacity:
            break
        total += order.quantity
        load.append(order)
    loaded = set(map(id, load))
    queue[:] = [o for o in queue if id(o) not in loaded]
    return load


def plan_route(load: list[Order], topology: str, streams: SimulationStreams,
               departure: float, transport) -> list[tuple[Order, float]]:
    """Assign a delivery time to every loaded order.

    Multi-queue trucks serve one retailer: a single direct-trip draw applies to
    the whole load.  Single-queue trucks visit each destination in order of its
    first appearance in the load, drawing one travel time per leg; an order is
    delivered when its retailer's stop is reached.
    """
    if topology == MULTI_QUEUE:
        trip = streams.trip_time(*transport.direct_trip_time)
        return [(order, departure + trip) for order in load]
    arrival_at: dict[int, float] = {}
    clock = departure
    for order in load:
        if order.retailer_index not in arrival_at:
            clock += streams.leg_time(*transport.leg_time)
            arrival_at[order.retailer_index] = clock
    return [(order, arrival_at[order.retailer_index]) for order in load]


class Replication:
    """One seeded run of the warehouse model.

    Use :func:`run_replication` for the common case; the class itself is also
    drivable step by step, which the verification suite uses to script exact
    event tables.
    """

    def __init__(self, config: NetworkConfig, policy: PolicyParams, scenario: Scenario,
                 seed: int, horizon: float | None = None, record_trace: bool = False,
                 streams: SimulationStreams | None = None):
        self.config = config
        self.policy = policy
        self.scenario = scenario
        self.horizon = config.horizon_days if horizon is None else float(horizon)
        if self.horizon <= 0:
            raise ValueError(f"horizon must be > 0, got {self.horizon}")
        if policy.Q <= 0:
            raise ValueError(f"reorder quantity must be > 0, got {policy.Q}")
        self.streams = streams or SimulationStreams(seed, config.n_retailers)

        n_queues = 1 if scenario.topology == SINGLE_QUEUE else config.n_retailers
        if scenario.dispatch_kind == QUANTITY:
            if not isinstance(policy.dispatch, QuantityDispatch):
                raise ValueError("quantity scenario requires threshold parameters")
            self.thresholds = policy.dispatch.thresholds
            self.intervals: tuple[int, ...] = ()
            if len(self.thresholds) != n_queues:
                raise ValueError(f"expected {n_queues} threshold(s), got {len(self.thresholds)}")
        else:
            if not isinstance(policy.dispatch, ScheduleDispatch):
                raise ValueError("schedule scenario requires interval parameters")
            self.intervals = policy.dispatch.intervals
            self.thresholds = ()
            if len(self.intervals) != n_queues:
                raise ValueError(f"expected {n_queues} interval(s), got {len(self.intervals)}")

        self.clock = 0.0
        self.on_hand = policy.r  # each run starts with stock equal to the reorder point
        self.on_order = 0
        self.backorders: deque[Order] = deque()
        self.backorder_total = 0
        self.queues: list[list[Order]] = [[] for _ in range(n_queues)]
        self.queue_totals = [0] * n_queues
        self.schedule_due = [False] * n_queues
        self.last_dispatch_time = -config.transport.min_dispatch_gap  # truck free at t=0
        self._pending_eligible: dict[int, float] = {}

        # Hot-path constants, hoisted out of the event handlers.
        self._quantity_based = scenario.dispatch_kind == QUANTITY
        self._single = scenario.topology == SINGLE_QUEUE
        self._holding_rate = config.costs.holding_rate
        self._penalty_rate = config.costs.penalty_rate
        self._retailer_info = tuple(
            (r.id, r.order_quantity, r.arrival_rate) for r in config.retailers
        )

        self.calendar = EventCalendar()
        self.ledger = CostLedger()
        self._last_holding_time = 0.0
        self.departures: list[Departure] = []
        self.items_supplied = 0
        self.items_dispatched = 0
        self.replenishments_ordered = 0
        self._initial_stock = self.on_hand
        self.trace: list[tuple[float, int, int]] | None = [] if record_trace else None

    # -- state helpers -------------------------------------------------------

    @property
    def inventory_position(self) -> int:
        return self.on_hand + self.on_order - self.backorder_total

    def _queue_index(self, retailer_index: int) -> int:
        return 0 if self._single else retailer_index

    def _accrue_holding(self, to_time: float) -> None:
        dt = to_time - self._last_holding_time
        if dt < 0:
            raise SimulationError(f"holding accrual interval is negative: {dt}")
        if dt:
            self.ledger.holding += self._holding_rate * self.on_hand * dt
        self._last_holding_time = to_time

    def _record_trace(self) -> None:
        if self.trace is not None:
            self.trace.append((self.clock, self.on_hand, self.inventory_position))

    # -- core operations -----------------------------------------------------

    def fulfill_or_backorder(self, order: Order) -> str:
        """Serve an arriving order whole from stock, or queue it whole as a backorder."""
        self.ledger.orders_received += 1
        if self.on_hand >= order.quantity:
            self.on_hand -= order.quantity
            order.fulfillment_time = self.clock
            self.ledger.orders_filled_immediately += 1
            self._enqueue_for_dispatch(order)
            return FILLED_NOW
        self.backorders.append(order)
        self.backorder_total += order.quantity
        return BACKORDERED

    def _check_reorder(self) -> None:
        """Place replenishment orders while the inventory position sits at or under r."""
        transport = self.config.transport
        while self.inventory_position <= self.policy.r:
            self.on_order += self.policy.Q
            self.ledger.ordering += self.config.costs.ordering_cost
            self.replenishments_ordered += 1
            lead = self.streams.supplier_lead(*transport.supplier_lead_time)
            arrival = self.clock + lead
            if arrival <= self.horizon:
                self.calendar.push(arrival, REPLENISHMENT_ARRIVAL, self.policy.Q)

    def _enqueue_for_dispatch(self, order: Order) -> None:
        qid = self._queue_index(order.retailer_index)
        self.queues[qid].append(order)
        self.queue_totals[qid] += order.quantity
        if self._quantity_based:
            self._check_dispatch()

    def _queue_due(self, qid: int) -> bool:
        if not self.queues[qid]:
            return False
        if self._quantity_based:
            return self.queue_totals[qid] >= self.thresholds[qid]
        return self.schedule_due[qid]

    def _check_dispatch(self) -> None:
        """Send out trucks for every due queue, honoring the departure gap.

        When the truck is not yet eligible, each due queue gets an eligibility
        event at the earliest legal departure time.  When several queues are due
        at once, the one whose head order was placed earliest goes first.
        """
        gap = self.config.transport.min_dispatch_gap
        while True:
            due = [qid for qid in range(len(self.queues)) if self._queue_due(qid)]
            if not due:
                return
            eligible_at = self.last_dispatch_time + gap
            if self.clock < eligible_at:
                for qid in due:
                    if self._pending_eligible.get(qid) != eligible_at:
                        self._pending_eligible[qid] = eligible_at
                        if eligible_at <= self.horizon:
                            self.calendar.push(eligible_at, DISPATCH_ELIGIBLE, qid)
                return
            if len(due) == 1:
                qid = due[0]
            else:
                qid = min(due, key=lambda q: (self.queues[q][0].placement_time, q))
            self._dispatch(qid)

    def _dispatch(self, qid: int) -> None:
        priority = self.scenario.priority if self.scenario.topology == SINGLE_QUEUE else FIFO
        load = build_truckload(self.queues[qid], priority, self.config.transport.truck_capacity)
        if not load:
            raise SimulationError("dispatch fired on an empty queue")
        total = sum(o.quantity for o in load)
        self.queue_totals[qid] -= total
        self.ledger.delivery += self.config.costs.delivery_cost
        self.last_dispatch_time = self.clock
        self.schedule_due[qid] = False
        self.items_dispatched += total
        self.departures.append(Departure(self.clock, qid, total))
        for order, at in plan_route(load, self.scenario.topology, self.streams,
                                    self.clock, self.config.transport):
            order.delivery_time = at
            if at <= self.horizon:
                self.calendar.push(at, DELIVERY_ARRIVAL, order)

    # -- event handlers ------------------------------------------------------

    def _on_order_arrival(self, retailer_index: int) -> None:
        retailer_id, quantity, rate = self._retailer_info[retailer_index]
        order = Order(retailer_index, retailer_id, quantity, self.clock)
        self.fulfill_or_backorder(order)
        self._check_reorder()
        next_at = self.clock + self.streams.interarrival(retailer_index, rate)
        if next_at <= self.horizon:
            self.calendar.push(next_at, ORDER_ARRIVAL, retailer_index)

    def _on_replenishment(self, quantity: int) -> None:
        self.on_hand += quantity
        self.on_order -= quantity
        self.items_supplied += quantity
        # Backordered demand is served first, oldest first, whole orders only;
        # serving stops at the first queued order that does not fit.
        while self.backorders and self.on_hand >= self.backorders[0].quantity:
            backorder = self.backorders.popleft()
            self.backorder_total -= backorder.quantity
            self.on_hand -= backorder.quantity
            backorder.fulfillment_time = self.clock
            wait = self.clock - backorder.placement_time
            self.ledger.penalty += self._penalty_rate * backorder.quantity * wait
            self._enqueue_for_dispatch(backorder)

    def _on_delivery(self, order: Order) -> None:
        lead = self.clock - order.placement_time
        self.ledger.penalty += window_penalty(order.quantity, lead, self.config.window,
                                              self._penalty_rate)

    def _on_scheduled_dispatch(self, qid: int) -> None:
        interval = self.intervals[qid]
        next_at = self.clock + interval
        if next_at <= self.horizon:
            self.calendar.push(next_at, SCHEDULED_DISPATCH, qid)
        if self.queues[qid]:
            self.schedule_due[qid] = True
            self._check_dispatch()

    def _on_dispatch_eligible(self, qid: int) -> None:
        if self._pending_eligible.get(qid) == self.clock:
            del self._pending_eligible[qid]
        self._check_dispatch()

    # -- run loop ------------------------------------------------------------

    def run(self) -> SimResult:
        self._record_trace()
        self._check_reorder()  # the starting position equals r, which triggers
        self._record_trace()
        for i, retailer in enumerate(self.config.retailers):
            if retailer.arrival_rate > 0:
                first = self.streams.interarrival(i, retailer.arrival_rate)
                if first <= self.horizon:
                    self.calendar.push(first, ORDER_ARRIVAL, i)
        if self.scenario.dispatch_kind == SCHEDULE:
            for qid, interval in enumerate(self.intervals):
                if interval <= self.horizon:
                    self.calendar.push(float(interval), SCHEDULED_DISPATCH, qid)

        calendar = self.calendar
        horizon = self.horizon
        tracing = self.trace is not None
        while len(calendar) and calendar.peek_time() <= horizon:
            event = calendar.pop()
            kind = event.kind
            self.clock = event.time
            self._accrue_holding(event.time)
            if kind == ORDER_ARRIVAL:
                self._on_order_arrival(event.payload)
            elif kind == DELIVERY_ARRIVAL:
                self._on_delivery(event.payload)
            elif kind == REPLENISHMENT_ARRIVAL:
                self._on_replenishment(event.payload)
            elif kind == SCHEDULED_DISPATCH:
                self._on_scheduled_dispatch(event.payload)
            else:
                self._on_dispatch_eligible(event.payload)
            if tracing and (kind == ORDER_ARRIVAL or kind == REPLENISHMENT_ARRIVAL):
                self._record_trace()

        return self.finalize()

    def finalize(self) -> SimResult:
        self._accrue_holding(self.horizon)
        self.clock = self.horizon
        # Backorders still waiting at the horizon accrue their wait up to it.
        for backorder in self.backorders:
            wait = self.horizon - backorder.placement_time
            self.ledger.penalty += self.config.costs.penalty_rate * backorder.quantity * wait

        in_queues = sum(self.queue_totals)
        inflow = self._initial_stock + self.items_supplied
        outflow = self.on_hand + self.items_dispatched + in_queues
        if inflow != outflow:
            raise SimulationError(
                f"item conservation violated: {inflow} in vs {outflow} accounted"
            )

        ledger = self.ledger.snapshot()
        received = ledger.orders_received
        fill_rate = 1.0 if received == 0 else ledger.orders_filled_immediately / received
        audit = Audit(
            initial_stock=self._initial_stock,
            items_supplied=self.items_supplied,
            items_dispatched=self.items_dispatched,
            items_in_queues=in_queues,
            on_hand_end=self.on_hand,
            departures=tuple(self.departures),
            replenishments_ordered=self.replenishments_ordered,
        )
        trace = tuple(self.trace) if self.trace is not None else None
        return SimResult(ledger.total, fill_rate, ledger, audit, trace)


def run_replication(config: NetworkConfig, policy: PolicyParams, scenario: Scenario,
                    seed: int, horizon: float | None = None, record_trace: bool = False,
                    streams: SimulationStreams | None = None) -> SimResult:
    """Run one seeded replication and return its cost ledger and fill rate."""
    return Replication(config, policy, scenario, seed, horizon=horizon,
                       record_trace=record_trace, streams=streams).run()

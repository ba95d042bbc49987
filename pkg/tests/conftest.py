"""Shared fixtures: the baseline instance and a fully scripted deterministic one."""

from __future__ import annotations

from itertools import chain, repeat

import pytest

from dispatchsim.model import (
    CostParams,
    DeliveryWindow,
    NetworkConfig,
    RetailerSpec,
    TransportSpec,
    baseline_config,
)
from dispatchsim.randomness import SimulationStreams


@pytest.fixture
def baseline():
    return baseline_config()


def scripted_config(horizon: float = 10.0) -> NetworkConfig:
    """Three retailers with degenerate transport times: supplier lead exactly 3
    days, every multi-stop leg exactly 1.5 days, direct trips exactly 3 days."""
    return NetworkConfig(
        retailers=(
            RetailerSpec(1, 50, 1.0 / 3.0),
            RetailerSpec(2, 100, 1.0 / 3.0),
            RetailerSpec(3, 150, 1.0 / 3.0),
        ),
        costs=CostParams(delivery_cost=500, ordering_cost=200, holding_rate=5, penalty_rate=5),
        transport=TransportSpec(
            truck_capacity=500,
            supplier_lead_time=(3.0, 3.0),
            direct_trip_time=(3.0, 3.0),
            leg_time=(1.5, 1.5),
            min_dispatch_gap=1.0,
        ),
        window=DeliveryWindow(3.0, 6.0),
        horizon_days=horizon,
    )


class ScriptedStreams(SimulationStreams):
    """Real streams except for arrivals, which replay a fixed script.

    The default script makes orders arrive every day rotating retailers
    1, 2, 3 (each retailer every 3 days, staggered by its index).
    """

    def __init__(self, interarrivals: dict[int, list[float]] | None = None):
        super().__init__(seed=0, n_retailers=3)
        if interarrivals is None:
            interarrivals = {i: [float(i + 1)] for i in range(3)}
        self._scripted = {
            i: chain(seq, repeat(3.0)) for i, seq in interarrivals.items()
        }

    def interarrival(self, retailer_index: int, rate: float) -> float:
        return next(self._scripted[retailer_index])


@pytest.fixture
def scripted():
    return scripted_config()


@pytest.fixture
def scripted_streams():
    return ScriptedStreams()

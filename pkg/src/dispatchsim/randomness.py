"""Reproducible random number streams.

Every stochastic component draws from its own substream so that, for a fixed
base seed, the draw sequence of one component is unaffected by how often the
others are sampled.  Substream seeds are derived with a splitmix64 chain,
which gives well-mixed 64-bit seeds without any heavyweight dependency.
"""

from __future__ import annotations

import random

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(base: int, *path: int) -> int:
    """Derive a child seed from ``base`` and an integer path.

    Deterministic and platform independent; distinct paths give
    statistically independent seeds.
    """
    x = _splitmix64(base & _MASK64)
    for part in path:
        x = _splitmix64(x ^ _splitmix64(part & _MASK64))
    return x


class RandomStream:
    """A single deterministic stream with the draw primitives the model uses."""

    def __init__(self, seed: int):
        self._rng = random.Random(seed)

    def exponential(self, rate: float) -> float:
        """Draw from Exponential with the given rate (mean 1/rate)."""
        if rate <= 0.0:
            raise ValueError(f"exponential rate must be > 0, got {rate}")
        return self._rng.expovariate(rate)

    def uniform(self, lo: float, hi: float) -> float:
        """Draw from the continuous Uniform[lo, hi]; degenerate ranges return lo."""
        if lo > hi:
            raise ValueError(f"uniform range inverted: ({lo}, {hi})")
        if lo == hi:
            return lo
        return self._rng.uniform(lo, hi)

    def gauss(self, mu: float, sigma: float) -> float:
        return self._rng.gauss(mu, sigma)

    def random(self) -> float:
        return self._rng.random()


# Substream tags; their values are part of the reproducibility contract.
_TAG_ARRIVALS = 1
_TAG_SUPPLIER = 2
_TAG_TRAVEL = 3


class SimulationStreams:
    """Per-purpose substreams used by one simulation replication.

    One stream per retailer for order interarrival times, one for supplier
    lead times, and one for truck travel legs.  Identical seeds yield
    bit-identical draw sequences.
    """

    def __init__(self, seed: int, n_retailers: int):
        self.arrivals = [
            RandomStream(derive_seed(seed, _TAG_ARRIVALS, i)) for i in range(n_retailers)
        ]
        self.supplier = RandomStream(derive_seed(seed, _TAG_SUPPLIER))
        self.travel = RandomStream(derive_seed(seed, _TAG_TRAVEL))

    def interarrival(self, retailer_index: int, rate: float) -> float:
        return self.arrivals[retailer_index].exponential(rate)

    def supplier_lead(self, lo: float, hi: float) -> float:
        return self.supplier.uniform(lo, hi)

    def trip_time(self, lo: float, hi: float) -> float:
        return self.travel.uniform(lo, hi)

    def leg_time(self, lo: float, hi: float) -> float:
        return self.travel.uniform(lo, hi)

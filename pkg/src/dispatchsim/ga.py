"""Steady-state genetic algorithm over integer-coded dispatch policies.

Each generation breeds one offspring from two tournament-selected parents,
evaluates it, and swaps it for the current worst member.  Reorder point and
quantity genes cross linearly and mutate with rounded Gaussian noise;
schedule genes cross linearly and mutate by one day; threshold genes cross
uniformly and mutate by one order size, which keeps them on their multiples
grid.  Fitness is mean total cost divided by mean fill rate, both estimated
by precision-controlled simulation replicates, so lower is better.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from itertools import count
from typing import Callable, NamedTuple

from .model import (
    CROSS_UNIFORM,
    MUTATE_GAUSSIAN,
    Chromosome,
    DecisionBounds,
    NetworkConfig,
    Scenario,
    VariableBound,
    decode_chromosome,
)
from .randomness import derive_seed
from .simulation import run_replication
from .stats import PrecisionPolicy, run_until_precise

FILL_RATE_FLOOR = 0.01  # keeps the cost/fill-rate ratio finite at zero fill

_TAG_GA_OPS = 10
_TAG_EVAL = 11


@dataclass(frozen=True)
class GaParams:
    population_size: int = 100
    generations: int = 1000
    crossover_probability: float = 1.0
    mutation_probability: float = 0.2
    tournament_size: int = 3
    gaussian_sigma: float = 10.0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError(f"population_size must be >= 2, got {self.population_size}")
        if self.generations < 1:
            raise ValueError(f"generations must be >= 1, got {self.generations}")
        if not 0.0 <= self.mutation_probability <= 1.0:
            raise ValueError(f"mutation_probability must be in [0, 1], got {self.mutation_probability}")
        if not 0.0 <= self.crossover_probability <= 1.0:
            raise ValueError(f"crossover_probability must be in [0, 1], got {self.crossover_probability}")
        if self.tournament_size < 2:
            raise ValueError(f"tournament_size must be >= 2, got {self.tournament_size}")


@dataclass(frozen=True)
class FitnessRecord:
    """Evaluated quality of one chromosome; lower fitness wins."""

    fitness: float      # total_cost / max(fill_rate, floor)
    total_cost: float
    fill_rate: float
    n_reps: int
    precise: bool = True

    @classmethod
    def from_measurements(cls, total_cost: float, fill_rate: float, n_reps: int,
                          precise: bool = True) -> "FitnessRecord":
        return cls(total_cost / max(fill_rate, FILL_RATE_FLOOR),
                   total_cost, fill_rate, n_reps, precise)


class GenerationStat(NamedTuple):
    generation: int
    best_f: float
    worst_f: float
    spread: float  # worst - best over the current population


@dataclass(frozen=True)
class GaResult:
    best_genes: tuple[int, ...]
    best_fitness: FitnessRecord
    log: tuple[GenerationStat, ...]
    evaluations: int  # distinct genotypes actually simulated
    seed: int


FitnessFn = Callable[[tuple[int, ...]], FitnessRecord]


def init_population(bounds: DecisionBounds, n: int, rng: random.Random) -> list[Chromosome]:
    """Population of n chromosomes, each gene uniform over its value grid."""
    population = []
    grids = [b.grid() for b in bounds]
    for _ in range(n):
        genes = tuple(grid[rng.randrange(len(grid))] for grid in grids)
        population.append(Chromosome(genes))
    return population


def tournament_select(population: list[Chromosome], k: int, rng: random.Random) -> Chromosome:
    """Sample k distinct members; the lowest fitness wins, ties to the earlier index."""
    if len(population) < k:
        raise ValueError(f"population of {len(population)} cannot host a tournament of {k}")
    sampled = rng.sample(range(len(population)), k)
    winner = min(sampled, key=lambda i: (population[i].fitness.fitness, i))
    return population[winner]


def linear_crossover(v1: int, v2: int, alpha: float, bound: VariableBound) -> int:
    """Rounded convex combination of the parent values, pulled back into range."""
    return bound.clamp(v1 * alpha + v2 * (1.0 - alpha))


def uniform_crossover(v1: int, v2: int, alpha: float) -> int:
    """Copy parent 1's value when alpha exceeds one half, else parent 2's."""
    return v1 if alpha > 0.5 else v2


def crossover(parent1: tuple[int, ...], parent2: tuple[int, ...],
              bounds: DecisionBounds, rng: random.Random) -> tuple[int, ...]:
    """Breed one offspring gene by gene, with a fresh alpha draw per gene."""
    genes = []
    for v1, v2, bound in zip(parent1, parent2, bounds):
        alpha = rng.random()
        if bound.crossover == CROSS_UNIFORM:
            genes.append(uniform_crossover(v1, v2, alpha))
        else:
            genes.append(linear_crossover(v1, v2, alpha, bound))
    return tuple(genes)


def mutate(genes: tuple[int, ...], bounds: DecisionBounds, pm: float, sigma: float,
           rng: random.Random) -> tuple[int, ...]:
    """Mutate each gene independently with probability pm.

    Gaussian genes move by a rounded Normal(0, sigma) draw; step genes move up
    or down by exactly one step on a fair coin.  Results are clamped to their
    grids, so every output still satisfies its bounds.
    """
    out = []
    for value, bound in zip(genes, bounds):
        if rng.random() < pm:
            if bound.mutation == MUTATE_GAUSSIAN:
                value = bound.clamp(value + rng.gauss(0.0, sigma))
            else:
                delta = bound.step if rng.random() < 0.5 else -bound.step
                value = bound.clamp(value + delta)
        out.append(value)
    return tuple(out)


def replace_worst(population: list[Chromosome], offspring: Chromosome) -> int:
    """Swap the offspring in for the highest-fitness member; returns its index."""
    worst = max(range(len(population)), key=lambda i: population[i].fitness.fitness)
    population[worst] = offspring
    return worst


def make_simulation_evaluator(config: NetworkConfig, scenario: Scenario,
                              bounds: DecisionBounds, precision: PrecisionPolicy,
                              seed: int) -> FitnessFn:
    """Fitness via precision-controlled replicates of the warehouse simulation.

    Total cost drives the stopping rule; the fill rate is averaged over the
    same replicates.  Replication seeds derive from the evaluator seed and a
    per-evaluation counter, so a run's draws are fully reproducible.
    """
    eval_counter = count()

    def evaluate(genes: tuple[int, ...]) -> FitnessRecord:
        policy = decode_chromosome(genes, scenario, bounds)
        eval_seed = derive_seed(seed, _TAG_EVAL, next(eval_counter))
        fill_rates: list[float] = []

        def one_replication(rep_seed: int) -> float:
            result = run_replication(config, policy, scenario, rep_seed)
            fill_rates.append(result.fill_rate)
            return result.total_cost

        summary = run_until_precise(one_replication, precision,
                                    (derive_seed(eval_seed, j) for j in count()))
        mean_fr = math.fsum(fill_rates) / len(fill_rates)
        return FitnessRecord.from_measurements(summary.mean, mean_fr, summary.n,
                                               summary.precise)

    return evaluate


def run_ssga(bounds: DecisionBounds, fitness_fn: FitnessFn, params: GaParams,
             seed: int) -> GaResult:
    """Run the steady-state search and return the best solution ever observed.

    The returned log holds one row per generation (including generation 0,
    the evaluated initial population) with the population's best and worst
    fitness and their spread.  A genotype is never simulated twice within a
    run; repeats reuse the cached record.
    """
    rng = random.Random(derive_seed(seed, _TAG_GA_OPS))
    cache: dict[tuple[int, ...], FitnessRecord] = {}
    evaluations = 0

    def fitness(genes: tuple[int, ...]) -> FitnessRecord:
        nonlocal evaluations
        record = cache.get(genes)
        if record is None:
            record = fitness_fn(genes)
            cache[genes] = record
            evaluations += 1
        return record

    population = init_population(bounds, params.population_size, rng)
    for member in population:
        member.fitness = fitness(member.genes)

    best_index = min(range(len(population)),
                     key=lambda i: (population[i].fitness.fitness, i))
    best_genes = population[best_index].genes
    best_record: FitnessRecord = population[best_index].fitness

    def stat(generation: int) -> GenerationStat:
        values = [m.fitness.fitness for m in population]
        lo, hi = min(values), max(values)
        return GenerationStat(generation, lo, hi, hi - lo)

    log = [stat(0)]
    for generation in range(1, params.generations + 1):
        parent1 = tournament_select(population, params.tournament_size, rng)
        parent2 = tournament_select(population, params.tournament_size, rng)
        if rng.random() < params.crossover_probability:
            child_genes = crossover(parent1.genes, parent2.genes, bounds, rng)
        else:
            child_genes = parent1.genes
        child_genes = mutate(child_genes, bounds, params.mutation_probability,
                             params.gaussian_sigma, rng)
        record = fitness(child_genes)
        replace_worst(population, Chromosome(child_genes, record))
        if record.fitness < best_record.fitness:
            best_genes = child_genes
            best_record = record
        log.append(stat(generation))

    return GaResult(best_genes, best_record, tuple(log), evaluations, seed)


def quadratic_test_fitness(optimum: tuple[int, ...]) -> FitnessFn:
    """Noise-free fitness with a known grid optimum, for search sanity checks."""

    def evaluate(genes: tuple[int, ...]) -> FitnessRecord:
        cost = float(sum((g - o) ** 2 for g, o in zip(genes, optimum)))
        return FitnessRecord.from_measurements(cost, 1.0, 1)

    return evaluate


def exact_tournament_win_probability(rank: int, n: int, k: int) -> float:
    """P(the rank-th best of n distinct members wins a k-way tournament), rank >= 1."""
    return math.comb(n - rank, k - 1) / math.comb(n, k)

"""
Genetic algorithm over message styles.

Each generation is built from three blocks, in this order:

1. ``elite_count`` best individuals, cloned unchanged;
2. ``floor(reseed_fraction * population_size)`` fresh random genomes;
3. the rest as ``mutate(crossover(tournament, tournament))``.

The objective is any callable mapping a list of `MessageStyle` to integer
scores, typically a `CascadeObjective`. It is deterministic, so fitness is
cached per genome and elites are never re-scored. All random draws happen
before a generation is scored, which keeps the stream order independent of
how scoring is done.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .diffusion import FIELDS, MessageStyle, random_style
from .errors import ConfigError

__all__ = [
    "GaConfig",
    "Individual",
    "GenerationRecord",
    "GaResult",
    "random_genome",
    "tournament_select",
    "crossover",
    "mutate",
    "evaluate",
    "next_generation",
    "run_ga",
    "write_trace_csv",
    "TRACE_COLUMNS",
]

Objective = Callable[[Sequence[MessageStyle]], Sequence[int]]


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 50
    generations: int = 250
    elite_count: int = 3
    reseed_fraction: float = 0.10
    tournament_size: int = 5
    mutation_probability: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 1:
            raise ConfigError("population_size must be >= 1")
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        if self.elite_count < 0 or not 0 <= self.reseed_fraction <= 1:
            raise ConfigError("elite_count must be >= 0 and reseed_fraction in [0, 1]")
        if self.elite_count + self.reseed_count >= self.population_size:
            raise ConfigError(
                f"elites ({self.elite_count}) + reseeds ({self.reseed_count}) leave no room "
                f"for offspring in a population of {self.population_size}"
            )
        if not 1 <= self.tournament_size <= self.population_size:
            raise ConfigError("tournament_size must lie in [1, population_size]")
        if not 0 <= self.mutation_probability <= 1:
            raise ConfigError("mutation_probability must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    @property
    def reseed_count(self) -> int:
        # the epsilon guards against 0.1 * 30 style round-off
        return math.floor(self.reseed_fraction * self.population_size + 1e-9)

    @property
    def offspring_count(self) -> int:
        return self.population_size - self.elite_count - self.reseed_count


@dataclass
class Individual:
    genome: MessageStyle
    fitness: Optional[int] = None

    def sort_key(self):
        return (-self.fitness, self.genome)


@dataclass(frozen=True)
class GenerationRecord:
    generation_index: int
    best_fitness: int
    mean_fitness: float
    best_genome: MessageStyle


@dataclass
class GaResult:
    records: List[GenerationRecord]
    best: Individual
    final_population: List[Individual] = field(repr=False, default_factory=list)

    def best_so_far(self) -> np.ndarray:
        return np.maximum.accumulate([r.best_fitness for r in self.records])


def random_genome(rng: np.random.Generator) -> MessageStyle:
    return random_style(rng)


def tournament_select(population: Sequence[Individual], rng: np.random.Generator, tournament_size: int = 5) -> Individual:
    """Fittest of ``tournament_size`` draws with replacement; first drawn wins ties."""
    picks = rng.integers(0, len(population), size=tournament_size)
    winner = population[picks[0]]
    for i in picks[1:]:
        if population[i].fitness > winner.fitness:
            winner = population[i]
    return winner


def crossover(parent_a: MessageStyle, parent_b: MessageStyle, rng: np.random.Generator) -> MessageStyle:
    """Uniform crossover: each gene from ``parent_a`` with probability 1/2."""
    take_a = rng.random(len(FIELDS)) < 0.5
    a = parent_a.as_tuple()
    b = parent_b.as_tuple()
    return MessageStyle(*(x if keep else y for keep, x, y in zip(take_a, a, b)))


def mutate(child: MessageStyle, mutation_probability: float, rng: np.random.Generator) -> MessageStyle:
    """With the given probability, redraw one uniformly chosen gene from its full domain."""
    if rng.random() >= mutation_probability:
        return child
    gene = int(rng.integers(len(FIELDS)))
    name = FIELDS[gene]
    if name in ("polarity", "emotionality"):
        value = float(rng.uniform(-1.0, 1.0))
    elif name == "length":
        value = int(rng.integers(1, 141))
    elif name == "time":
        value = int(rng.integers(0, 3))
    else:
        value = int(rng.integers(0, 11))
    genes = list(child.as_tuple())
    genes[gene] = value
    return MessageStyle(*genes)


def evaluate(population: Sequence[Individual], objective: Objective, cache: Optional[Dict] = None) -> None:
    """Fill in missing fitness values in place, scoring each new genome once."""
    if cache is None:
        cache = {}
    pending = []
    for ind in population:
        if ind.fitness is None:
            hit = cache.get(ind.genome)
            if hit is None:
                pending.append(ind)
            else:
                ind.fitness = hit
    unique = list(dict.fromkeys(ind.genome for ind in pending))
    if unique:
        for genome, score in zip(unique, objective(unique)):
            cache[genome] = int(score)
    for ind in pending:
        ind.fitness = cache[ind.genome]


def _ranked(population: Sequence[Individual]) -> List[Individual]:
    return sorted(population, key=Individual.sort_key)


def next_generation(
    population: Sequence[Individual],
    objective: Objective,
    config: GaConfig,
    rng: np.random.Generator,
    cache: Optional[Dict] = None,
) -> List[Individual]:
    if len(population) != config.population_size:
        raise ConfigError(f"population has {len(population)} members, config expects {config.population_size}")
    if any(ind.fitness is None for ind in population):
        raise ConfigError("every individual must be evaluated before breeding")
    elites = [Individual(ind.genome, ind.fitness) for ind in _ranked(population)[: config.elite_count]]
    reseeded = [Individual(random_genome(rng)) for _ in range(config.reseed_count)]
    offspring = []
    for _ in range(config.offspring_count):
        a = tournament_select(population, rng, config.tournament_size)
        b = tournament_select(population, rng, config.tournament_size)
        child = mutate(crossover(a.genome, b.genome, rng), config.mutation_probability, rng)
        offspring.append(Individual(child))
    new = elites + reseeded + offspring
    evaluate(new, objective, cache)
    return new


def _record(index: int, population: Sequence[Individual]) -> GenerationRecord:
    best = _ranked(population)[0]
    return GenerationRecord(
        generation_index=index,
        best_fitness=best.fitness,
        mean_fitness=float(np.mean([ind.fitness for ind in population])),
        best_genome=best.genome,
    )


def run_ga(objective: Objective, config: GaConfig) -> GaResult:
    """Evolve for ``config.generations`` generations (the first being the random start).

    Output is fully determined by ``config.seed`` and the objective.
    """
    rng = np.random.default_rng(config.seed)
    cache: Dict = {}
    population = [Individual(random_genome(rng)) for _ in range(config.population_size)]
    evaluate(population, objective, cache)
    records = [_record(0, population)]
    for g in range(1, config.generations):
        population = next_generation(population, objective, config, rng, cache)
        records.append(_record(g, population))
    best = _ranked(population)[0]
    return GaResult(records=records, best=Individual(best.genome, best.fitness), final_population=population)


TRACE_COLUMNS = ("generation", "best_fitness", "mean_fitness") + FIELDS


def write_trace_csv(records: Sequence[GenerationRecord], fh) -> None:
    """One row per generation; genome ``time`` written as its ordinal."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for r in records:
        writer.writerow([r.generation_index, r.best_fitness, repr(r.mean_fitness), *map(repr, r.best_genome.as_tuple())])

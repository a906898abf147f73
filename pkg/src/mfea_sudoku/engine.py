"""Multifactorial evolutionary algorithm over K tasks sharing one genotype space.

Every individual carries a skill factor (the one task it is evaluated on)
and a scalar fitness, 1 / rank within its own skill-factor group. Costs
for the other tasks are never computed and count as +inf, so ranking
reduces to sorting each skill-factor group on its own. With K = 1 the
loop is a plain elitist (mu + lambda) genetic algorithm.

Task domains plug in through :class:`TaskHooks`. The hooks are batched:
every genotype argument is a stack with the population on axis 0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .diversity import total_entropy

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


class TaskHooks(Protocol):
    def evaluate(self, genotypes: np.ndarray, task: int) -> np.ndarray: ...

    def random_genotype(self, n: int, task: int, rng: np.random.Generator) -> np.ndarray: ...

    def crossover(self, parents_a: np.ndarray, parents_b: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]: ...

    def repair(self, genotypes: np.ndarray, task: int) -> np.ndarray: ...

    def mutate(self, genotypes: np.ndarray, task: int, rng: np.random.Generator) -> np.ndarray: ...

    def is_solved(self, cost: float) -> bool: ...


@dataclass(frozen=True)
class EngineConfig:
    population_size: int = 500
    mutation_probability: float = 0.8
    rmp: float = 1.0
    max_evaluations: int = 100_000
    seed: int = 42
    stop_on_solve: bool = True

    def validate(self, n_tasks: int) -> None:
        n = self.population_size
        if n_tasks < 1:
            raise ConfigError("the task set is empty")
        if n < 2 or n < n_tasks:
            raise ConfigError(f"population_size {n} must be >= 2 and >= the number of tasks ({n_tasks})")
        if n % 2:
            raise ConfigError(f"population_size {n} must be even (parents are paired)")
        for name in ("mutation_probability", "rmp"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} {value} outside [0, 1]")
        if self.max_evaluations < 1:
            raise ConfigError("max_evaluations must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class Individual:
    genotype: np.ndarray
    skill_factor: int
    factorial_cost: float
    scalar_fitness: float


@dataclass
class Population:
    """Structure-of-arrays population; member ``i`` is row ``i`` of each array.

    Unevaluated members have ``costs[i] = nan``.
    """

    genotypes: np.ndarray
    skill_factors: np.ndarray
    costs: np.ndarray
    scalar_fitness: np.ndarray
    n_tasks: int
    evaluations: int = 0

    def __len__(self):
        return len(self.skill_factors)

    def __getitem__(self, i) -> Individual:
        return Individual(self.genotypes[i], int(self.skill_factors[i]), float(self.costs[i]), float(self.scalar_fitness[i]))

    def best_costs(self) -> np.ndarray:
        """Lowest cost per task; +inf for a task with no members."""
        best = np.full(self.n_tasks, np.inf)
        for k in range(self.n_tasks):
            group = self.costs[self.skill_factors == k]
            if group.size:
                best[k] = group.min()
        return best

    def take(self, index) -> "Population":
        return Population(
            self.genotypes[index],
            self.skill_factors[index],
            self.costs[index],
            self.scalar_fitness[index],
            self.n_tasks,
            self.evaluations,
        )


@dataclass
class GenerationStats:
    generation: int
    evaluations: int
    best_costs: np.ndarray
    entropy: float
    subpopulation_sizes: np.ndarray


@dataclass
class RunTrace:
    """Per-generation record of one run; row 0 is the initial population."""

    n_tasks: int
    population_size: int
    seed: int
    generations: list[int] = field(default_factory=list)
    evaluations: list[int] = field(default_factory=list)
    best_costs: list[list[float]] = field(default_factory=list)
    entropy: list[float] = field(default_factory=list)

    def record(self, stats: GenerationStats) -> None:
        self.generations.append(stats.generation)
        self.evaluations.append(stats.evaluations)
        self.best_costs.append([float(c) for c in stats.best_costs])
        self.entropy.append(float(stats.entropy))

    def __len__(self):
        return len(self.generations)

    def solved_at(self, task: int, is_solved=lambda c: c == 0) -> int | None:
        """Evaluations consumed when ``task`` was first solved, else None."""
        for evals, costs in zip(self.evaluations, self.best_costs):
            if is_solved(costs[task]):
                return evals
        return None


def factorial_ranks(population: Population, task: int) -> np.ndarray:
    """1-based rank of every member on ``task``.

    Members of that skill factor come first, ordered by cost with ties
    kept in list order; all other members (infinite cost) follow in list
    order.
    """
    if not 0 <= task < population.n_tasks:
        raise IndexError(f"task {task} outside 0..{population.n_tasks - 1}")
    if len(population) == 0:
        raise ValueError("empty population")
    cost = np.where(population.skill_factors == task, population.costs, np.inf)
    order = np.argsort(cost, kind="stable")
    ranks = np.empty(len(order), dtype=np.int64)
    ranks[order] = np.arange(1, len(order) + 1)
    return ranks


def update_scalar_fitness(population: Population) -> Population:
    if np.isnan(population.costs).any():
        raise ValueError("scalar fitness needs every member evaluated")
    fitness = np.empty(len(population))
    for k in range(population.n_tasks):
        members = population.skill_factors == k
        if members.any():
            fitness[members] = 1.0 / factorial_ranks(population, k)[members]
    population.scalar_fitness = fitness
    return population


def imitate_skill_factor(parent_a: int, parent_b: int, rng: np.random.Generator) -> int:
    return parent_a if rng.random() < 0.5 else parent_b


def initialize_population(task_set: Sequence, hooks: TaskHooks, config: EngineConfig, rng: np.random.Generator) -> Population:
    n_tasks = len(task_set)
    config.validate(n_tasks)
    n = config.population_size
    skill = rng.integers(n_tasks, size=n)
    genotypes = None
    costs = np.full(n, np.nan)
    for k in range(n_tasks):
        members = np.flatnonzero(skill == k)
        if members.size == 0:
            continue
        block = hooks.random_genotype(members.size, k, rng)
        if genotypes is None:
            genotypes = np.empty((n,) + block.shape[1:], dtype=block.dtype)
        genotypes[members] = block
        costs[members] = hooks.evaluate(block, k)
    population = Population(genotypes, skill, costs, np.zeros(n), n_tasks, evaluations=n)
    return update_scalar_fitness(population)


def _survivors(pool: Population, n: int, rng: np.random.Generator) -> np.ndarray:
    # shuffle first so equal scalar fitness (same rank, different tasks) is not
    # biased by pool order, then a stable sort keeps that shuffle among ties
    shuffle = rng.permutation(len(pool))
    order = np.argsort(-pool.scalar_fitness[shuffle], kind="stable")
    return np.sort(shuffle[order[:n]])


def evolve_generation(
    population: Population,
    hooks: TaskHooks,
    config: EngineConfig,
    rng: np.random.Generator,
    generation: int = 0,
    diversity: Callable[[np.ndarray], float] | None = total_entropy,
) -> tuple[Population, GenerationStats]:
    n = len(population)
    pairing = rng.permutation(n)
    ia, ib = pairing[0::2], pairing[1::2]
    sf_a, sf_b = population.skill_factors[ia], population.skill_factors[ib]
    parents_a, parents_b = population.genotypes[ia], population.genotypes[ib]

    mate = (sf_a == sf_b) | (rng.random(ia.size) < config.rmp)
    child_a, child_b = hooks.crossover(parents_a, parents_b, rng)
    # unmated pairs pass copies of themselves on, each keeping its own task
    child_a = _select(mate, child_a, parents_a)
    child_b = _select(mate, child_b, parents_b)
    children = np.concatenate([child_a, child_b])

    imitate_a = np.where(rng.random(ia.size) < 0.5, sf_a, sf_b)
    imitate_b = np.where(rng.random(ia.size) < 0.5, sf_a, sf_b)
    child_sf = np.concatenate([np.where(mate, imitate_a, sf_a), np.where(mate, imitate_b, sf_b)])

    mutate_draw = rng.random(n) < config.mutation_probability
    child_cost = np.empty(n)
    for k in range(population.n_tasks):
        members = child_sf == k
        if not members.any():
            continue
        block = hooks.repair(children[members], k)
        hit = mutate_draw[members]
        if hit.any():
            block[hit] = hooks.mutate(block[hit], k, rng)
        children[members] = block
        child_cost[members] = hooks.evaluate(block, k)

    pool = Population(
        np.concatenate([children, population.genotypes]),
        np.concatenate([child_sf, population.skill_factors]),
        np.concatenate([child_cost, population.costs]),
        np.zeros(2 * n),
        population.n_tasks,
        population.evaluations + n,
    )
    update_scalar_fitness(pool)
    survivors = pool.take(_survivors(pool, n, rng))
    update_scalar_fitness(survivors)
    stats = _stats(survivors, generation, diversity)
    return survivors, stats


def _select(mask, a, b):
    shape = (-1,) + (1,) * (a.ndim - 1)
    return np.where(mask.reshape(shape), a, b)


def _stats(population: Population, generation: int, diversity) -> GenerationStats:
    entropy = diversity(population.genotypes) if diversity is not None else float("nan")
    sizes = np.bincount(population.skill_factors, minlength=population.n_tasks)
    return GenerationStats(generation, population.evaluations, population.best_costs(), entropy, sizes)


def run(
    task_set: Sequence,
    hooks: TaskHooks,
    config: EngineConfig,
    diversity: Callable[[np.ndarray], float] | None = total_entropy,
    callback: Callable[[GenerationStats], None] | None = None,
) -> RunTrace:
    """Evolve until the evaluation budget is spent or every task is solved."""
    rng = np.random.default_rng(config.seed)
    population = initialize_population(task_set, hooks, config, rng)
    trace = RunTrace(population.n_tasks, config.population_size, config.seed)
    stats = _stats(population, 0, diversity)
    trace.record(stats)
    if callback:
        callback(stats)
    generation = 0
    while population.evaluations < config.max_evaluations:
        if config.stop_on_solve and all(hooks.is_solved(c) for c in stats.best_costs):
            break
        generation += 1
        population, stats = evolve_generation(population, hooks, config, rng, generation, diversity)
        trace.record(stats)
        if callback:
            callback(stats)
        log.debug("generation %d evaluations %d best %s", generation, stats.evaluations, stats.best_costs)
    return trace

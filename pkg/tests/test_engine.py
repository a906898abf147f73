import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfea_sudoku.engine import (
    ConfigError,
    EngineConfig,
    Population,
    evolve_generation,
    factorial_ranks,
    imitate_skill_factor,
    initialize_population,
    run,
    update_scalar_fitness,
)
from mfea_sudoku.puzzles import bundled_puzzle
from mfea_sudoku.sudoku import SudokuTasks


class VectorTasks:
    """Integer vectors; task k's cost is the L1 distance to its target."""

    def __init__(self, targets, start=None):
        self.targets = np.asarray(targets)
        self.start = start
        self.evaluated = []  # (task, costs) per evaluate call

    def evaluate(self, genotypes, task):
        costs = np.abs(genotypes - self.targets[task]).sum(axis=1).astype(float)
        self.evaluated.append((task, costs))
        return costs

    def random_genotype(self, n, task, rng):
        if self.start is not None:
            return np.tile(self.start, (n, 1))
        return rng.integers(0, 10, size=(n, self.targets.shape[1]))

    def crossover(self, a, b, rng):
        mask = rng.random(a.shape) < 0.5
        return np.where(mask, a, b), np.where(mask, b, a)

    def repair(self, genotypes, task):
        return genotypes

    def mutate(self, genotypes, task, rng):
        out = genotypes.copy()
        rows = np.arange(len(out))
        out[rows, rng.integers(out.shape[1], size=len(out))] = rng.integers(0, 10, size=len(out))
        return out

    def is_solved(self, cost):
        return cost == 0


def make_pop(costs, skill, n_tasks=None):
    costs = np.asarray(costs, dtype=float)
    skill = np.asarray(skill)
    n_tasks = n_tasks or int(skill.max()) + 1
    return Population(np.zeros((len(costs), 1)), skill, costs, np.zeros(len(costs)), n_tasks)


class TestRanks:
    def test_single_task(self):
        assert factorial_ranks(make_pop([10, 5, 7], [0, 0, 0]), 0).tolist() == [3, 1, 2]

    def test_ties_keep_list_order(self):
        assert factorial_ranks(make_pop([4, 4], [0, 0]), 0).tolist() == [1, 2]

    def test_other_tasks_rank_last(self):
        # task A members cost 3, 8; the task B member counts as +inf on A
        pop = make_pop([3, 8, 6], [0, 0, 1])
        assert factorial_ranks(pop, 0).tolist() == [1, 2, 3]

    def test_bad_task(self):
        with pytest.raises(IndexError):
            factorial_ranks(make_pop([1], [0]), 1)

    def test_empty(self):
        with pytest.raises(ValueError):
            factorial_ranks(make_pop([], np.array([], dtype=int), n_tasks=1), 0)


class TestScalarFitness:
    def test_single_task(self):
        pop = update_scalar_fitness(make_pop([10, 5, 7], [0, 0, 0]))
        assert pop.scalar_fitness.tolist() == pytest.approx([1 / 3, 1, 1 / 2])

    def test_each_task_best_gets_one(self):
        pop = update_scalar_fitness(make_pop([9, 2, 40, 7, 3], [0, 1, 1, 0, 0]))
        assert pop.scalar_fitness.tolist() == pytest.approx([1 / 3, 1, 1 / 2, 1 / 2, 1])

    def test_singleton(self):
        assert update_scalar_fitness(make_pop([12], [0])).scalar_fitness.tolist() == [1.0]

    def test_unevaluated_rejected(self):
        with pytest.raises(ValueError):
            update_scalar_fitness(make_pop([1, np.nan], [0, 0]))

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 50)), min_size=1, max_size=40))
    def test_subgroup_multiset(self, members):
        skill, costs = zip(*members)
        pop = update_scalar_fitness(make_pop(costs, skill, n_tasks=4))
        for k in range(4):
            phi = sorted(pop.scalar_fitness[pop.skill_factors == k], reverse=True)
            assert phi == pytest.approx([1 / r for r in range(1, len(phi) + 1)])


class TestImitation:
    def test_identical_parents(self):
        rng = np.random.default_rng(0)
        assert all(imitate_skill_factor(2, 2, rng) == 2 for _ in range(50))

    def test_fair_coin(self):
        rng = np.random.default_rng(1)
        zeros = sum(imitate_skill_factor(0, 1, rng) == 0 for _ in range(10_000))
        assert 0.47 <= zeros / 10_000 <= 0.53


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs, n_tasks",
        [
            ({}, 0),
            ({"population_size": 1}, 1),
            ({"population_size": 2}, 3),
            ({"population_size": 7}, 1),
            ({"mutation_probability": 1.5}, 1),
            ({"rmp": -0.1}, 2),
            ({"max_evaluations": 0}, 1),
            ({"seed": -1}, 1),
        ],
    )
    def test_rejected(self, kwargs, n_tasks):
        with pytest.raises(ConfigError):
            EngineConfig(**kwargs).validate(n_tasks)

    def test_defaults(self):
        c = EngineConfig()
        assert (c.population_size, c.mutation_probability, c.rmp, c.max_evaluations, c.seed) == (500, 0.8, 1.0, 100_000, 42)


class TestInitialize:
    def test_single_task(self):
        hooks = VectorTasks([[0, 0, 0]])
        pop = initialize_population([0], hooks, EngineConfig(population_size=4), np.random.default_rng(0))
        assert pop.skill_factors.tolist() == [0, 0, 0, 0]
        assert pop.evaluations == 4

    def test_deterministic(self):
        puzzles = [bundled_puzzle("A1"), bundled_puzzle("A2")]
        hooks = SudokuTasks(puzzles)
        a = initialize_population(puzzles, hooks, EngineConfig(), np.random.default_rng(5))
        b = initialize_population(puzzles, hooks, EngineConfig(), np.random.default_rng(5))
        assert np.array_equal(a.genotypes, b.genotypes)
        assert np.array_equal(a.skill_factors, b.skill_factors)

    def test_subpopulation_sizes(self):
        hooks = VectorTasks([[0], [9]])
        sizes = [
            (initialize_population([0, 1], hooks, EngineConfig(), np.random.default_rng(s)).skill_factors == 0).sum()
            for s in range(100)
        ]
        assert 235 <= np.mean(sizes) <= 265

    def test_costs_match_hooks(self):
        hooks = VectorTasks([[0, 0], [5, 5]])
        pop = initialize_population([0, 1], hooks, EngineConfig(population_size=20), np.random.default_rng(2))
        for k in range(2):
            members = pop.skill_factors == k
            assert np.array_equal(pop.costs[members], np.abs(pop.genotypes[members] - hooks.targets[k]).sum(axis=1))


def pool_bests(population, hooks):
    """Per-task best of parents plus the children evaluated this generation."""
    best = population.best_costs()
    for task, costs in hooks.evaluated:
        best[task] = min(best[task], costs.min())
    return best


class TestEvolve:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.sampled_from([4, 6, 10, 24]), st.floats(0, 1))
    def test_accounting_and_elitism(self, seed, k, n, rmp):
        rng = np.random.default_rng(seed)
        hooks = VectorTasks(rng.integers(0, 10, size=(k, 4)))
        config = EngineConfig(population_size=n, rmp=rmp, mutation_probability=0.5)
        pop = initialize_population(list(range(k)), hooks, config, rng)
        for g in range(1, 6):
            hooks.evaluated.clear()
            pop_before = pop
            pop, stats = evolve_generation(pop, hooks, config, rng, generation=g, diversity=None)
            assert pop.evaluations == n * (g + 1)
            assert sum(len(c) for _, c in hooks.evaluated) == n
            assert len(pop) == n
            assert np.array_equal(pop.best_costs(), pool_bests(pop_before, hooks))
            assert np.array_equal(stats.best_costs, pop.best_costs())

    def test_k1_is_plain_elitist_ga(self):
        hooks = VectorTasks([[3, 3, 3, 3]])
        config = EngineConfig(population_size=10, rmp=1.0)
        rng = np.random.default_rng(4)
        pop = initialize_population([0], hooks, config, rng)
        for g in range(20):
            best = pop.costs.min()
            pop, stats = evolve_generation(pop, hooks, config, rng, generation=g + 1, diversity=None)
            assert (pop.skill_factors == 0).all()
            assert pop.costs.min() <= best
            assert stats.subpopulation_sizes.tolist() == [10]


def test_survivors_keep_true_costs_and_ranks():
    rng = np.random.default_rng(17)
    hooks = VectorTasks(rng.integers(0, 10, size=(3, 6)))
    for gen in range(100):
        n = int(rng.choice([4, 8, 12, 30]))
        config = EngineConfig(population_size=n, rmp=float(rng.random()), mutation_probability=float(rng.random()))
        pop = initialize_population([0, 1, 2], hooks, config, rng)
        hooks.evaluated.clear()
        parents_best = pop.best_costs()
        pop, _ = evolve_generation(pop, hooks, config, rng, diversity=None)
        pool_best = parents_best.copy()
        for task, costs in hooks.evaluated:
            pool_best[task] = min(pool_best[task], costs.min())
        assert np.array_equal(pop.best_costs(), pool_best)
        for k in range(3):
            members = pop.skill_factors == k
            if members.any():
                assert np.array_equal(pop.costs[members], np.abs(pop.genotypes[members] - hooks.targets[k]).sum(axis=1))
                phi = sorted(pop.scalar_fitness[members], reverse=True)
                assert phi == pytest.approx([1 / r for r in range(1, members.sum() + 1)])


class TestRun:
    def test_solved_at_initialization(self):
        hooks = VectorTasks([[1, 2, 3]], start=np.array([1, 2, 3]))
        trace = run([0], hooks, EngineConfig(population_size=6, stop_on_solve=True), diversity=None)
        assert trace.generations == [0]
        assert trace.best_costs[0] == [0.0]
        assert trace.solved_at(0) == 6

    def test_budget_of_one_population(self):
        hooks = VectorTasks([[1, 2, 3], [0, 0, 0]])
        trace = run([0, 1], hooks, EngineConfig(population_size=8, max_evaluations=8), diversity=None)
        assert len(trace) == 1 and trace.evaluations == [8]

    def test_accounting(self):
        hooks = VectorTasks([[1, 2, 3, 4], [9, 9, 9, 9]])
        trace = run([0, 1], hooks, EngineConfig(population_size=10, max_evaluations=205, stop_on_solve=False), diversity=None)
        assert trace.evaluations == [10 * (g + 1) for g in trace.generations]
        assert trace.evaluations[-1] >= 205 > trace.evaluations[-2]

    def test_full_budget_keeps_going_after_solve(self):
        hooks = VectorTasks([[1, 2]], start=np.array([1, 2]))
        trace = run([0], hooks, EngineConfig(population_size=4, max_evaluations=40, stop_on_solve=False), diversity=None)
        assert trace.generations[-1] == 9

    def test_best_cost_never_regresses(self):
        puzzles = [bundled_puzzle("B1"), bundled_puzzle("B3")]
        trace = run(puzzles, SudokuTasks(puzzles), EngineConfig(population_size=40, max_evaluations=4000))
        costs = np.array(trace.best_costs)
        assert (np.diff(costs, axis=0) <= 0).all()
        assert all(0 <= h <= 1 for h in trace.entropy)

    def test_reproducible(self):
        puzzles = [bundled_puzzle("A1"), bundled_puzzle("A3")]
        config = EngineConfig(population_size=50, max_evaluations=2000, seed=9)
        a = run(puzzles, SudokuTasks(puzzles), config)
        b = run(puzzles, SudokuTasks(puzzles), config)
        assert a == b
        c = run(puzzles, SudokuTasks(puzzles), EngineConfig(population_size=50, max_evaluations=2000, seed=10))
        assert a != c

"""Sudoku as a permutation-encoded optimization task.

A genotype is a 9x9 grid of digits whose rows are permutations of 1..9.
Column and subgrid uniqueness are soft constraints counted by the fitness;
given cells are hard constraints restored by :func:`repair`.

Every operator comes in a scalar form working on one grid and a batched
form working on a ``(n, 9, 9)`` stack; the engine only uses the batched
forms. The two are checked against each other in the test suite.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .puzzles import Puzzle

MAX_FITNESS = 162
DIGITS = np.arange(1, 10, dtype=np.int8)

# All (cut_a, cut_b) with 0 <= cut_a < cut_b <= 9; the segment is [cut_a, cut_b).
CUT_PAIRS = np.array(list(combinations(range(10), 2)), dtype=np.int64)

_POPCOUNT = np.array([bin(i).count("1") for i in range(1 << 10)], dtype=np.int16)


class GridError(ValueError):
    """A grid violates the row-permutation or given-cell contract."""


def canonical_grid() -> np.ndarray:
    """A complete valid solution built by the shifted-row pattern."""
    r = np.arange(9)[:, None]
    s = np.arange(9)[None, :]
    return ((3 * (r % 3) + r // 3 + s) % 9 + 1).astype(np.int8)


def is_row_permutation(grid) -> bool:
    grid = np.asarray(grid)
    return grid.shape[-2:] == (9, 9) and bool((np.sort(grid, axis=-1) == DIGITS).all())


def satisfies_givens(grid, puzzle: Puzzle) -> bool:
    grid = np.asarray(grid)
    fixed = puzzle.fixed
    return bool((grid[..., fixed] == puzzle.values[fixed]).all())


def _require_rows(grid) -> np.ndarray:
    grid = np.asarray(grid)
    if not is_row_permutation(grid):
        raise GridError("every row must be a permutation of 1..9")
    return grid


# -- fitness ---------------------------------------------------------------


def raw_fitness(grid) -> int:
    """Distinct digits per column plus distinct digits per 3x3 subgrid."""
    grid = _require_rows(grid)
    total = sum(len(set(grid[:, s].tolist())) for s in range(9))
    for r0 in range(0, 9, 3):
        for s0 in range(0, 9, 3):
            total += len(set(grid[r0 : r0 + 3, s0 : s0 + 3].ravel().tolist()))
    return total


def evaluate(grid, puzzle: Puzzle) -> int:
    """Cost to minimize: 162 - raw_fitness, zero exactly at a solution."""
    grid = _require_rows(grid)
    if not satisfies_givens(grid, puzzle):
        raise GridError(f"grid violates the givens of puzzle {puzzle.id}")
    return MAX_FITNESS - raw_fitness(grid)


def raw_fitness_batch(grids: np.ndarray) -> np.ndarray:
    grids = np.asarray(grids)
    bits = np.left_shift(1, grids.astype(np.int16))
    n = bits.shape[0]
    columns = np.bitwise_or.reduce(bits, axis=1)
    boxes = bits.reshape(n, 3, 3, 3, 3).transpose(0, 1, 3, 2, 4).reshape(n, 9, 9)
    boxes = np.bitwise_or.reduce(boxes, axis=2)
    return _POPCOUNT[columns].sum(axis=1) + _POPCOUNT[boxes].sum(axis=1)


# -- initialization --------------------------------------------------------


def random_individual(puzzle: Puzzle, rng: np.random.Generator) -> np.ndarray:
    return random_population(puzzle, 1, rng)[0]


def random_population(puzzle: Puzzle, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` grids honouring the givens, free digits shuffled per row."""
    out = np.broadcast_to(puzzle.values, (n, 9, 9)).copy()
    for r in range(9):
        free_cols = np.flatnonzero(puzzle.values[r] == 0)
        if free_cols.size == 0:
            continue
        free_digits = np.setdiff1d(DIGITS, puzzle.values[r])
        order = np.argsort(rng.random((n, free_cols.size)), axis=1)
        out[:, r, free_cols] = free_digits[order]
    return out


# -- crossover -------------------------------------------------------------


def pmx_row(parent_a, parent_b, cut_a: int, cut_b: int) -> list[int]:
    """Partially matched crossover of two permutations of 1..9.

    The child keeps ``parent_a`` on ``[cut_a, cut_b)``. Elsewhere it takes
    ``parent_b``'s digit, following the segment mapping b[i] -> a[i] while
    that digit is already in the copied segment.
    """
    a = [int(x) for x in parent_a]
    b = [int(x) for x in parent_b]
    if sorted(a) != list(range(1, 10)) or sorted(b) != list(range(1, 10)):
        raise GridError("pmx_row needs two permutations of 1..9")
    if not 0 <= cut_a < cut_b <= 9:
        raise ValueError(f"invalid cut points ({cut_a}, {cut_b})")
    segment = {a[i]: i for i in range(cut_a, cut_b)}
    child = list(a)
    for i in range(9):
        if cut_a <= i < cut_b:
            continue
        digit = b[i]
        while digit in segment:
            digit = b[segment[digit]]
        child[i] = digit
    return child


def pmx_rows_batch(a: np.ndarray, b: np.ndarray, cut_a: np.ndarray, cut_b: np.ndarray) -> np.ndarray:
    """Row-wise PMX over ``(m, 9)`` stacks with per-row cuts."""
    m = a.shape[0]
    cols = np.arange(9)
    seg = (cols >= cut_a[:, None]) & (cols < cut_b[:, None])
    pos_a = np.empty((m, 10), dtype=np.int64)
    np.put_along_axis(pos_a, a.astype(np.int64), np.broadcast_to(cols, (m, 9)), axis=1)
    # step[v] = b[pos_a[v]] if v sits in a's segment, else v (a fixed point)
    step = np.broadcast_to(np.arange(10), (m, 10)).copy()
    in_seg = np.take_along_axis(seg, pos_a[:, 1:], axis=1)
    mapped = np.take_along_axis(b, pos_a[:, 1:], axis=1)
    step[:, 1:] = np.where(in_seg, mapped, step[:, 1:])
    digit = b.astype(np.int64)
    for _ in range(9):
        digit = np.take_along_axis(step, digit, axis=1)
    return np.where(seg, a, digit).astype(a.dtype)


def crossover(grid_a, grid_b, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    child_a, child_b = crossover_batch(np.asarray(grid_a)[None], np.asarray(grid_b)[None], rng)
    return child_a[0], child_b[0]


def crossover_batch(parents_a: np.ndarray, parents_b: np.ndarray, rng: np.random.Generator):
    """Row-wise PMX with independent cuts per row; child 2 swaps parent roles."""
    n = parents_a.shape[0]
    cuts = CUT_PAIRS[rng.integers(len(CUT_PAIRS), size=n * 9)]
    a = parents_a.reshape(n * 9, 9)
    b = parents_b.reshape(n * 9, 9)
    child_a = pmx_rows_batch(a, b, cuts[:, 0], cuts[:, 1]).reshape(n, 9, 9)
    child_b = pmx_rows_batch(b, a, cuts[:, 0], cuts[:, 1]).reshape(n, 9, 9)
    return child_a, child_b


# -- repair ----------------------------------------------------------------


def repair(grid, puzzle: Puzzle) -> np.ndarray:
    """Restore the givens while keeping the reading order of the other digits.

    Each given digit is removed from its row, then put back at its fixed
    column; the remaining digits fill the free columns left to right.
    """
    grid = _require_rows(grid)
    out = grid.copy()
    for r in range(9):
        givens = {int(d) for d in puzzle.values[r] if d}
        if not givens:
            continue
        rest = [int(d) for d in grid[r] if int(d) not in givens]
        free = iter(rest)
        for s in range(9):
            given = int(puzzle.values[r, s])
            out[r, s] = given if given else next(free)
    return out


class _RepairPlan:
    """Per-puzzle lookup tables for the batched repair."""

    def __init__(self, puzzle: Puzzle):
        values = puzzle.values.astype(np.int64)
        self.fixed = puzzle.fixed
        self.values = puzzle.values
        # is_given[r, d] is 1 when digit d is a given somewhere in row r
        self.is_given = np.zeros((9, 10), dtype=np.int8)
        rows, cols = np.nonzero(values)
        self.is_given[rows, values[rows, cols]] = 1
        # target column for the k-th digit after a stable sort putting non-givens first
        self.columns = np.argsort(self.fixed, axis=1, kind="stable")


def repair_batch(grids: np.ndarray, puzzle: Puzzle, plan: _RepairPlan | None = None) -> np.ndarray:
    plan = plan or _RepairPlan(puzzle)
    n = grids.shape[0]
    rows = np.arange(9)[None, :, None]
    flags = plan.is_given[rows, grids.astype(np.int64)]
    order = np.argsort(flags, axis=2, kind="stable")
    ordered = np.take_along_axis(grids, order, axis=2)
    out = np.empty_like(grids)
    np.put_along_axis(out, np.broadcast_to(plan.columns, (n, 9, 9)), ordered, axis=2)
    out[:, plan.fixed] = plan.values[plan.fixed]
    return out


# -- mutation --------------------------------------------------------------


def _free_layout(puzzle: Puzzle):
    free_count = (~puzzle.fixed).sum(axis=1)
    eligible = np.flatnonzero(free_count >= 2)
    # free_cols[r, :free_count[r]] lists the free columns of row r
    free_cols = np.argsort(puzzle.fixed, axis=1, kind="stable")
    return eligible, free_count, free_cols


def mutate(grid, puzzle: Puzzle, rng: np.random.Generator) -> np.ndarray:
    """Swap two distinct free cells of one row.

    The row is drawn uniformly among rows with at least two free cells;
    the grid comes back unchanged when there is no such row.
    """
    grid = np.asarray(grid)
    eligible, free_count, free_cols = _free_layout(puzzle)
    out = grid.copy()
    if eligible.size == 0:
        return out
    r = int(eligible[rng.integers(eligible.size)])
    i, j = rng.choice(int(free_count[r]), size=2, replace=False)
    s, t = free_cols[r, i], free_cols[r, j]
    out[r, s], out[r, t] = grid[r, t], grid[r, s]
    return out


def mutate_batch(grids: np.ndarray, puzzle: Puzzle, rng: np.random.Generator, layout=None) -> np.ndarray:
    eligible, free_count, free_cols = layout or _free_layout(puzzle)
    out = grids.copy()
    n = grids.shape[0]
    if eligible.size == 0 or n == 0:
        return out
    rows = eligible[rng.integers(eligible.size, size=n)]
    counts = free_count[rows]
    i = (rng.random(n) * counts).astype(np.int64)
    j = (rng.random(n) * (counts - 1)).astype(np.int64)
    j += j >= i
    s = free_cols[rows, i]
    t = free_cols[rows, j]
    idx = np.arange(n)
    out[idx, rows, s] = grids[idx, rows, t]
    out[idx, rows, t] = grids[idx, rows, s]
    return out


def mutate_rows_batch(grids: np.ndarray, puzzle: Puzzle, probability: float, rng: np.random.Generator, layout=None) -> np.ndarray:
    """Per-row variant: every row with two free cells swaps a pair with ``probability``."""
    eligible, free_count, free_cols = layout or _free_layout(puzzle)
    out = grids.copy()
    n = grids.shape[0]
    for r in eligible:
        hit = np.flatnonzero(rng.random(n) < probability)
        if hit.size == 0:
            continue
        count = free_count[r]
        i = (rng.random(hit.size) * count).astype(np.int64)
        j = (rng.random(hit.size) * (count - 1)).astype(np.int64)
        j += j >= i
        s, t = free_cols[r, i], free_cols[r, j]
        out[hit, r, s] = grids[hit, r, t]
        out[hit, r, t] = grids[hit, r, s]
    return out


# -- engine adapter --------------------------------------------------------


class SudokuTasks:
    """Batched task hooks over an ordered list of puzzles.

    Task ``k`` of the engine is ``puzzles[k]``; the same puzzle may appear
    twice (task cloning).
    """

    def __init__(self, puzzles, row_mutation_probability=None):
        self.puzzles = list(puzzles)
        self.row_mutation_probability = row_mutation_probability
        self._plans = [_RepairPlan(p) for p in self.puzzles]
        self._layouts = [_free_layout(p) for p in self.puzzles]

    def __len__(self):
        return len(self.puzzles)

    def evaluate(self, genotypes, task):
        return (MAX_FITNESS - raw_fitness_batch(genotypes)).astype(np.float64)

    def random_genotype(self, n, task, rng):
        return random_population(self.puzzles[task], n, rng)

    def crossover(self, parents_a, parents_b, rng):
        return crossover_batch(parents_a, parents_b, rng)

    def repair(self, genotypes, task):
        return repair_batch(genotypes, self.puzzles[task], self._plans[task])

    def mutate(self, genotypes, task, rng):
        if self.row_mutation_probability is None:
            return mutate_batch(genotypes, self.puzzles[task], rng, self._layouts[task])
        return mutate_rows_batch(genotypes, self.puzzles[task], self.row_mutation_probability, rng, self._layouts[task])

    def is_solved(self, cost):
        return cost == 0

"""Sudoku puzzle statements: parsing, bundled assets and exact solving."""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

BUNDLED_IDS = ("A1", "A2", "A3", "B1", "B2", "B3")
PUZZLE_DIR_ENV = "MFEA_PUZZLE_DIR"


class PuzzleError(ValueError):
    """Raised for malformed or ill-posed puzzle statements."""


@dataclass(frozen=True, eq=False)
class Puzzle:
    """A puzzle statement.

    ``values`` is a 9x9 int8 array holding the given digit of each fixed cell
    and 0 for free cells. Rows and columns are 0-based.
    """

    id: str
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int8).reshape(9, 9).copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def fixed(self) -> np.ndarray:
        return self.values > 0

    @property
    def fixed_count(self) -> int:
        return int(self.fixed.sum())

    @property
    def givens(self) -> tuple[tuple[int, int, int], ...]:
        rows, cols = np.nonzero(self.values)
        return tuple((int(r), int(c), int(self.values[r, c])) for r, c in zip(rows, cols))

    def to_text(self) -> str:
        lines = ("".join(str(d) if d else "." for d in row) for row in self.values)
        return "\n".join(lines) + "\n"

    def __eq__(self, other):
        if not isinstance(other, Puzzle):
            return NotImplemented
        return self.id == other.id and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.id, self.values.tobytes()))

    def __repr__(self):
        return f"Puzzle(id={self.id!r}, fixed_count={self.fixed_count})"


def _units():
    for r in range(9):
        yield f"row {r + 1}", [(r, c) for c in range(9)]
    for c in range(9):
        yield f"column {c + 1}", [(r, c) for r in range(9)]
    for b in range(9):
        r0, c0 = 3 * (b // 3), 3 * (b % 3)
        yield f"subgrid {b + 1}", [(r0 + i, c0 + j) for i in range(3) for j in range(3)]


def check_givens(values: np.ndarray) -> None:
    """Raise PuzzleError naming the first unit holding a repeated given."""
    for name, cells in _units():
        digits = [int(values[r, c]) for r, c in cells if values[r, c]]
        seen = set()
        for d in digits:
            if d in seen:
                raise PuzzleError(f"ill-posed puzzle: digit {d} repeated in {name}")
            seen.add(d)


def parse_puzzle(text: str, id: str) -> Puzzle:
    """Parse a puzzle from 9 lines of 9 characters or one 81-character line.

    Digits are givens and '.' marks a free cell.
    """
    lines = [line.rstrip("\r") for line in text.split("\n")]
    while lines and lines[-1] == "":
        lines.pop()
    if len(lines) == 1 and len(lines[0]) == 81:
        lines = [lines[0][i : i + 9] for i in range(0, 81, 9)]
    if len(lines) != 9:
        raise PuzzleError(f"{id}: expected 9 lines of 9 cells or one line of 81, got {len(lines)} lines")
    values = np.zeros((9, 9), dtype=np.int8)
    for r, line in enumerate(lines):
        if len(line) != 9:
            raise PuzzleError(f"{id}: line {r + 1} has {len(line)} characters, expected 9")
        for c, ch in enumerate(line):
            if ch == ".":
                continue
            if ch not in "123456789":
                raise PuzzleError(f"{id}: illegal character {ch!r} at line {r + 1}, column {c + 1}")
            values[r, c] = int(ch)
    check_givens(values)
    return Puzzle(id, values)


def load_puzzle(path, id: str | None = None) -> Puzzle:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_puzzle(text, id or path.stem)


def puzzle_dir() -> Path:
    override = os.environ.get(PUZZLE_DIR_ENV)
    if override:
        return Path(override)
    return Path(str(resources.files("mfea_sudoku") / "assets"))


def bundled_path(id: str) -> Path:
    return puzzle_dir() / f"{id}.sdk"


def bundled_puzzle(id: str) -> Puzzle:
    path = bundled_path(id)
    if not path.is_file():
        raise FileNotFoundError(f"no puzzle asset for id {id!r} at {path}")
    return load_puzzle(path, id)


def asset_checksum(id: str) -> str:
    return hashlib.sha256(bundled_path(id).read_bytes()).hexdigest()


def exact_solve(puzzle: Puzzle) -> np.ndarray | None:
    """Plain backtracking in row-major order, candidates ascending.

    Returns the first complete solution found, or None when unsatisfiable.
    """
    grid = [[int(d) for d in row] for row in puzzle.values]
    rows = [set() for _ in range(9)]
    cols = [set() for _ in range(9)]
    boxes = [set() for _ in range(9)]
    for r in range(9):
        for c in range(9):
            d = grid[r][c]
            if d:
                rows[r].add(d)
                cols[c].add(d)
                boxes[3 * (r // 3) + c // 3].add(d)
    empty = [(r, c) for r in range(9) for c in range(9) if not grid[r][c]]

    def place(k):
        if k == len(empty):
            return True
        r, c = empty[k]
        b = 3 * (r // 3) + c // 3
        for d in range(1, 10):
            if d in rows[r] or d in cols[c] or d in boxes[b]:
                continue
            grid[r][c] = d
            rows[r].add(d)
            cols[c].add(d)
            boxes[b].add(d)
            if place(k + 1):
                return True
            rows[r].discard(d)
            cols[c].discard(d)
            boxes[b].discard(d)
        grid[r][c] = 0
        return False

    if not place(0):
        return None
    return np.array(grid, dtype=np.int8)


def solution_similarity(grid_a, grid_b) -> int:
    """Number of cells holding the same digit in both grids."""
    return int((np.asarray(grid_a) == np.asarray(grid_b)).sum())


def log9_search_space(fp_focal: int, fp_conditioning: int = 0) -> int:
    """Base-9 logarithm of the naive candidate count, 81 - fp_focal - fp_conditioning.

    Clamped at 0 when the two fixed-cell counts together exceed 81.
    """
    for fp in (fp_focal, fp_conditioning):
        if not 0 <= fp <= 81:
            raise ValueError(f"fixed-position count {fp} outside [0, 81]")
    return max(0, 81 - fp_focal - fp_conditioning)

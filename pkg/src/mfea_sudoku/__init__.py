"""Multifactorial evolutionary multitasking on Sudoku puzzles."""

from .diversity import locus_entropy, population_entropy, total_entropy
from .engine import EngineConfig, Population, RunTrace, run
from .puzzles import Puzzle, PuzzleError, bundled_puzzle, exact_solve, parse_puzzle, solution_similarity
from .sudoku import SudokuTasks, evaluate, raw_fitness

__all__ = [
    "EngineConfig",
    "Population",
    "Puzzle",
    "PuzzleError",
    "RunTrace",
    "SudokuTasks",
    "bundled_puzzle",
    "evaluate",
    "exact_solve",
    "locus_entropy",
    "parse_puzzle",
    "population_entropy",
    "raw_fitness",
    "run",
    "solution_similarity",
    "total_entropy",
]

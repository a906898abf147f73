import numpy as np
import pytest

from mfea_sudoku.puzzles import (
    BUNDLED_IDS,
    PUZZLE_DIR_ENV,
    Puzzle,
    PuzzleError,
    asset_checksum,
    bundled_path,
    bundled_puzzle,
    exact_solve,
    load_puzzle,
    log9_search_space,
    parse_puzzle,
    solution_similarity,
)
from mfea_sudoku.sudoku import canonical_grid, raw_fitness, satisfies_givens


def test_empty_puzzle():
    p = parse_puzzle("." * 81, "e")
    assert p.fixed_count == 0
    assert p.givens == ()


def test_grid_text_and_single_line_agree():
    text = bundled_path("A1").read_text()
    assert parse_puzzle(text, "x") == parse_puzzle(text.replace("\n", ""), "x")


def test_zero_is_not_a_blank():
    with pytest.raises(PuzzleError, match="illegal character"):
        parse_puzzle("0" * 81, "z")


def test_illegal_character():
    with pytest.raises(PuzzleError, match="illegal character"):
        parse_puzzle("x" + "." * 80, "bad")


def test_wrong_length():
    with pytest.raises(PuzzleError):
        parse_puzzle("." * 80, "short")
    with pytest.raises(PuzzleError):
        parse_puzzle("\n".join(["." * 9] * 8), "eight rows")


@pytest.mark.parametrize(
    "cells, unit",
    [
        ({(0, 0): 5, (0, 8): 5}, "row 1"),
        ({(0, 3): 2, (7, 3): 2}, "column 4"),
        ({(3, 3): 7, (5, 5): 7}, "subgrid 5"),
    ],
)
def test_duplicate_givens_name_the_unit(cells, unit):
    values = np.zeros((9, 9), dtype=int)
    for (r, c), d in cells.items():
        values[r, c] = d
    text = "".join(str(d) if d else "." for d in values.ravel())
    with pytest.raises(PuzzleError, match=unit):
        parse_puzzle(text, "dup")


def test_values_are_read_only():
    p = bundled_puzzle("A1")
    with pytest.raises(ValueError):
        p.values[0, 0] = 1


def test_a1_transcription():
    p = bundled_puzzle("A1")
    # 1-based cells from the figure
    assert p.values[0, 0] == 9
    assert p.values[0, 1] == 1
    assert p.values[0, 3] == 7
    assert p.values[4, 0] == 3
    assert p.values[4, 8] == 6
    assert p.fixed_count == 34


@pytest.mark.parametrize("pid", BUNDLED_IDS)
def test_bundled_assets(pid):
    p = bundled_puzzle(pid)
    lines = bundled_path(pid).read_text().splitlines()
    assert len(lines) == 9 and all(len(line) == 9 for line in lines)
    assert p.to_text() == bundled_path(pid).read_text()
    assert len(asset_checksum(pid)) == 64


def test_puzzle_dir_override(tmp_path, monkeypatch):
    (tmp_path / "A1.sdk").write_text("." * 81)
    monkeypatch.setenv(PUZZLE_DIR_ENV, str(tmp_path))
    assert bundled_puzzle("A1").fixed_count == 0
    with pytest.raises(FileNotFoundError):
        bundled_puzzle("A2")


def test_load_puzzle_defaults_id_to_stem(tmp_path):
    path = tmp_path / "mine.sdk"
    path.write_text(bundled_path("B1").read_text())
    assert load_puzzle(path).id == "mine"


class TestExactSolve:
    def test_full_grid(self):
        grid = canonical_grid()
        assert np.array_equal(exact_solve(Puzzle("full", grid)), grid)

    def test_unsatisfiable(self):
        # the first row forces cell (0, 8) to 9, which column 8 already holds
        values = np.zeros((9, 9), dtype=int)
        values[0, :8] = range(1, 9)
        values[5, 8] = 9
        assert exact_solve(Puzzle("stuck", values)) is None

    @pytest.mark.parametrize("pid", BUNDLED_IDS)
    def test_bundled_solutions(self, pid):
        p = bundled_puzzle(pid)
        solution = exact_solve(p)
        assert solution is not None
        assert raw_fitness(solution) == 162
        assert satisfies_givens(solution, p)


class TestSimilarity:
    def test_identity(self):
        assert solution_similarity(canonical_grid(), canonical_grid()) == 81

    def test_one_swap(self):
        grid = canonical_grid()
        other = grid.copy()
        other[3, [2, 6]] = other[3, [6, 2]]
        assert solution_similarity(grid, other) == 79

    def test_group_premise(self):
        s = {pid: exact_solve(bundled_puzzle(pid)) for pid in BUNDLED_IDS}
        assert solution_similarity(s["A1"], s["A2"]) > solution_similarity(s["A1"], s["A3"])
        assert solution_similarity(s["B1"], s["B2"]) > solution_similarity(s["B1"], s["B3"])


class TestLog9:
    def test_examples(self):
        assert log9_search_space(30) == 51
        assert log9_search_space(30, 28) == 23

    def test_clone_reports_unconditioned_size(self):
        fp = bundled_puzzle("A1").fixed_count
        assert log9_search_space(fp) == 81 - fp

    def test_clamped_at_zero(self):
        assert log9_search_space(60, 40) == 0

    @pytest.mark.parametrize("args", [(-1,), (82,), (30, 90)])
    def test_out_of_range(self, args):
        with pytest.raises(ValueError):
            log9_search_space(*args)

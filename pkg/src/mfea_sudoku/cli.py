"""Command-line interface: ``mfea-sudoku {solve,experiment,puzzles,oracle}``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import engine, experiments
from .engine import ConfigError, EngineConfig
from .puzzles import (
    BUNDLED_IDS,
    PuzzleError,
    bundled_path,
    bundled_puzzle,
    exact_solve,
    load_puzzle,
    log9_search_space,
    solution_similarity,
)
from .sudoku import MAX_FITNESS, SudokuTasks, raw_fitness

DEFAULT_SEED = 42


class CliFailure(Exception):
    """A runtime failure reported on stderr with exit code 1."""


def _probability(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{value} is outside [0, 1]")
    return value


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"{value} must be positive")
    return value


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed {value} is not a 64-bit unsigned integer")
    return value


def _engine_flags(parser, seed_default, seed_help):
    parser.add_argument("--pop", type=_positive_int, default=None, help="population size N, even (default 500)")
    parser.add_argument("--mutation", type=_probability, default=None, help="per-offspring mutation probability (default 0.8)")
    parser.add_argument("--rmp", type=_probability, default=None, help="random mating probability for cross-task pairs (default 1.0)")
    parser.add_argument("--max-evals", type=_positive_int, default=None, help="evaluation budget per run (default 100000)")
    parser.add_argument("--seed", type=_seed, default=seed_default, help=seed_help)


def _overrides(args) -> dict:
    return {
        "population_size": args.pop,
        "mutation_probability": args.mutation,
        "rmp": args.rmp,
        "max_evaluations": args.max_evals,
        "seed": args.seed,
    }


def _resolve_puzzle(ref: str):
    """Load a puzzle from a file path, or a bundled asset by id."""
    path = Path(ref)
    try:
        if path.is_file():
            return load_puzzle(path)
        if ref in BUNDLED_IDS:
            return bundled_puzzle(ref)
    except (OSError, UnicodeDecodeError) as exc:
        raise CliFailure(f"cannot read puzzle {ref}: {exc}") from exc
    except PuzzleError as exc:
        raise CliFailure(f"{ref}: {exc}") from exc
    raise CliFailure(f"cannot read puzzle {ref}: no such file")


def _grid_text(grid) -> str:
    return "\n".join("".join(str(int(d)) for d in row) for row in grid)


# -- solve -----------------------------------------------------------------


def cmd_solve(args) -> int:
    puzzles = [_resolve_puzzle(ref) for ref in args.puzzles]
    overrides = {k: v for k, v in _overrides(args).items() if v is not None}
    config = EngineConfig(**overrides)
    config.validate(len(puzzles))
    callback = None
    if args.verbose:
        def callback(stats):
            best = " ".join(f"{MAX_FITNESS - c:g}" for c in stats.best_costs)
            print(f"generation {stats.generation} evaluations {stats.evaluations} best {best} entropy {stats.entropy:.4f}", file=sys.stderr)

    trace = engine.run(puzzles, SudokuTasks(puzzles), config, callback=callback)
    final = trace.best_costs[-1]
    print(f"tasks {len(puzzles)} generations {trace.generations[-1]} evaluations {trace.evaluations[-1]} seed {config.seed}")
    for k, (puzzle, cost) in enumerate(zip(puzzles, final)):
        status = "solved" if cost == 0 else "unsolved"
        print(f"task {k + 1} {puzzle.id}: best cost {cost:g} fitness {MAX_FITNESS - cost:g} {status}")
    if args.trace:
        _write_trace(trace, args.trace)
    return 0


def _write_trace(trace, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ["generation", "evaluations"] + [f"best_cost_task{k + 1}" for k in range(trace.n_tasks)] + ["entropy"]
    lines = [",".join(header)]
    for g, e, costs, h in zip(trace.generations, trace.evaluations, trace.best_costs, trace.entropy):
        lines.append(",".join([str(g), str(e)] + [f"{c:g}" for c in costs] + [f"{h:.6f}"]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- experiment ------------------------------------------------------------


def cmd_experiment(args) -> int:
    modes = experiments.MODES if args.mode == "all" else (args.mode,)
    out = Path(args.out)
    overrides = _overrides(args)
    overrides["stop_on_solve"] = True if args.stop_on_solve else None
    setups = []
    for mode in modes:
        try:
            setups.append(
                experiments.build_setup(args.group, mode, repetitions=args.runs, mutation_scope=args.mutation_scope, **overrides)
            )
        except (PuzzleError, FileNotFoundError) as exc:
            raise CliFailure(str(exc)) from exc
    results = []
    for setup in setups:
        manifest = out / f"{setup.name}_manifest.txt"
        try:
            curves = experiments.run_experiment(setup, workers=args.workers)
        except experiments.ExperimentError as exc:
            experiments.write_manifest(setup, manifest, failed_seed=exc.seed, error=str(exc))
            raise CliFailure(str(exc)) from exc
        csv_path, mean_path = experiments.emit_csv(curves, out / f"{setup.name}.csv")
        experiments.write_manifest(setup, manifest)
        results.append(curves)
        print(
            f"{setup.name}: runs {setup.repetitions} solved {curves.solved_count} "
            f"final mean fitness {curves.mean_focal_fitness[-1]:.2f} final mean entropy {curves.mean_entropy[-1]:.4f} "
            f"-> {csv_path}, {mean_path}, {manifest}"
        )
    if args.plot:
        prefix = args.group if args.mode == "all" else f"{args.group}_{args.mode}"
        for kind in ("convergence", "entropy"):
            path = experiments.emit_plot(results, kind, out / f"{prefix}_{kind}.svg")
            print(f"plot {kind} -> {path}")
    return 0


# -- puzzles ---------------------------------------------------------------


def cmd_puzzles(args) -> int:
    if args.action == "list":
        puzzles = {i: bundled_puzzle(i) for i in BUNDLED_IDS}
        print("id fixed log9_size")
        for pid, p in puzzles.items():
            print(f"{pid} {p.fixed_count} {log9_search_space(p.fixed_count)}")
        print("pairwise log9 sizes (81 - fp1 - fp2)")
        for group in experiments.GROUPS:
            ids = [i for i in BUNDLED_IDS if i.startswith(group)]
            for a in ids:
                for b in ids:
                    if a < b:
                        fa, fb = puzzles[a].fixed_count, puzzles[b].fixed_count
                        print(f"{a} {b} {log9_search_space(fa, fb)}")
    elif args.action == "show":
        if args.target not in BUNDLED_IDS:
            raise CliFailure(f"unknown puzzle id {args.target!r}; bundled ids are {', '.join(BUNDLED_IDS)}")
        sys.stdout.write(bundled_path(args.target).read_text(encoding="utf-8"))
    else:
        puzzle = _resolve_puzzle(args.target)
        print(f"{args.target}: ok, {puzzle.fixed_count} fixed cells")
    return 0


# -- oracle ----------------------------------------------------------------


def _solve_exact(ref):
    puzzle = _resolve_puzzle(ref)
    solution = exact_solve(puzzle)
    if solution is None:
        raise CliFailure(f"{ref}: puzzle is unsatisfiable")
    return solution


def cmd_oracle(args) -> int:
    if args.action == "solve":
        solution = _solve_exact(args.refs[0])
        print(_grid_text(solution))
        print(f"raw fitness {raw_fitness(solution)}")
    else:
        a, b = (_solve_exact(ref) for ref in args.refs)
        print(solution_similarity(a, b))
    return 0


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mfea-sudoku", description="Multifactorial evolution on Sudoku puzzles.")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="logging level (default WARNING)")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="evolve one or more puzzles together (one puzzle = single-tasking)")
    solve.add_argument("puzzles", nargs="+", metavar="PUZZLE", help="puzzle file or bundled id (A1..B3)")
    _engine_flags(solve, DEFAULT_SEED, f"random seed (default {DEFAULT_SEED})")
    solve.add_argument("--trace", metavar="CSV", help="write the per-generation trace to this CSV file")
    solve.add_argument("--verbose", action="store_true", help="log one line per generation on stderr")
    solve.set_defaults(func=cmd_solve)

    exp = sub.add_parser("experiment", help="repeat seeded runs of the single/multitasking setups")
    exp.add_argument("--group", choices=experiments.GROUPS, required=True)
    exp.add_argument("--mode", choices=experiments.MODES + ("all",), default="all")
    exp.add_argument("--runs", type=_positive_int, default=experiments.DEFAULT_REPETITIONS, help="repetitions per setup (default 20)")
    exp.add_argument("--out", default="results", help="output directory (default results/)")
    exp.add_argument("--plot", action="store_true", help="also write convergence and entropy SVG charts")
    exp.add_argument("--workers", type=_positive_int, default=1, help="parallel processes for the runs (default 1)")
    exp.add_argument(
        "--mutation-scope",
        choices=experiments.MUTATION_SCOPES,
        default="offspring",
        help="apply --mutation once per offspring (default) or to each row of it",
    )
    exp.add_argument("--stop-on-solve", action="store_true", help="stop a run once every task is solved and pad its curves")
    _engine_flags(exp, experiments.BASE_SEED, f"base seed; run i uses base + i (default {experiments.BASE_SEED})")
    exp.set_defaults(func=cmd_experiment)

    puz = sub.add_parser("puzzles", help="inspect the bundled puzzles or validate a puzzle file")
    puz_sub = puz.add_subparsers(dest="action", required=True)
    puz_sub.add_parser("list", help="fixed-cell counts and log9 search-space sizes")
    show = puz_sub.add_parser("show", help="print a bundled puzzle")
    show.add_argument("target", metavar="ID")
    check = puz_sub.add_parser("check", help="validate a puzzle file")
    check.add_argument("target", metavar="PATH")
    puz.set_defaults(func=cmd_puzzles)

    oracle = sub.add_parser("oracle", help="exact backtracking solutions")
    oracle_sub = oracle.add_subparsers(dest="action", required=True)
    osolve = oracle_sub.add_parser("solve", help="print the backtracking solution")
    osolve.add_argument("refs", nargs=1, metavar="PUZZLE")
    osim = oracle_sub.add_parser("similarity", help="cells shared by two exact solutions")
    osim.add_argument("refs", nargs=2, metavar="PUZZLE")
    oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""The eight single/multitasking setups, repeated seeded runs and their outputs."""

from __future__ import annotations

import csv
import dataclasses
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import engine
from .engine import EngineConfig, RunTrace
from .puzzles import asset_checksum, bundled_puzzle
from .sudoku import MAX_FITNESS, SudokuTasks
from .svg import line_chart

GROUPS = ("A", "B")
MODES = ("st", "clone", "synergy", "unrelated")
MODE_NAMES = {"st": "ST", "clone": "MT_CLONE", "synergy": "MT_SYNERGY", "unrelated": "MT_UNRELATED"}
MODE_LABELS = {"st": "ST", "clone": "MT(clone)", "synergy": "MT(synergy)", "unrelated": "MT(unrelated)"}
BASE_SEED = 20160724
DEFAULT_REPETITIONS = 20
MUTATION_SCOPES = ("offspring", "row")

CSV_HEADER = [
    "setup",
    "mode",
    "run",
    "generation",
    "evaluations",
    "best_fitness_task1",
    "best_fitness_task2",
    "entropy",
    "padded",
]
MEAN_HEADER = [
    "setup",
    "mode",
    "generation",
    "evaluations",
    "mean_best_fitness_task1",
    "mean_best_fitness_task2",
    "mean_entropy",
    "padded_runs",
]


class ExperimentError(RuntimeError):
    def __init__(self, message, seed=None):
        super().__init__(message)
        self.seed = seed


def resolve_tasks(group: str, mode: str) -> tuple[str, ...]:
    if group not in GROUPS:
        raise ValueError(f"unknown group {group!r}; expected one of {GROUPS}")
    focal, partner, other = f"{group}1", f"{group}2", f"{group}3"
    table = {
        "st": (focal,),
        "clone": (focal, focal),
        "synergy": (focal, partner),
        "unrelated": (focal, other),
    }
    if mode not in table:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return table[mode]


@dataclass(frozen=True)
class ExperimentSetup:
    group: str
    mode: str
    task_ids: tuple[str, ...]
    config: EngineConfig
    repetitions: int = DEFAULT_REPETITIONS
    mutation_scope: str = "offspring"

    @property
    def name(self) -> str:
        return f"{self.group}_{self.mode}"

    @property
    def label(self) -> str:
        return MODE_LABELS[self.mode]

    def seeds(self) -> list[int]:
        return [self.config.seed + i for i in range(self.repetitions)]

    @property
    def horizon(self) -> int:
        """Trace length of a run that spends its whole budget."""
        return math.ceil(self.config.max_evaluations / self.config.population_size)


def build_setup(
    group: str,
    mode: str,
    repetitions: int = DEFAULT_REPETITIONS,
    mutation_scope: str = "offspring",
    **overrides,
) -> ExperimentSetup:
    """Resolve a (group, mode) pair into tasks and an engine configuration.

    Runs spend their full budget by default so the diversity curves show what
    happens after a task is solved; pass ``stop_on_solve=True`` to stop early.
    With ``mutation_scope="row"`` the mutation probability is applied to each
    row of every offspring instead of once per offspring.
    """
    task_ids = resolve_tasks(group, mode)
    for tid in set(task_ids):
        bundled_puzzle(tid)
    defaults = {"seed": BASE_SEED, "stop_on_solve": False}
    defaults.update({k: v for k, v in overrides.items() if v is not None})
    config = EngineConfig(**defaults)
    config.validate(len(task_ids))
    if repetitions < 1:
        raise ValueError("repetitions must be positive")
    if mutation_scope not in MUTATION_SCOPES:
        raise ValueError(f"unknown mutation scope {mutation_scope!r}; expected one of {MUTATION_SCOPES}")
    return ExperimentSetup(group, mode, task_ids, config, repetitions, mutation_scope)


@dataclass
class RunCurves:
    """One run, padded to the setup horizon by holding its last record."""

    run: int
    seed: int
    evaluations: np.ndarray
    best_fitness: np.ndarray  # (generations, K), -inf where a task has no members
    entropy: np.ndarray
    padded: np.ndarray
    solved_at: int | None

    @property
    def focal_fitness(self) -> np.ndarray:
        return self.best_fitness[:, 0]


@dataclass
class AggregatedCurves:
    setup: ExperimentSetup
    runs: list[RunCurves]

    @property
    def generations(self) -> np.ndarray:
        return np.arange(len(self.runs[0].entropy))

    @property
    def evaluations(self) -> np.ndarray:
        return self.runs[0].evaluations

    @property
    def mean_focal_fitness(self) -> np.ndarray:
        return np.mean([r.focal_fitness for r in self.runs], axis=0)

    @property
    def mean_second_fitness(self) -> np.ndarray | None:
        if len(self.setup.task_ids) < 2:
            return None
        return np.mean([r.best_fitness[:, 1] for r in self.runs], axis=0)

    @property
    def mean_entropy(self) -> np.ndarray:
        return np.mean([r.entropy for r in self.runs], axis=0)

    @property
    def solved_count(self) -> int:
        return sum(r.solved_at is not None for r in self.runs)

    def evaluations_to_solve(self) -> np.ndarray:
        """Per run, evaluations until the focal task hit 162, censored at the budget."""
        budget = self.setup.config.max_evaluations
        return np.array([r.solved_at if r.solved_at is not None else budget for r in self.runs])

    def fitness_at(self, evaluations: int) -> float:
        """Mean focal fitness at the first record reaching ``evaluations``."""
        idx = min(int(np.searchsorted(self.evaluations, evaluations)), len(self.evaluations) - 1)
        return float(self.mean_focal_fitness[idx])


def _pad(trace: RunTrace, run: int, setup: ExperimentSetup) -> RunCurves:
    n = setup.config.population_size
    length = max(setup.horizon, len(trace))
    costs = np.array(trace.best_costs, dtype=float)
    entropy = np.array(trace.entropy, dtype=float)
    padded = np.zeros(length, dtype=bool)
    padded[len(trace) :] = True
    extra = length - len(trace)
    if extra:
        costs = np.vstack([costs, np.repeat(costs[-1:], extra, axis=0)])
        entropy = np.concatenate([entropy, np.repeat(entropy[-1], extra)])
    evaluations = n * (np.arange(length) + 1)
    return RunCurves(run, trace.seed, evaluations, MAX_FITNESS - costs, entropy, padded, trace.solved_at(0))


def _single_run(setup: ExperimentSetup, run: int) -> RunTrace:
    puzzles = [bundled_puzzle(tid) for tid in setup.task_ids]
    config = dataclasses.replace(setup.config, seed=setup.config.seed + run)
    if setup.mutation_scope == "row":
        hooks = SudokuTasks(puzzles, row_mutation_probability=config.mutation_probability)
        config = dataclasses.replace(config, mutation_probability=1.0)
    else:
        hooks = SudokuTasks(puzzles)
    return engine.run(puzzles, hooks, config)


def run_experiment(setup: ExperimentSetup, workers: int = 1) -> AggregatedCurves:
    """Run every repetition (seed = base seed + run index) and align the traces."""
    runs = range(setup.repetitions)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    traces = {}
    try:
        pending = {i: pool.submit(_single_run, setup, i) for i in runs} if pool else {}
        for i in runs:
            seed = setup.config.seed + i
            try:
                traces[i] = pending[i].result() if pool else _single_run(setup, i)
            except Exception as exc:
                raise ExperimentError(f"{setup.name} run {i} (seed {seed}) failed: {exc}", seed) from exc
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)
    return AggregatedCurves(setup, [_pad(traces[i], i, setup) for i in runs])


# -- output ----------------------------------------------------------------


def _fitness_cell(value: float) -> str:
    return "" if not np.isfinite(value) else str(int(value))


def _mean_cell(value) -> str:
    return "" if value is None or not np.isfinite(value) else f"{value:.6f}"


def csv_text(curves: AggregatedCurves) -> str:
    setup = curves.setup
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    two = len(setup.task_ids) > 1
    for rc in curves.runs:
        for g in range(len(rc.entropy)):
            writer.writerow(
                [
                    setup.name,
                    MODE_NAMES[setup.mode],
                    rc.run,
                    g,
                    int(rc.evaluations[g]),
                    _fitness_cell(rc.best_fitness[g, 0]),
                    _fitness_cell(rc.best_fitness[g, 1]) if two else "",
                    f"{rc.entropy[g]:.6f}",
                    int(rc.padded[g]),
                ]
            )
    return buf.getvalue()


def mean_csv_text(curves: AggregatedCurves) -> str:
    setup = curves.setup
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MEAN_HEADER)
    focal, second, entropy = curves.mean_focal_fitness, curves.mean_second_fitness, curves.mean_entropy
    padded = np.sum([rc.padded for rc in curves.runs], axis=0)
    for g in curves.generations:
        writer.writerow(
            [
                setup.name,
                MODE_NAMES[setup.mode],
                g,
                int(curves.evaluations[g]),
                _mean_cell(focal[g]),
                _mean_cell(second[g]) if second is not None else "",
                f"{entropy[g]:.6f}",
                int(padded[g]),
            ]
        )
    return buf.getvalue()


def mean_path(path) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}_mean{path.suffix}")


def emit_csv(curves: AggregatedCurves, path) -> tuple[Path, Path]:
    """Write the per-run CSV at ``path`` and the per-generation means beside it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(curves), encoding="utf-8")
    companion = mean_path(path)
    companion.write_text(mean_csv_text(curves), encoding="utf-8")
    return path, companion


def manifest_text(setup: ExperimentSetup, failed_seed: int | None = None, error: str | None = None) -> str:
    entries = [
        ("setup", setup.name),
        ("group", setup.group),
        ("mode", MODE_NAMES[setup.mode]),
        ("tasks", ",".join(setup.task_ids)),
        ("repetitions", setup.repetitions),
    ]
    for field in dataclasses.fields(setup.config):
        value = getattr(setup.config, field.name)
        entries.append(("base_seed" if field.name == "seed" else field.name, value))
    entries.append(("mutation_scope", setup.mutation_scope))
    entries.append(("run_seeds", f"base_seed+0..base_seed+{setup.repetitions - 1}"))
    entries.append(("focal_task", setup.task_ids[0]))
    entries.append(("fitness_curve", "best-of-population raw fitness of the focal task"))
    entries.append(("entropy_scope", "whole post-selection population"))
    for tid in sorted(set(setup.task_ids)):
        entries.append((f"sha256_{tid}", asset_checksum(tid)))
    entries.append(("status", "failed" if error else "ok"))
    if error:
        entries.append(("failed_seed", failed_seed))
        entries.append(("error", " ".join(str(error).split())))
    return "".join(f"{k}={v}\n" for k, v in entries)


def write_manifest(setup: ExperimentSetup, path, failed_seed=None, error=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest_text(setup, failed_seed, error), encoding="utf-8")
    return path


def emit_plot(curves: list[AggregatedCurves], kind: str, path) -> Path:
    """SVG line chart of mean focal fitness vs evaluations, or mean entropy vs generation."""
    if not curves:
        raise ValueError("nothing to plot")
    groups = {c.setup.group for c in curves}
    group = "/".join(sorted(groups))
    if kind == "convergence":
        series = [(c.setup.label, c.evaluations, c.mean_focal_fitness) for c in curves]
        text = line_chart(
            series,
            title=f"Group {group}: convergence of {curves[0].setup.task_ids[0]}",
            x_label="function evaluations",
            y_label="best fitness",
            y_range=(min(float(np.min(s[2])) for s in series) // 10 * 10, MAX_FITNESS),
            legend="lower right",
        )
    elif kind == "entropy":
        series = [(c.setup.label, c.generations, c.mean_entropy) for c in curves]
        text = line_chart(
            series,
            title=f"Group {group}: population diversity",
            x_label="generation",
            y_label="entropy",
            y_range=(0.0, 1.0),
        )
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path

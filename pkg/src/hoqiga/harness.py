"""Experiment orchestration: repeated seeded runs, aggregation and export.

A plan is the cross product of problems and algorithms; each cell runs a
fixed number of independent seeded runs under one shared evaluation budget.
Results aggregate into long-form and summary CSV files plus convergence SVG
plots, all byte-stable for identical inputs.
"""

from __future__ import annotations

import concurrent.futures
import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .algorithms import (
    Qiga1Config,
    QigaConfig,
    RunResult,
    SgaConfig,
    default_rotation_table,
    qiga1_evolve,
    qiga_evolve,
    sga_evolve,
)
from .core import RandomSource, bits_to_string
from .problems import FitnessFunction, load_problem

logger = logging.getLogger(__name__)

ALGORITHM_IDS = ("qiga2", "qiga-r", "qiga1", "sga")


@dataclass(frozen=True)
class ProblemSpec:
    """A problem reference: display name plus path or generator spec."""

    name: str
    source: str

    def load(self) -> FitnessFunction:
        return load_problem(self.source, name=self.name)


@dataclass(frozen=True)
class AlgorithmSpec:
    """An algorithm id with parameter overrides; label defaults to the id."""

    id: str
    params: tuple[tuple[str, Any], ...] = ()
    label: str = ""

    def __post_init__(self):
        if self.id not in ALGORITHM_IDS:
            raise ValueError(f"unknown algorithm {self.id!r}, expected one of {ALGORITHM_IDS}")
        if isinstance(self.params, dict):
            object.__setattr__(self, "params", tuple(sorted(self.params.items())))
        if not self.label:
            object.__setattr__(self, "label", self.id)

    def build(self, max_fitness_evaluations: int):
        """Materialise the config for this spec under the shared budget."""
        params = dict(self.params)
        if self.id in ("qiga2", "qiga-r"):
            if self.id == "qiga2":
                params.setdefault("order", 2)
            elif "order" not in params:
                raise ValueError("qiga-r requires an 'order' parameter")
            mu = params.pop("mu", params.pop("contraction_factor", 0.9918))
            return QigaConfig(
                order=params.pop("order"),
                quantum_population_size=params.pop("quantum_population_size", 10),
                samples_per_individual=params.pop("samples_per_individual", 1),
                contraction_factor=mu,
                max_fitness_evaluations=max_fitness_evaluations,
                **params,
            )
        if self.id == "qiga1":
            angle = params.pop("angle", None)
            table = default_rotation_table(angle) if angle is not None else None
            config = dict(
                epsilon_guard=params.pop("epsilon_guard", 0.01),
                quantum_population_size=params.pop("quantum_population_size", 10),
                max_fitness_evaluations=max_fitness_evaluations,
                **params,
            )
            if table is not None:
                return Qiga1Config.with_table(table, **config)
            return Qiga1Config(**config)
        population = params.pop("population_size", 100)
        generations, remainder = divmod(max_fitness_evaluations, population)
        if remainder or generations < 1:
            raise ValueError(
                f"budget {max_fitness_evaluations} is not a whole number of "
                f"sga generations of {population} evaluations"
            )
        return SgaConfig(
            population_size=population,
            generations=generations,
            crossover_probability=params.pop("crossover_probability", 0.65),
            mutation_probability=params.pop("mutation_probability", 0.05),
            **params,
        )

    def run(self, problem: FitnessFunction, seed: int, max_fitness_evaluations: int) -> RunResult:
        config = self.build(max_fitness_evaluations)
        rng = RandomSource(seed)
        if self.id in ("qiga2", "qiga-r"):
            return qiga_evolve(problem, config, rng)
        if self.id == "qiga1":
            return qiga1_evolve(problem, config, rng)
        return sga_evolve(problem, config, rng)


@dataclass(frozen=True)
class ExperimentPlan:
    """Problems x algorithms, runs_per_cell seeded runs each, one shared budget."""

    problems: tuple[ProblemSpec, ...]
    algorithms: tuple[AlgorithmSpec, ...]
    runs_per_cell: int = 50
    base_seed: int = 0
    max_fitness_evaluations: int = 5000
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "problems", tuple(self.problems))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if not self.problems:
            raise ValueError("plan needs at least one problem")
        if not self.algorithms:
            raise ValueError("plan needs at least one algorithm")
        if self.runs_per_cell < 1:
            raise ValueError(f"runs per cell must be >= 1, got {self.runs_per_cell}")
        if self.max_fitness_evaluations < 1:
            raise ValueError("evaluation budget must be >= 1")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
        names = [p.name for p in self.problems]
        if len(set(names)) != len(names):
            raise ValueError(f"problem names must be unique, got {names}")
        labels = [a.label for a in self.algorithms]
        if len(set(labels)) != len(labels):
            raise ValueError(f"algorithm labels must be unique, got {labels}")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentPlan":
        """Plan from a JSON document; see README for the schema."""
        doc = json.loads(text)
        problems = tuple(
            ProblemSpec(name=entry["name"], source=entry["source"])
            for entry in doc["problems"]
        )
        algorithms = []
        for entry in doc["algorithms"]:
            entry = dict(entry)
            algo_id = entry.pop("id")
            label = entry.pop("label", "")
            algorithms.append(AlgorithmSpec(id=algo_id, params=tuple(sorted(entry.items())), label=label))
        return cls(
            problems=problems,
            algorithms=tuple(algorithms),
            runs_per_cell=doc.get("runs", 50),
            base_seed=doc.get("seed", 0),
            max_fitness_evaluations=doc.get("max_fitness_evaluations", 5000),
            jobs=doc.get("jobs", 1),
        )


@dataclass
class RunRecord:
    """One run inside a cell."""

    seed: int
    best_fitness: float
    best_bits: str
    trajectory: np.ndarray


@dataclass
class CellResult:
    """All runs of one (problem, algorithm) cell, or its load failure."""

    problem: str
    algorithm: str
    problem_size: int | None
    runs: list[RunRecord] = field(default_factory=list)
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    @property
    def best_fitnesses(self) -> np.ndarray:
        return np.array([r.best_fitness for r in self.runs])

    @property
    def mean(self) -> float:
        return float(self.best_fitnesses.mean())

    @property
    def std(self) -> float:
        return float(self.best_fitnesses.std())

    @property
    def minimum(self) -> float:
        return float(self.best_fitnesses.min())

    @property
    def maximum(self) -> float:
        return float(self.best_fitnesses.max())

    @property
    def mean_trajectory(self) -> np.ndarray:
        return np.mean([r.trajectory for r in self.runs], axis=0)


@dataclass
class ExperimentResult:
    """Cells in plan order plus the plan parameters that produced them."""

    plan: ExperimentPlan
    cells: list[CellResult]

    @property
    def failures(self) -> list[CellResult]:
        return [c for c in self.cells if c.failed]

    def cell(self, problem: str, algorithm: str) -> CellResult:
        for c in self.cells:
            if c.problem == problem and c.algorithm == algorithm:
                return c
        raise KeyError(f"no cell ({problem!r}, {algorithm!r})")

    def problems(self) -> list[str]:
        seen: dict[str, None] = {}
        for c in self.cells:
            seen.setdefault(c.problem, None)
        return list(seen)

    def algorithms(self) -> list[str]:
        seen: dict[str, None] = {}
        for c in self.cells:
            seen.setdefault(c.algorithm, None)
        return list(seen)


def _execute_run(
    algo: AlgorithmSpec, problem: FitnessFunction, seed: int, budget: int
) -> RunRecord:
    result = algo.run(problem, seed, budget)
    return RunRecord(
        seed=seed,
        best_fitness=result.best_fitness,
        best_bits=bits_to_string(result.best_bits),
        trajectory=result.trajectory,
    )


def run_experiment(plan: ExperimentPlan) -> ExperimentResult:
    """Execute every cell of the plan.

    Run r of every cell uses seed base_seed + r.  A problem that fails to
    load marks its cells failed and the rest of the experiment proceeds.
    Parallel execution (jobs > 1) changes nothing observable.
    """
    loaded: dict[str, FitnessFunction | Exception] = {}
    for spec in plan.problems:
        try:
            loaded[spec.name] = spec.load()
        except Exception as exc:
            logger.warning("problem %s failed to load: %s", spec.name, exc)
            loaded[spec.name] = exc

    cells: list[CellResult] = []
    pending: dict[tuple[int, int], CellResult] = {}
    tasks = []
    for p_idx, pspec in enumerate(plan.problems):
        problem = loaded[pspec.name]
        for a_idx, aspec in enumerate(plan.algorithms):
            if isinstance(problem, Exception):
                cell = CellResult(
                    problem=pspec.name,
                    algorithm=aspec.label,
                    problem_size=None,
                    error=str(problem),
                )
            else:
                cell = CellResult(
                    problem=pspec.name, algorithm=aspec.label, problem_size=problem.size
                )
                pending[(p_idx, a_idx)] = cell
                for r in range(plan.runs_per_cell):
                    tasks.append((p_idx, a_idx, aspec, problem, plan.base_seed + r))
            cells.append(cell)

    budget = plan.max_fitness_evaluations
    if plan.jobs == 1:
        outcomes = [
            (p_idx, a_idx, seed, _execute_run(aspec, problem, seed, budget))
            for p_idx, a_idx, aspec, problem, seed in tasks
        ]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=plan.jobs) as pool:
            futures = {
                pool.submit(_execute_run, aspec, problem, seed, budget): (p_idx, a_idx, seed)
                for p_idx, a_idx, aspec, problem, seed in tasks
            }
            outcomes = []
            for future in concurrent.futures.as_completed(futures):
                p_idx, a_idx, seed = futures[future]
                outcomes.append((p_idx, a_idx, seed, future.result()))
        # Deterministic collection order regardless of completion order.
        outcomes.sort(key=lambda item: (item[0], item[1], item[2]))

    for p_idx, a_idx, _seed, record in outcomes:
        pending[(p_idx, a_idx)].runs.append(record)
    return ExperimentResult(plan=plan, cells=cells)


@dataclass
class RankingTable:
    """Win counts per algorithm: one win per problem with the top mean."""

    rows: list[tuple[str, int]]
    ties: list[tuple[str, list[str]]]

    def wins(self, algorithm: str) -> int:
        for label, count in self.rows:
            if label == algorithm:
                return count
        raise KeyError(algorithm)

    @property
    def first(self) -> str:
        return self.rows[0][0]


def rank_algorithms(result: ExperimentResult) -> RankingTable:
    """Count, per problem, which algorithm reached the best mean best-fitness.

    Exact mean ties award a win to every tied algorithm and are flagged.
    Problems with any failed cell are excluded.  Rows sort by wins descending,
    then by label for stable output.
    """
    algorithms = result.algorithms()
    if len(algorithms) < 2:
        raise ValueError("ranking needs at least two algorithms")
    wins = {label: 0 for label in algorithms}
    ties: list[tuple[str, list[str]]] = []
    ranked_any = False
    for problem in result.problems():
        cells = [c for c in result.cells if c.problem == problem]
        if any(c.failed for c in cells):
            continue
        ranked_any = True
        best = max(c.mean for c in cells)
        winners = [c.algorithm for c in cells if c.mean == best]
        for label in winners:
            wins[label] += 1
        if len(winners) > 1:
            ties.append((problem, sorted(winners)))
    if not ranked_any:
        raise ValueError("ranking needs at least one fully successful problem")
    rows = sorted(wins.items(), key=lambda kv: (-kv[1], kv[0]))
    return RankingTable(rows=rows, ties=ties)


def _fmt(value: float) -> str:
    return repr(float(value))


def export_runs_csv(result: ExperimentResult, path: str | Path) -> Path:
    """Long-form CSV: one row per run."""
    path = Path(path)
    with path.open("w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["problem", "size_N", "algorithm", "run_seed", "best_fitness"])
        for cell in result.cells:
            for record in cell.runs:
                writer.writerow(
                    [cell.problem, cell.problem_size, cell.algorithm, record.seed,
                     _fmt(record.best_fitness)]
                )
    return path


def export_aggregate_csv(result: ExperimentResult, path: str | Path) -> Path:
    """Summary CSV: one row per cell, with a per-problem win marker."""
    ranking_wins: dict[tuple[str, str], int] = {}
    if len(result.algorithms()) >= 2 and not all(c.failed for c in result.cells):
        for problem in result.problems():
            cells = [c for c in result.cells if c.problem == problem]
            if any(c.failed for c in cells):
                continue
            best = max(c.mean for c in cells)
            for c in cells:
                ranking_wins[(problem, c.algorithm)] = int(c.mean == best)
    path = Path(path)
    with path.open("w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["problem", "algorithm", "mean", "std", "min", "max", "wins"])
        for cell in result.cells:
            if cell.failed:
                writer.writerow([cell.problem, cell.algorithm, "", "", "", "", ""])
                continue
            writer.writerow(
                [cell.problem, cell.algorithm, _fmt(cell.mean), _fmt(cell.std),
                 _fmt(cell.minimum), _fmt(cell.maximum),
                 ranking_wins.get((cell.problem, cell.algorithm), "")]
            )
    return path


def export_ranking_csv(ranking: RankingTable, path: str | Path) -> Path:
    path = Path(path)
    tied_counts: dict[str, int] = {}
    for _problem, winners in ranking.ties:
        for label in winners:
            tied_counts[label] = tied_counts.get(label, 0) + 1
    with path.open("w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["rank", "algorithm", "wins", "tied_wins"])
        for rank, (label, count) in enumerate(ranking.rows, start=1):
            writer.writerow([rank, label, count, tied_counts.get(label, 0)])
    return path


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")

_SVG_W, _SVG_H = 840, 520
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 160, 40, 55
_MAX_POINTS = 400


def export_convergence_svg(
    result: ExperimentResult, problem: str, path: str | Path
) -> Path:
    """Mean best-so-far fitness versus evaluation count, one polyline per algorithm."""
    cells = [c for c in result.cells if c.problem == problem and not c.failed]
    if not cells:
        raise ValueError(f"no successful cells for problem {problem!r}")
    curves = [(c.algorithm, c.mean_trajectory) for c in cells]
    length = len(curves[0][1])
    lo = min(float(t.min()) for _, t in curves)
    hi = max(float(t.max()) for _, t in curves)
    if hi == lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    plot_w = _SVG_W - _MARGIN_L - _MARGIN_R
    plot_h = _SVG_H - _MARGIN_T - _MARGIN_B

    def x_at(evaluation: float) -> float:
        return _MARGIN_L + plot_w * evaluation / max(length - 1, 1)

    def y_at(value: float) -> float:
        return _MARGIN_T + plot_h * (1.0 - (value - lo) / (hi - lo))

    sample = np.unique(np.linspace(0, length - 1, min(_MAX_POINTS, length)).round().astype(int))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_SVG_W}" height="{_SVG_H}" viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<text x="{_SVG_W // 2}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{problem}</text>',
    ]
    axis_y = _MARGIN_T + plot_h
    parts.append(
        f'<line x1="{_MARGIN_L}" y1="{axis_y}" x2="{_MARGIN_L + plot_w}" y2="{axis_y}" '
        f'stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{_MARGIN_L}" y1="{_MARGIN_T}" x2="{_MARGIN_L}" y2="{axis_y}" '
        f'stroke="black" stroke-width="1"/>'
    )
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        x = _MARGIN_L + plot_w * frac
        parts.append(
            f'<text x="{x:.1f}" y="{axis_y + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{int(round(frac * length))}</text>'
        )
        value = lo + (hi - lo) * frac
        y = y_at(value)
        parts.append(
            f'<text x="{_MARGIN_L - 8}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{value:.6g}</text>'
        )
    parts.append(
        f'<text x="{_MARGIN_L + plot_w / 2:.1f}" y="{_SVG_H - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">fitness evaluations</text>'
    )
    parts.append(
        f'<text x="18" y="{_MARGIN_T + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {_MARGIN_T + plot_h / 2:.1f})">mean best fitness</text>'
    )
    for k, (label, trajectory) in enumerate(curves):
        color = _PALETTE[k % len(_PALETTE)]
        points = " ".join(
            f"{x_at(i):.2f},{y_at(float(trajectory[i])):.2f}" for i in sample
        )
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>'
        )
        ly = _MARGIN_T + 16 + 18 * k
        lx = _MARGIN_L + plot_w + 12
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" font-size="12">{label}</text>'
        )
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path


def export_all(result: ExperimentResult, outdir: str | Path) -> list[Path]:
    """Write runs.csv, aggregate.csv, ranking.csv and one SVG per problem."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = [
        export_runs_csv(result, outdir / "runs.csv"),
        export_aggregate_csv(result, outdir / "aggregate.csv"),
    ]
    if len(result.algorithms()) >= 2 and any(not c.failed for c in result.cells):
        try:
            ranking = rank_algorithms(result)
        except ValueError:
            ranking = None
        if ranking is not None:
            written.append(export_ranking_csv(ranking, outdir / "ranking.csv"))
    for problem in result.problems():
        cells = [c for c in result.cells if c.problem == problem]
        if all(c.failed for c in cells):
            continue
        safe = "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in problem)
        written.append(export_convergence_svg(result, problem, outdir / f"{safe}.svg"))
    return written

"""Experiment orchestration: grid search, score aggregation and the DLB runtime
scaling experiment with log-log exponent fits."""

from __future__ import annotations

import csv
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from evotypes.dlb import DlbProblem
from evotypes.ea import EAConfig, Evolution, RunRecord, run_mu_plus_lambda, run_one_plus_one
from evotypes.errors import EmptyInput, FormatError, NonPositiveInput, TooFewPoints
from evotypes.graph import Graph
from evotypes.metrics import UniqueOptimaTracker, hamming, population_diversity
from evotypes.problems import make_problem

log = logging.getLogger(__name__)

__all__ = [
    "GridCell",
    "GridRow",
    "GridResult",
    "GridSpec",
    "RunRecord",
    "ScalingPoint",
    "ScalingReport",
    "ScalingRow",
    "UniqueOptimaTracker",
    "aggregate_scores",
    "derive_seed",
    "dlb_scaling_experiment",
    "fit_exponent",
    "grid_search",
    "hamming",
    "parallel_map",
    "population_diversity",
    "read_grid_csv",
    "read_scaling_csv",
    "relative_loss",
    "run_seeds",
    "universality_report",
    "write_grid_csv",
    "write_scaling_csv",
]

EVOLUTION_ORDER = (Evolution.DARWINIAN, Evolution.BALDWINIAN, Evolution.LAMARCKIAN, Evolution.LB)


def derive_seed(root: int, *keys: int) -> int:
    """Independent 63-bit seed for the run identified by ``keys`` under ``root``."""
    ss = np.random.SeedSequence([int(root), *map(int, keys)])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def parallel_map(fn: Callable, tasks: Sequence, threads: int = 1) -> list:
    """Ordered map, in worker processes when ``threads > 1``; results do not
    depend on the worker count because every task carries its own seed."""
    tasks = list(tasks)
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


# ----------------------------------------------------------------------------
# aggregation

def aggregate_scores(per_graph: Mapping[object, Sequence[float]]) -> tuple[float, float]:
    """Mean of per-graph means and mean of per-graph sample standard deviations."""
    if not per_graph:
        raise EmptyInput("no graphs to aggregate")
    means, stds = [], []
    for key, values in per_graph.items():
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            raise EmptyInput(f"graph {key!r} has no results")
        means.append(values.mean())
        stds.append(values.std(ddof=1) if values.size > 1 else 0.0)
    return float(np.mean(means)), float(np.mean(stds))


def relative_loss(best: float, candidate: float) -> float:
    """Percentage lost by ``candidate`` relative to ``best``."""
    return (best - candidate) / best * 100.0


def universality_report(best: Mapping, candidate: Mapping) -> dict:
    """Relative loss per key, for keys such as ``(dataset, problem)``."""
    missing = set(best) - set(candidate)
    if missing:
        raise KeyError(f"candidate scores missing for {sorted(missing)}")
    return {key: relative_loss(best[key], candidate[key]) for key in best}


def run_seeds(cfg: EAConfig, problem, seeds: Iterable[int], threads: int = 1) -> list[RunRecord]:
    tasks = [(cfg.with_seed(int(s)), problem) for s in seeds]
    return parallel_map(_run_task, tasks, threads)


def _run_task(task) -> RunRecord:
    cfg, problem = task
    return run_mu_plus_lambda(cfg, problem)


# ----------------------------------------------------------------------------
# grid search

@dataclass(frozen=True, order=True)
class GridCell:
    mu: int
    lam: int
    rc: float
    plb: float | None = None

    def config(self, evolution: Evolution, budget: int, seed: int) -> EAConfig:
        return EAConfig(self.mu, self.lam, self.rc, evolution, p_lb=self.plb or 0.0, budget=budget, seed=seed)

    def label(self) -> str:
        base = f"{self.mu}/{self.lam}/{self.rc}"
        return base if self.plb is None else f"{base} p_LB={self.plb}"


@dataclass(frozen=True)
class GridSpec:
    mu_values: tuple = (10, 50, 250)
    lambda_values: tuple = (10, 50, 250)
    rc_values: tuple = (0.0, 0.5, 0.9, 1.0)
    plb_values: tuple = (0.15, 0.3, 0.5, 0.9)

    def __post_init__(self):
        for name in ("mu_values", "lambda_values", "rc_values", "plb_values"):
            values = tuple(getattr(self, name))
            if not values:
                raise EmptyInput(f"grid axis {name} is empty")
            object.__setattr__(self, name, values)

    def cells(self, evolution) -> list[GridCell]:
        evolution = Evolution.parse(evolution)
        plbs = self.plb_values if evolution is Evolution.LB else (None,)
        cells = [
            GridCell(int(mu), int(lam), float(rc), None if plb is None else float(plb))
            for mu, lam, rc, plb in itertools.product(self.mu_values, self.lambda_values, self.rc_values, plbs)
        ]
        return sorted(cells, key=lambda c: (c.mu, c.lam, c.rc, -1.0 if c.plb is None else c.plb))

    def size(self, evolutions: Iterable) -> int:
        return sum(len(self.cells(e)) for e in evolutions)


GRID_HEADER = [
    "evolution", "mu", "lambda", "rc", "plb", "graph_id", "seed",
    "best_fitness", "offspring_evals", "ls_neighbor_evals", "wall_time_s",
]


@dataclass(frozen=True)
class GridRow:
    evolution: Evolution
    cell: GridCell
    graph_id: str
    seed: int
    best_fitness: float
    offspring_evals: int
    ls_neighbor_evals: int
    wall_time_s: float

    @property
    def dataset(self) -> str:
        return self.graph_id.split("/", 1)[0] if "/" in self.graph_id else ""


@dataclass
class GridResult:
    rows: list[GridRow]
    # (evolution, dataset) -> (best cell, mean best fitness)
    best: dict[tuple[Evolution, str], tuple[GridCell, float]] = field(default_factory=dict)


def _grid_task(task) -> GridRow:
    evolution, cell, graph_id, graph, problem_name, seed, budget = task
    record = run_mu_plus_lambda(cell.config(evolution, budget, seed), make_problem(problem_name, graph))
    return GridRow(
        evolution, cell, graph_id, seed, record.best_fitness,
        record.counters.offspring_evals, record.counters.ls_neighbor_evals, record.wall_time,
    )


def best_configs(rows: Iterable[GridRow]) -> dict[tuple[Evolution, str], tuple[GridCell, float]]:
    """Per (evolution, dataset), the cell with the highest mean best fitness.

    Ties go to the lexicographically smallest (mu, lambda, r_c, p_LB).
    """
    scores: dict[tuple[Evolution, str], dict[GridCell, list[float]]] = {}
    for row in rows:
        scores.setdefault((row.evolution, row.dataset), {}).setdefault(row.cell, []).append(row.best_fitness)
    best = {}
    for key, by_cell in scores.items():
        winner = None
        for cell in sorted(by_cell, key=lambda c: (c.mu, c.lam, c.rc, -1.0 if c.plb is None else c.plb)):
            mean = float(np.mean(by_cell[cell]))
            if winner is None or mean > winner[1]:
                winner = (cell, mean)
        best[key] = winner
    return best


def grid_search(
    spec: GridSpec,
    evolutions: Iterable,
    datasets: Mapping[str, Mapping[str, Graph]],
    problem: str = "mis",
    seeds: Sequence[int] = (0,),
    budget: int = 40_000,
    threads: int = 1,
) -> GridResult:
    """Evaluate every grid cell on every graph and seed.

    ``datasets`` maps a dataset name to ``{graph name: Graph}``; rows carry
    ``graph_id = "<dataset>/<graph name>"``.
    """
    evolutions = [Evolution.parse(e) for e in evolutions]
    graphs = [(f"{ds}/{name}", g) for ds, members in datasets.items() for name, g in members.items()]
    if not evolutions:
        raise EmptyInput("no evolution types requested")
    if not graphs:
        raise EmptyInput("no graphs supplied")
    if not seeds:
        raise EmptyInput("no seeds supplied")
    tasks = [
        (evolution, cell, gid, g, problem, int(seed), budget)
        for evolution in evolutions
        for cell in spec.cells(evolution)
        for gid, g in graphs
        for seed in seeds
    ]
    log.info("grid search: %d runs", len(tasks))
    rows = parallel_map(_grid_task, tasks, threads)
    return GridResult(rows, best_configs(rows))


def _fmt(x: float) -> str:
    return repr(float(x))


def write_grid_csv(rows: Iterable[GridRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(GRID_HEADER)
        for r in rows:
            w.writerow([
                r.evolution.value, r.cell.mu, r.cell.lam, _fmt(r.cell.rc),
                "" if r.cell.plb is None else _fmt(r.cell.plb),
                r.graph_id, r.seed, _fmt(r.best_fitness), r.offspring_evals, r.ls_neighbor_evals,
                _fmt(r.wall_time_s),
            ])


def read_grid_csv(path) -> list[GridRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != GRID_HEADER:
            raise FormatError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            GridRow(
                Evolution.parse(r["evolution"]),
                GridCell(int(r["mu"]), int(r["lambda"]), float(r["rc"]), float(r["plb"]) if r["plb"] else None),
                r["graph_id"], int(r["seed"]), float(r["best_fitness"]), int(r["offspring_evals"]),
                int(r["ls_neighbor_evals"]), float(r["wall_time_s"]),
            )
            for r in reader
        ]


# ----------------------------------------------------------------------------
# runtime scaling on DLB

def fit_exponent(ns: Sequence[float], means: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope of ln(mean) against ln(n), with its standard error."""
    ns = np.asarray(ns, dtype=np.float64)
    means = np.asarray(means, dtype=np.float64)
    if len(ns) != len(means):
        raise ValueError(f"{len(ns)} sizes but {len(means)} means")
    if len(ns) < 3:
        raise TooFewPoints(f"need at least 3 points, got {len(ns)}")
    if (ns <= 0).any() or (means <= 0).any():
        raise NonPositiveInput("sizes and means must be positive for a log-log fit")
    x, y = np.log(ns), np.log(means)
    fit = stats.linregress(x, y)
    # residual form keeps the error at rounding level on exact power laws
    resid = y - (fit.intercept + fit.slope * x)
    sxx = np.sum((x - x.mean()) ** 2)
    stderr = math.sqrt(np.sum(resid**2) / (len(x) - 2) / sxx)
    return float(fit.slope), stderr


SCALING_HEADER = ["evolution", "k", "n", "rep", "iterations", "ls_iterations", "neighbor_evals", "success"]


@dataclass(frozen=True)
class ScalingRow:
    evolution: Evolution
    k: int
    n: int
    rep: int
    iterations: int
    ls_iterations: int
    neighbor_evals: int
    success: bool

    @property
    def pessimistic_evals(self) -> int:
        """Iterations plus ``n`` evaluations per local-search iteration."""
        return self.iterations + self.n * self.ls_iterations


@dataclass(frozen=True)
class ScalingPoint:
    n: int
    runs: int
    mean_iterations: float
    sem_iterations: float
    mean_pessimistic_evals: float
    success_rate: float


@dataclass
class ScalingReport:
    k: int
    rows: list[ScalingRow]
    points: dict[Evolution, list[ScalingPoint]]
    slopes: dict[Evolution, tuple[float, float]]
    eval_slopes: dict[Evolution, tuple[float, float]]


def _scaling_task(task) -> ScalingRow:
    evolution, k, n, rep, seed, max_iterations = task
    res = run_one_plus_one(DlbProblem(n, k), evolution, seed, max_iterations)
    return ScalingRow(
        evolution, k, n, rep, res.iterations, res.counters.ls_iterations,
        res.counters.ls_neighbor_evals, res.success,
    )


def summarize_scaling(k: int, rows: Sequence[ScalingRow]) -> ScalingReport:
    points: dict[Evolution, list[ScalingPoint]] = {}
    groups: dict[tuple[Evolution, int], list[ScalingRow]] = {}
    for r in rows:
        groups.setdefault((r.evolution, r.n), []).append(r)
    for (evolution, n), members in sorted(groups.items(), key=lambda kv: (EVOLUTION_ORDER.index(kv[0][0]), kv[0][1])):
        its = np.array([r.iterations for r in members], dtype=np.float64)
        sem = its.std(ddof=1) / math.sqrt(len(its)) if len(its) > 1 else 0.0
        points.setdefault(evolution, []).append(ScalingPoint(
            n, len(members), float(its.mean()), float(sem),
            float(np.mean([r.pessimistic_evals for r in members])),
            float(np.mean([r.success for r in members])),
        ))
    slopes, eval_slopes = {}, {}
    for evolution, pts in points.items():
        if len(pts) >= 3 and all(p.mean_iterations > 0 for p in pts):
            slopes[evolution] = fit_exponent([p.n for p in pts], [p.mean_iterations for p in pts])
            eval_slopes[evolution] = fit_exponent([p.n for p in pts], [p.mean_pessimistic_evals for p in pts])
    return ScalingReport(k, list(rows), points, slopes, eval_slopes)


def dlb_scaling_experiment(
    k: int,
    ns: Sequence[int],
    repetitions: int,
    evolutions: Iterable = (Evolution.DARWINIAN, Evolution.LAMARCKIAN, Evolution.BALDWINIAN),
    seed: int = 0,
    max_iterations: int = 10**12,
    threads: int = 1,
) -> ScalingReport:
    """Repeat the (1+1) EA on DLB_k for every size and evolution type and fit
    the growth exponents of mean iterations and of pessimistic evaluations."""
    ns = [int(n) for n in ns]
    bad = [n for n in ns if n < k or n % k]
    if bad:
        raise ValueError(f"sizes {bad} are not positive multiples of k={k}")
    if repetitions < 1:
        raise ValueError(f"repetitions must be positive, got {repetitions}")
    evolutions = [Evolution.parse(e) for e in evolutions]
    tasks = [
        (e, k, n, rep, derive_seed(seed, EVOLUTION_ORDER.index(e), k, n, rep), max_iterations)
        for e in evolutions for n in ns for rep in range(repetitions)
    ]
    rows = parallel_map(_scaling_task, tasks, threads)
    return summarize_scaling(k, rows)


def write_scaling_csv(rows: Iterable[ScalingRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SCALING_HEADER)
        for r in rows:
            w.writerow([r.evolution.value, r.k, r.n, r.rep, r.iterations, r.ls_iterations,
                        r.neighbor_evals, int(r.success)])


def read_scaling_csv(path) -> list[ScalingRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SCALING_HEADER:
            raise FormatError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            ScalingRow(Evolution.parse(r["evolution"]), int(r["k"]), int(r["n"]), int(r["rep"]),
                       int(r["iterations"]), int(r["ls_iterations"]), int(r["neighbor_evals"]),
                       bool(int(r["success"])))
            for r in reader
        ]


def write_trace_csv(records: Mapping[int, RunRecord], path) -> None:
    """Per-generation convergence and diversity samples, one row per (seed, generation)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "offspring_evals", "best_fitness", "diversity"])
        for seed, rec in records.items():
            for (evals, best), (_, div) in zip(rec.convergence, rec.diversity):
                w.writerow([seed, evals, _fmt(best), _fmt(div)])


def ensure_parent(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path

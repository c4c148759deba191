"""Variation, the four evolution types, the (mu + lambda) EA and the (1+1) EA.

Genotypes are uint8 arrays of 0/1. A single ``numpy.random.Generator`` per run
feeds initialisation, variation, local search and tie-breaking in program
order; the compiled kernels advance the same generator state as Python code.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from numba import njit

from evotypes.dlb import DlbProblem, _critical_from, _dlb_value, _hillclimb_blocks, _value_at
from evotypes.errors import LengthMismatch, PoolTooSmall
from evotypes.graph import _cut_value
from evotypes.metrics import UniqueOptimaTracker, population_diversity
from evotypes.problems import MC, MIS, _mc_local_search, _mis_fitness, _mis_repair


class Evolution(str, Enum):
    DARWINIAN = "darwinian"
    BALDWINIAN = "baldwinian"
    LAMARCKIAN = "lamarckian"
    LB = "lb"

    @classmethod
    def parse(cls, name) -> Evolution:
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        aliases = {
            "darwin": cls.DARWINIAN, "darwinian": cls.DARWINIAN,
            "baldwin": cls.BALDWINIAN, "baldwinian": cls.BALDWINIAN,
            "lamarck": cls.LAMARCKIAN, "lamarckian": cls.LAMARCKIAN,
            "lb": cls.LB, "l-b": cls.LB, "partial-lamarckian": cls.LB,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(
                f"unknown evolution type {name!r}; expected darwinian, baldwinian, lamarckian or lb"
            ) from None

    @property
    def uses_local_search(self) -> bool:
        return self is not Evolution.DARWINIAN


# cross-problem (mu, lambda, r_c, p_LB) per evolution type
GENERALIST = {
    Evolution.DARWINIAN: (50, 250, 1.0, 0.0),
    Evolution.BALDWINIAN: (250, 50, 0.9, 0.0),
    Evolution.LAMARCKIAN: (10, 10, 0.0, 0.0),
    Evolution.LB: (250, 250, 1.0, 0.15),
}

DEFAULT_BUDGET = 40_000


@dataclass(frozen=True)
class EAConfig:
    mu: int
    lam: int
    rc: float
    evolution: Evolution = Evolution.DARWINIAN
    p_lb: float = 0.0
    r_mut: float | None = None
    budget: int = DEFAULT_BUDGET
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "evolution", Evolution.parse(self.evolution))
        if self.mu < 1 or self.lam < 1:
            raise ValueError(f"mu and lambda must be positive, got mu={self.mu}, lambda={self.lam}")
        if not 0.0 <= self.rc <= 1.0:
            raise ValueError(f"crossover rate must lie in [0, 1], got {self.rc}")
        if not 0.0 <= self.p_lb <= 1.0:
            raise ValueError(f"p_LB must lie in [0, 1], got {self.p_lb}")
        if self.r_mut is not None and not 0.0 < self.r_mut <= 1.0:
            raise ValueError(f"mutation rate must lie in (0, 1], got {self.r_mut}")
        if self.budget < 1:
            raise ValueError(f"budget must be positive, got {self.budget}")

    @classmethod
    def generalist(cls, evolution, **overrides) -> EAConfig:
        evolution = Evolution.parse(evolution)
        mu, lam, rc, p_lb = GENERALIST[evolution]
        return cls(**{"mu": mu, "lam": lam, "rc": rc, "evolution": evolution, "p_lb": p_lb, **overrides})

    def mutation_rate(self, n: int) -> float:
        return 1.0 / n if self.r_mut is None else self.r_mut

    @property
    def replace_probability(self) -> float:
        """Probability that the local-search result replaces the offspring genotype."""
        return {
            Evolution.DARWINIAN: 0.0,
            Evolution.BALDWINIAN: 0.0,
            Evolution.LAMARCKIAN: 1.0,
            Evolution.LB: self.p_lb,
        }[self.evolution]

    def with_seed(self, seed) -> EAConfig:
        return replace(self, seed=seed)


@dataclass
class EvalCounter:
    offspring_evals: int = 0
    ls_neighbor_evals: int = 0
    ls_iterations: int = 0

    def pessimistic_evals(self, n: int) -> int:
        """Offspring evaluations plus ``n`` per local-search iteration."""
        return self.offspring_evals + n * self.ls_iterations


@dataclass
class Individual:
    genotype: np.ndarray
    fitness: float


@dataclass
class Population:
    genotypes: np.ndarray
    fitness: np.ndarray

    def __len__(self):
        return len(self.fitness)

    def __getitem__(self, i) -> Individual:
        return Individual(self.genotypes[i], float(self.fitness[i]))

    @classmethod
    def of(cls, individuals) -> Population:
        individuals = list(individuals)
        return cls(
            np.array([ind.genotype for ind in individuals], dtype=np.uint8),
            np.array([ind.fitness for ind in individuals], dtype=np.float64),
        )


@dataclass
class RunRecord:
    best_fitness: float
    best_genotype: np.ndarray
    convergence: list[tuple[int, float]]
    diversity: list[tuple[int, float]]
    unique_optima: int
    counters: EvalCounter
    generations: int
    wall_time: float = field(default=0.0)

    def __eq__(self, other):
        # wall time is informational and excluded from equality
        if not isinstance(other, RunRecord):
            return NotImplemented
        return (
            self.best_fitness == other.best_fitness
            and np.array_equal(self.best_genotype, other.best_genotype)
            and self.convergence == other.convergence
            and self.diversity == other.diversity
            and self.unique_optima == other.unique_optima
            and self.counters == other.counters
            and self.generations == other.generations
        )


# ----------------------------------------------------------------------------
# compiled kernels

@njit(cache=True)
def _evaluate(kind, offsets, neighbors, k, x):
    if kind == MIS:
        return _mis_fitness(offsets, neighbors, x)
    elif kind == MC:
        return float(_cut_value(offsets, neighbors, x))
    return float(_dlb_value(x, k))


@njit(cache=True)
def _local_search(kind, offsets, neighbors, k, x, rng):
    if kind == MIS:
        return _mis_repair(offsets, neighbors, x, rng, np.empty(0, dtype=np.int64))
    elif kind == MC:
        return _mc_local_search(offsets, neighbors, x, rng, np.empty(0, dtype=np.int64))
    moves = _hillclimb_blocks(x, k)
    return moves, len(x) * (moves + 1)


@njit(cache=True)
def _mutate(x, r_mut, rng):
    for i in range(len(x)):
        if rng.random() < r_mut:
            x[i] ^= 1


@njit(cache=True)
def _crossover(a, b, out, rng):
    for i in range(len(a)):
        out[i] = a[i] if rng.random() < 0.5 else b[i]


@njit(cache=True)
def _make_offspring(parents, rc, r_mut, out, rng):
    mu = parents.shape[0]
    i1 = rng.integers(0, mu)
    i2 = rng.integers(0, mu)
    if rng.random() < rc:
        _crossover(parents[i1], parents[i2], out, rng)
    else:
        out[:] = parents[i1]
    _mutate(out, r_mut, rng)


@njit(cache=True)
def _evaluate_one(kind, offsets, neighbors, k, y, solution, use_ls, p_replace, rng):
    """Fill ``solution`` with the evaluated point, possibly overwrite ``y`` with it.

    Every local-search type draws one replacement uniform, so Baldwinian (p=0)
    and Lamarckian (p=1) consume the generator exactly like L-B at those values.
    """
    solution[:] = y
    steps = 0
    scored = 0
    if use_ls:
        steps, scored = _local_search(kind, offsets, neighbors, k, solution, rng)
    f = _evaluate(kind, offsets, neighbors, k, solution)
    if use_ls and rng.random() < p_replace:
        y[:] = solution
    return f, steps, scored


@njit(cache=True)
def _evaluate_rows(kind, offsets, neighbors, k, ys, solutions, use_ls, p_replace, rng):
    m = ys.shape[0]
    fit = np.empty(m, dtype=np.float64)
    steps = 0
    scored = 0
    for r in range(m):
        f, st, sc = _evaluate_one(kind, offsets, neighbors, k, ys[r], solutions[r], use_ls, p_replace, rng)
        fit[r] = f
        steps += st
        scored += sc
    return fit, steps, scored


@njit(cache=True)
def _generation(kind, offsets, neighbors, k, parents, lam, rc, r_mut, use_ls, p_replace, rng):
    n = parents.shape[1]
    ys = np.empty((lam, n), dtype=np.uint8)
    solutions = np.empty((lam, n), dtype=np.uint8)
    fit = np.empty(lam, dtype=np.float64)
    steps = 0
    scored = 0
    for r in range(lam):
        _make_offspring(parents, rc, r_mut, ys[r], rng)
        f, st, sc = _evaluate_one(kind, offsets, neighbors, k, ys[r], solutions[r], use_ls, p_replace, rng)
        fit[r] = f
        steps += st
        scored += sc
    return ys, solutions, fit, steps, scored


# ----------------------------------------------------------------------------
# operator-level API

def _as_bits(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.uint8)


def uniform_crossover(a, b, rng) -> np.ndarray:
    a, b = _as_bits(a), _as_bits(b)
    if a.shape != b.shape:
        raise LengthMismatch(f"parents have shapes {a.shape} and {b.shape}")
    out = np.empty_like(a)
    _crossover(a, b, out, rng)
    return out


def bernoulli_mutation(x, r_mut: float, rng) -> np.ndarray:
    if not 0.0 <= r_mut <= 1.0:
        raise ValueError(f"mutation rate must lie in [0, 1], got {r_mut}")
    y = _as_bits(x).copy()
    _mutate(y, r_mut, rng)
    return y


def make_offspring(pop: Population, cfg: EAConfig, rng) -> np.ndarray:
    parents = _as_bits(pop.genotypes)
    if len(parents) == 0:
        raise PoolTooSmall("cannot breed from an empty population")
    out = np.empty(parents.shape[1], dtype=np.uint8)
    _make_offspring(parents, cfg.rc, cfg.mutation_rate(parents.shape[1]), out, rng)
    return out


def evaluate_offspring(y, cfg: EAConfig, problem, rng, ctr: EvalCounter) -> Individual:
    y = _as_bits(y).copy()
    if len(y) != problem.n:
        raise LengthMismatch(f"offspring has length {len(y)}, problem has n={problem.n}")
    solution = np.empty_like(y)
    offsets, neighbors, k = problem.kernel_args
    f, steps, scored = _evaluate_one(
        problem.kind, offsets, neighbors, k, y, solution,
        cfg.evolution.uses_local_search, cfg.replace_probability, rng,
    )
    ctr.offspring_evals += 1
    ctr.ls_iterations += int(steps)
    ctr.ls_neighbor_evals += int(scored)
    return Individual(y, float(f))


def _select_indices(fitness: np.ndarray, mu: int, rng) -> np.ndarray:
    if len(fitness) < mu:
        raise PoolTooSmall(f"pool of {len(fitness)} cannot supply mu={mu} survivors")
    # random secondary key resolves ties at the cutoff uniformly
    keys = rng.random(len(fitness))
    return np.lexsort((keys, -fitness))[:mu]


def select_mu_fittest(parents: Population, offspring: Population, mu: int, rng) -> Population:
    genotypes = np.concatenate([parents.genotypes, offspring.genotypes])
    fitness = np.concatenate([parents.fitness, offspring.fitness])
    idx = _select_indices(fitness, mu, rng)
    return Population(genotypes[idx], fitness[idx])


# ----------------------------------------------------------------------------
# (mu + lambda) EA

def run_mu_plus_lambda(cfg: EAConfig, problem) -> RunRecord:
    """Run the (mu + lambda) EA until ``ceil(budget / lambda)`` generations are done.

    The mu initial individuals are evaluated like offspring (including local
    search) and counted separately from the budget.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    n = problem.n
    kind = problem.kind
    offsets, neighbors, k = problem.kernel_args
    use_ls = cfg.evolution.uses_local_search
    p_replace = cfg.replace_probability
    r_mut = cfg.mutation_rate(n)
    track_solution = cfg.evolution is Evolution.BALDWINIAN
    ctr = EvalCounter()
    tracker = UniqueOptimaTracker()

    pop = rng.integers(0, 2, size=(cfg.mu, n), dtype=np.uint8)
    solutions = np.empty_like(pop)
    fit, steps, scored = _evaluate_rows(kind, offsets, neighbors, k, pop, solutions, use_ls, p_replace, rng)
    ctr.offspring_evals += cfg.mu
    ctr.ls_iterations += int(steps)
    ctr.ls_neighbor_evals += int(scored)
    tracker.update_many(solutions if track_solution else pop, fit)
    j = int(np.argmax(fit))
    best_fitness, best_genotype = float(fit[j]), solutions[j].copy()
    convergence = [(ctr.offspring_evals, best_fitness)]
    diversity = [(ctr.offspring_evals, population_diversity(pop))]

    generations = math.ceil(cfg.budget / cfg.lam)
    for _ in range(generations):
        ys, sols, f, steps, scored = _generation(
            kind, offsets, neighbors, k, pop, cfg.lam, cfg.rc, r_mut, use_ls, p_replace, rng
        )
        ctr.offspring_evals += cfg.lam
        ctr.ls_iterations += int(steps)
        ctr.ls_neighbor_evals += int(scored)
        tracker.update_many(sols if track_solution else ys, f)
        j = int(np.argmax(f))
        if f[j] > best_fitness:
            best_fitness, best_genotype = float(f[j]), sols[j].copy()

        pool = np.concatenate([pop, ys])
        pool_fit = np.concatenate([fit, f])
        idx = _select_indices(pool_fit, cfg.mu, rng)
        pop, fit = pool[idx], pool_fit[idx]
        convergence.append((ctr.offspring_evals, float(fit.max())))
        diversity.append((ctr.offspring_evals, population_diversity(pop)))

    return RunRecord(
        best_fitness=best_fitness,
        best_genotype=best_genotype,
        convergence=convergence,
        diversity=diversity,
        unique_optima=tracker.count,
        counters=ctr,
        generations=generations,
        wall_time=time.perf_counter() - t0,
    )


# ----------------------------------------------------------------------------
# (1+1) EA on DLB

@njit(cache=True)
def _mutate_sparse(x, rng, flipped):
    """Standard bit mutation at rate 1/n, drawn as a Binomial(n, 1/n) number of
    distinct uniform positions; flips ``x`` in place and returns the count."""
    n = len(x)
    m = rng.binomial(n, 1.0 / n)
    cnt = 0
    while cnt < m:
        i = rng.integers(0, n)
        dup = False
        for j in range(cnt):
            if flipped[j] == i:
                dup = True
                break
        if not dup:
            flipped[cnt] = i
            cnt += 1
    for j in range(m):
        x[flipped[j]] ^= 1
    return m


@njit(cache=True)
def _log_fitness(trace, count, t, f):
    if count < trace.shape[0]:
        trace[count, 0] = t
        trace[count, 1] = f
    return count + 1


@njit(cache=True)
def _darwin_dlb(x, k, max_iterations, rng, trace):
    """Returns (iterations, success, trace length)."""
    n = len(x)
    flipped = np.empty(n, dtype=np.int64)
    c = _critical_from(x, k, 0)
    fx = _value_at(x, k, c)
    logged = _log_fitness(trace, 0, 0, fx)
    if fx == n:
        return 0, True, logged
    for t in range(1, max_iterations + 1):
        m = _mutate_sparse(x, rng, flipped)
        if m == 0:
            continue
        bmin = n
        for j in range(m):
            b = flipped[j] // k
            if b < bmin:
                bmin = b
        # blocks before the parent's critical block are all ones; touching one makes it critical
        cy = bmin if bmin < c else _critical_from(x, k, c)
        fy = _value_at(x, k, cy)
        if fy >= fx:
            if fy != fx:
                logged = _log_fitness(trace, logged, t, fy)
            c = cy
            fx = fy
            if fx == n:
                return t, True, logged
        else:
            for j in range(m):
                x[flipped[j]] ^= 1
    return max_iterations, False, logged


@njit(cache=True)
def _memetic_dlb(x, k, max_iterations, rng, trace, lamarckian):
    """Returns (iterations, success, ls_iterations, neighbor_evals, trace length).

    Lamarckian: every generated point is replaced by its hillclimb result.
    Baldwinian: genotypes stay as generated and carry the fitness of their
    hillclimb result; success is the first time such a result equals 1^n,
    which would be kept as best-so-far.
    """
    n = len(x)
    flipped = np.empty(n, dtype=np.int64)
    z = x.copy()
    moves = _hillclimb_blocks(z, k)
    ls_iter = moves
    evals = n * (moves + 1)
    if lamarckian:
        x[:] = z
    fx = _dlb_value(z, k)
    logged = _log_fitness(trace, 0, 0, fx)
    if fx == n:
        return 0, True, ls_iter, evals, logged
    y = np.empty_like(x)
    for t in range(1, max_iterations + 1):
        y[:] = x
        _mutate_sparse(y, rng, flipped)
        z[:] = y
        moves = _hillclimb_blocks(z, k)
        ls_iter += moves
        evals += n * (moves + 1)
        fy = _dlb_value(z, k)
        if fy >= fx:
            if fy != fx:
                logged = _log_fitness(trace, logged, t, fy)
            x[:] = z if lamarckian else y
            fx = fy
            if fy == n:
                return t, True, ls_iter, evals, logged
    return max_iterations, False, ls_iter, evals, logged


@dataclass(frozen=True)
class OnePlusOneResult:
    iterations: int
    counters: EvalCounter
    success: bool
    fitness_trace: list[tuple[int, int]] = field(default_factory=list)


def run_one_plus_one(p: DlbProblem, evolution, seed, max_iterations: int, initial=None) -> OnePlusOneResult:
    """(1+1) EA on DLB_k, accepting offspring that are at least as fit.

    ``iterations`` counts offspring generated until the optimum is reached
    (0 if the initial individual already succeeds). ``initial`` overrides the
    random start and is meant for tests.
    """
    evolution = Evolution.parse(evolution)
    if evolution is Evolution.LB:
        raise ValueError("the (1+1) EA supports darwinian, baldwinian and lamarckian evolution only")
    if max_iterations < 1:
        raise ValueError(f"max_iterations must be positive, got {max_iterations}")
    rng = np.random.default_rng(seed)
    if initial is None:
        x = rng.integers(0, 2, size=p.n, dtype=np.uint8)
    else:
        x = _as_bits(initial).copy()
        if x.shape != (p.n,):
            raise LengthMismatch(f"initial string has shape {x.shape}, expected ({p.n},)")
    # the stored fitness only changes upwards through at most n + 1 levels
    trace = np.zeros((p.n + 2, 2), dtype=np.int64)
    if evolution is Evolution.DARWINIAN:
        it, ok, logged = _darwin_dlb(x, p.k, max_iterations, rng, trace)
        ctr = EvalCounter(offspring_evals=int(it) + 1)
    else:
        lamarckian = evolution is Evolution.LAMARCKIAN
        it, ok, ls_iter, evals, logged = _memetic_dlb(x, p.k, max_iterations, rng, trace, lamarckian)
        ctr = EvalCounter(offspring_evals=int(it) + 1, ls_neighbor_evals=int(evals), ls_iterations=int(ls_iter))
    steps = [(int(t), int(f)) for t, f in trace[:logged]]
    if logged > len(trace) or any(b[1] <= a[1] for a, b in zip(steps, steps[1:])):
        raise RuntimeError(f"stored fitness of the parent decreased on n={p.n}; elitism violated")
    return OnePlusOneResult(int(it), ctr, bool(ok), steps)

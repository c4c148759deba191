"""Acceptance criteria 1-9, each reported as a PASS/FAIL line.

Heavy computations are session fixtures so the cross-cutting invariant check
(criterion 7) inspects exactly the runs produced for criteria 1-6.
"""

import numpy as np
import pytest

from conftest import fixed_corpus, record_verdict
from oracles import all_bitstrings, local_maxima, one_plus_one_hitting_time
from evotypes.dlb import DlbProblem, hillclimb
from evotypes.ea import EAConfig, Evolution, run_one_plus_one
from evotypes.graph import gen_er, internal_edges
from evotypes.harness import GridSpec, derive_seed, dlb_scaling_experiment, fit_exponent, run_seeds
from evotypes.problems import McProblem, MisProblem

D, B, L, LB = Evolution.DARWINIAN, Evolution.BALDWINIAN, Evolution.LAMARCKIAN, Evolution.LB

# (1+1) runs and (mu + lambda) runs gathered for criterion 7
ONE_PLUS_ONE_ROWS = []
EA_RUNS = []


def verdict(label, ok, detail=""):
    record_verdict(label, bool(ok), detail)
    assert ok, f"{label}: {detail}"


@pytest.fixture(scope="session")
def scaling_k2():
    report = dlb_scaling_experiment(2, [32, 64, 128], 50, evolutions=(D, L, B), seed=2024)
    ONE_PLUS_ONE_ROWS.extend(report.rows)
    return report


@pytest.fixture(scope="session")
def hierarchy_k3():
    report = dlb_scaling_experiment(3, [30], 30, evolutions=(D, L, B), seed=2025)
    ONE_PLUS_ONE_ROWS.extend(report.rows)
    return report


@pytest.fixture(scope="session")
def darwin_n4_runs():
    p = DlbProblem(4, 2)
    results = [run_one_plus_one(p, D, derive_seed(3, i), 10**9) for i in range(10_000)]
    ONE_PLUS_ONE_ROWS.extend((D, p.n, r) for r in results)
    return results


@pytest.fixture(scope="session")
def mis_ordering_runs():
    graphs = [gen_er(200, 0.05, s) for s in range(20)]
    runs = {}
    for e in (D, B, L, LB):
        cfg = EAConfig.generalist(e, budget=40_000)
        runs[e] = [run_seeds(cfg, MisProblem(g), [0, 1, 2]) for g in graphs]
        EA_RUNS.extend((cfg, r) for per_graph in runs[e] for r in per_graph)
    return runs


@pytest.fixture(scope="session")
def degenerate_runs():
    problem = MisProblem(gen_er(100, 0.05, 77))
    base = EAConfig.generalist(LB, budget=40_000)
    configs = {
        "baldwinian": EAConfig(base.mu, base.lam, base.rc, B, budget=base.budget),
        "lamarckian": EAConfig(base.mu, base.lam, base.rc, L, budget=base.budget),
        "lb0": EAConfig(base.mu, base.lam, base.rc, LB, p_lb=0.0, budget=base.budget),
        "lb1": EAConfig(base.mu, base.lam, base.rc, LB, p_lb=1.0, budget=base.budget),
    }
    seeds = [derive_seed(6, i) for i in range(10)]
    runs = {name: run_seeds(cfg, problem, seeds) for name, cfg in configs.items()}
    for name, cfg in configs.items():
        EA_RUNS.extend((cfg, r) for r in runs[name])
    return runs


def test_criterion_1_scaling_k2(scaling_k2):
    bounds = {D: (2.5, 3.5), L: (1.5, 2.5), B: (1.5, 2.5)}
    slopes = {e: scaling_k2.slopes[e] for e in bounds}
    ok = all(lo <= slopes[e][0] <= hi for e, (lo, hi) in bounds.items())
    ok &= all(p.success_rate == 1.0 for pts in scaling_k2.points.values() for p in pts)
    detail = ", ".join(f"{e.value} {s:.3f}+-{se:.3f}" for e, (s, se) in slopes.items())
    verdict("criterion 1: k=2 iteration slopes", ok, detail)


def test_criterion_2_hierarchy_k3(hierarchy_k3):
    pt = {e: hierarchy_k3.points[e][0] for e in (B, L, D)}
    assert all(p.runs >= 30 and p.success_rate == 1.0 for p in pt.values())

    def gap(lo, hi):
        diff = pt[hi].mean_iterations - pt[lo].mean_iterations
        return diff, 2 * np.hypot(pt[hi].sem_iterations, pt[lo].sem_iterations)

    (d1, t1), (d2, t2) = gap(B, L), gap(L, D)
    detail = ", ".join(f"{e.value} {p.mean_iterations:.1f}+-{p.sem_iterations:.1f}" for e, p in pt.items())
    verdict("criterion 2: k=3 n=30 ordering B < L < D", d1 > t1 and d2 > t2, detail)


def test_criterion_3_exact_chain(darwin_n4_runs):
    expected = one_plus_one_hitting_time(4, 2, "darwinian")
    its = np.array([r.iterations for r in darwin_n4_runs], dtype=float)
    se = its.std(ddof=1) / np.sqrt(len(its))
    z = (its.mean() - expected) / se
    verdict("criterion 3: n=4 Darwinian vs exact chain", abs(z) < 3 and all(r.success for r in darwin_n4_runs),
            f"empirical {its.mean():.3f}, exact {expected:.3f}, z={z:.2f}")


def test_criterion_4_local_search():
    rng = np.random.default_rng(404)
    failures = []
    # (a) and (b) on random pairs
    for trial in range(10_000):
        n = int(rng.integers(2, 61))
        g = gen_er(n, float(rng.uniform(0.02, 0.6)), derive_seed(404, trial))
        x = rng.integers(0, 2, n).astype(np.uint8)
        y, _ = MisProblem(g).local_search(x, rng)
        if internal_edges(g, y) or np.any(y & (1 - x)):
            failures.append(("mis random", trial))
        z, _ = McProblem(g).local_search(x, rng)
        if McProblem(g).flip_gains(z).max(initial=0) > 0:
            failures.append(("mc random", trial))
    # (a) and (b) exhaustively on the fixed corpus
    for name, g in fixed_corpus().items():
        mis, mc = MisProblem(g), McProblem(g)
        for x in all_bitstrings(g.n).astype(np.uint8):
            y, _ = mis.local_search(x, rng)
            if internal_edges(g, y) or np.any(y & (1 - x)):
                failures.append(("mis exhaustive", name))
            z, _ = mc.local_search(x, rng)
            if mc.flip_gains(z).max(initial=0) > 0:
                failures.append(("mc exhaustive", name))
    # (c) hillclimb fixed points against brute-force local maxima
    for n, k in [(8, 2), (9, 3)]:
        p = DlbProblem(n, k)
        fixed = {tuple(x) for x in all_bitstrings(n) if hillclimb(p, x, rng).ls_iterations == 0}
        if fixed != local_maxima(n, k):
            failures.append(("dlb fixed points", (n, k)))
    verdict("criterion 4: local-search correctness", not failures, f"{len(failures)} failures")


@pytest.mark.slow
def test_criterion_5_mis_ordering(mis_ordering_runs):
    means = {e: np.mean([[r.best_fitness for r in per_graph] for per_graph in runs])
             for e, runs in mis_ordering_runs.items()}
    ok = all(means[e] > means[D] for e in (B, L, LB))
    detail = ", ".join(f"{e.value} {m:.2f}" for e, m in means.items())
    verdict("criterion 5: MIS ordering over Darwinian", ok, detail)


def test_criterion_6_degenerate_lb(degenerate_runs):
    def same_trace(a, b):
        return (a.convergence == b.convergence and a.diversity == b.diversity and a.counters == b.counters
                and a.best_fitness == b.best_fitness and np.array_equal(a.best_genotype, b.best_genotype)
                and a.generations == b.generations)

    lb0 = all(same_trace(a, b) for a, b in zip(degenerate_runs["lb0"], degenerate_runs["baldwinian"]))
    lb1 = all(a == b for a, b in zip(degenerate_runs["lb1"], degenerate_runs["lamarckian"]))
    verdict("criterion 6: L-B(0) == Baldwinian, L-B(1) == Lamarckian", lb0 and lb1,
            f"p=0 {'identical' if lb0 else 'differs'}, p=1 {'identical' if lb1 else 'differs'}")


def test_criterion_7_invariants(scaling_k2, hierarchy_k3, darwin_n4_runs, mis_ordering_runs, degenerate_runs):
    problems = []
    for cfg, rec in EA_RUNS:
        best = [f for _, f in rec.convergence]
        if any(b < a for a, b in zip(best, best[1:])):
            problems.append("mu+lambda elitism")
        if rec.counters.offspring_evals != cfg.mu + rec.generations * cfg.lam:
            problems.append("mu+lambda accounting")
        if cfg.evolution is D and (rec.counters.ls_iterations or rec.counters.ls_neighbor_evals):
            problems.append("darwinian ls counters")
    # (1+1) runs: run_one_plus_one raises if the parent's stored fitness ever drops,
    # so every completed run already passed the elitism check
    for row in ONE_PLUS_ONE_ROWS:
        if isinstance(row, tuple):
            evolution, n, res = row
            its, ls_iter, evals, offspring = res.iterations, res.counters.ls_iterations, \
                res.counters.ls_neighbor_evals, res.counters.offspring_evals
        else:
            # scaling rows keep no offspring counter; only the ls counters are checked
            evolution, n, its, ls_iter, evals, offspring = (
                row.evolution, row.n, row.iterations, row.ls_iterations, row.neighbor_evals, None)
        if offspring is not None and offspring != 1 + its:
            problems.append("(1+1) accounting")
        if evolution is D and (ls_iter or evals):
            problems.append("(1+1) darwinian ls counters")
        if evolution is not D and evals != n * (ls_iter + its + 1):
            problems.append("(1+1) ls accounting")
    verdict("criterion 7: elitism and accounting invariants", not problems,
            f"{len(EA_RUNS)} EA runs, {len(ONE_PLUS_ONE_ROWS)} (1+1) runs, {len(problems)} violations")


def test_criterion_8_grid_size():
    size = GridSpec().size(list(Evolution))
    verdict("criterion 8: default grid size", size == 252, f"{size} configurations")


def test_criterion_9_fit_exponent():
    ns = [16, 32, 64, 128]
    errs = [abs(fit_exponent(ns, [n**power for n in ns])[0] - power) for power in (2, 3)]
    verdict("criterion 9: exact exponent fit", max(errs) < 1e-9, f"max error {max(errs):.1e}")

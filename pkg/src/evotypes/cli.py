"""Command-line entry point: ``generate``, ``solve``, ``grid`` and ``dlb-scale``.

Every option can also be given in a YAML file passed with ``--config``; flags
given on the command line override the file.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from evotypes.ea import DEFAULT_BUDGET, GENERALIST, EAConfig, Evolution
from evotypes.errors import EvotypesError
from evotypes.graph import gen_ba, gen_er, read_edge_list, write_edge_list
from evotypes.harness import (
    GridSpec,
    aggregate_scores,
    derive_seed,
    dlb_scaling_experiment,
    ensure_parent,
    grid_search,
    run_seeds,
    write_grid_csv,
    write_scaling_csv,
    write_trace_csv,
)
from evotypes.problems import make_problem

log = logging.getLogger("evotypes")


class UsageError(Exception):
    pass


GENERALIST_HELP = "generalist defaults (mu/lambda/r_c/p_LB): " + "; ".join(
    f"{e.value} {mu}/{lam}/{rc}/{plb}" for e, (mu, lam, rc, plb) in GENERALIST.items()
)

DEFAULTS = {
    "generate": {"model": None, "n": None, "p": None, "m": None, "seed": 0, "out": None},
    "solve": {
        "problem": None, "graph": None, "evolution": "baldwinian", "mu": None, "lam": None, "rc": None,
        "plb": None, "r_mut": None, "budget": DEFAULT_BUDGET, "runs": 3, "seed": 0, "threads": 1,
        "trace": None, "out": None,
    },
    "grid": {
        "problem": "mis", "graphs": None, "datasets": None, "evolutions": [e.value for e in Evolution],
        "grid": {}, "seeds": [0], "budget": DEFAULT_BUDGET, "threads": 1, "out": "grid.csv", "seed": 0,
    },
    "dlb-scale": {
        "k": 2, "n": [32, 64, 128], "reps": 50, "types": ["darwinian", "lamarckian", "baldwinian"],
        "seed": 0, "max_iterations": 10**12, "threads": 1, "out": None,
    },
}


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _common(p: argparse.ArgumentParser, threads=True) -> None:
    p.add_argument("--config", help="YAML file with option values; flags override it")
    p.add_argument("--seed", type=int, help="root seed (default: 0)")
    p.add_argument("--out", "-o", help="output path")
    if threads:
        p.add_argument("--threads", type=int, help="worker processes (default: 1); results do not depend on it")
    p.add_argument("--print-config", action="store_true", help="print the resolved configuration as YAML and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evotypes", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random graph as an edge list")
    g.add_argument("model", nargs="?", choices=["er", "ba"], help="Erdos-Renyi or Barabasi-Albert")
    g.add_argument("--n", type=int, help="vertex count")
    g.add_argument("--p", type=float, help="ER edge probability")
    g.add_argument("--m", type=int, help="BA attachment degree")
    _common(g, threads=False)

    s = sub.add_parser("solve", help="run the (mu + lambda) EA on one graph", epilog=GENERALIST_HELP)
    s.add_argument("problem", nargs="?", choices=["mis", "mc"])
    s.add_argument("graph", nargs="?", help="edge-list file")
    s.add_argument("--evolution", "-e", help="darwinian, baldwinian, lamarckian or lb (default: baldwinian)")
    s.add_argument("--mu", type=int, help="parent count (default: generalist value)")
    s.add_argument("--lam", "--lambda", dest="lam", type=int, help="offspring per generation (default: generalist value)")
    s.add_argument("--rc", type=float, help="crossover rate (default: generalist value)")
    s.add_argument("--plb", type=float, help="L-B replacement probability (default: generalist value)")
    s.add_argument("--r-mut", dest="r_mut", type=float, help="per-bit mutation rate (default: 1/n)")
    s.add_argument("--budget", type=int, help=f"offspring evaluations after initialisation (default: {DEFAULT_BUDGET})")
    s.add_argument("--runs", type=int, help="independent runs with derived seeds (default: 3)")
    s.add_argument("--trace", help="CSV path for per-generation convergence and diversity")
    _common(s)

    r = sub.add_parser("grid", help="grid search over (mu, lambda, r_c[, p_LB])")
    r.add_argument("--problem", choices=["mis", "mc"], help="default: mis")
    r.add_argument("--graphs", type=_str_list, help="comma-separated edge-list files (one dataset)")
    r.add_argument("--evolutions", type=_str_list, help="default: all four")
    r.add_argument("--seeds", type=_int_list, help="run seeds (default: 0)")
    r.add_argument("--budget", type=int, help=f"default: {DEFAULT_BUDGET}")
    _common(r)

    d = sub.add_parser("dlb-scale", help="(1+1) EA runtime scaling on DLB_k")
    d.add_argument("--k", type=int, help="block length (default: 2)")
    d.add_argument("--n", type=_int_list, help="comma-separated sizes, multiples of k (default: 32,64,128)")
    d.add_argument("--reps", type=int, help="repetitions per size (default: 50)")
    d.add_argument("--types", type=_str_list, help="default: darwinian,lamarckian,baldwinian")
    d.add_argument("--max-iterations", dest="max_iterations", type=int, help="cap per run (default: 10^12)")
    _common(d)
    return parser


def resolve(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    if getattr(args, "config", None):
        try:
            loaded = yaml.safe_load(Path(args.config).read_text(encoding="utf-8")) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError(f"config {args.config} must be a mapping")
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg.update(loaded)
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if command == "solve":
        ea = solve_config(cfg)
        cfg.update(evolution=ea.evolution.value, mu=ea.mu, lam=ea.lam, rc=ea.rc, plb=ea.p_lb)
    return cfg


def cmd_generate(cfg: dict) -> int:
    model, n = cfg["model"], cfg["n"]
    if model not in ("er", "ba"):
        raise UsageError("generate needs a model: er or ba")
    if n is None or n < 1:
        raise UsageError("--n must be a positive vertex count")
    if model == "er":
        if cfg["p"] is None:
            raise UsageError("generate er needs --p")
        g = gen_er(n, cfg["p"], cfg["seed"])
    else:
        if cfg["m"] is None:
            raise UsageError("generate ba needs --m")
        g = gen_ba(n, cfg["m"], cfg["seed"])
    if cfg["out"]:
        write_edge_list(g, ensure_parent(cfg["out"]))
        print(f"wrote {g.n} vertices, {g.num_edges} edges to {cfg['out']}", file=sys.stderr)
    else:
        sys.stdout.write(f"n {g.n} m {g.num_edges}\n")
        sys.stdout.writelines(f"{u} {v}\n" for u, v in g.edges())
    return 0


def solve_config(cfg: dict) -> EAConfig:
    evolution = Evolution.parse(cfg["evolution"])
    mu, lam, rc, plb = GENERALIST[evolution]
    pick = lambda key, default: default if cfg[key] is None else cfg[key]  # noqa: E731
    return EAConfig(
        mu=pick("mu", mu), lam=pick("lam", lam), rc=pick("rc", rc), evolution=evolution,
        p_lb=pick("plb", plb), r_mut=cfg["r_mut"], budget=cfg["budget"], seed=cfg["seed"],
    )


def cmd_solve(cfg: dict) -> int:
    if cfg["problem"] is None or cfg["graph"] is None:
        raise UsageError("solve needs a problem (mis|mc) and a graph file")
    ea = solve_config(cfg)
    problem = make_problem(cfg["problem"], read_edge_list(cfg["graph"]))
    seeds = [derive_seed(cfg["seed"], i) for i in range(cfg["runs"])]
    records = run_seeds(ea, problem, seeds, cfg["threads"])
    for seed, rec in zip(seeds, records):
        print(f"seed {seed}: best {rec.best_fitness:g}  unique optima {rec.unique_optima}  "
              f"evals {rec.counters.offspring_evals}  ls evals {rec.counters.ls_neighbor_evals}  "
              f"{rec.wall_time:.2f}s")
    mean, std = aggregate_scores({"graph": [r.best_fitness for r in records]})
    print(f"{ea.evolution.value} {problem.name}: mean {mean:g} +- {std:g} over {len(records)} runs")
    if cfg["trace"]:
        write_trace_csv(dict(zip(seeds, records)), ensure_parent(cfg["trace"]))
    if cfg["out"]:
        np.savetxt(ensure_parent(cfg["out"]), np.array([r.best_genotype for r in records]), fmt="%d", delimiter="")
    return 0


def _grid_datasets(cfg: dict, base: Path) -> dict:
    datasets = {}
    if cfg["datasets"]:
        if not isinstance(cfg["datasets"], dict):
            raise UsageError("'datasets' must map dataset names to lists of graph files or generator specs")
        items = cfg["datasets"].items()
    elif cfg["graphs"]:
        items = [("default", cfg["graphs"])]
    else:
        raise UsageError("grid needs 'graphs' or 'datasets'")
    for name, members in items:
        graphs = {}
        if isinstance(members, dict):
            # generator spec: {model, n, p | m, count, seed}
            model = members.get("model")
            count, seed = int(members.get("count", 1)), int(members.get("seed", 0))
            for i in range(count):
                if model == "er":
                    graphs[f"er{i}"] = gen_er(int(members["n"]), float(members["p"]), derive_seed(seed, i))
                elif model == "ba":
                    graphs[f"ba{i}"] = gen_ba(int(members["n"]), int(members["m"]), derive_seed(seed, i))
                else:
                    raise UsageError(f"dataset {name}: unknown generator model {model!r}")
        else:
            for path in members:
                path = Path(path)
                if not path.is_absolute():
                    path = base / path
                if not path.exists():
                    raise UsageError(f"graph file not found: {path}")
                graphs[path.stem] = read_edge_list(path)
        if not graphs:
            raise UsageError(f"dataset {name} has no graphs")
        datasets[str(name)] = graphs
    return datasets


def cmd_grid(cfg: dict, config_path: str | None) -> int:
    base = Path(config_path).parent if config_path else Path.cwd()
    datasets = _grid_datasets(cfg, base)
    axes = cfg["grid"] or {}
    spec_kwargs = {
        dest: tuple(axes[key]) for key, dest in
        [("mu", "mu_values"), ("lambda", "lambda_values"), ("rc", "rc_values"), ("plb", "plb_values")]
        if key in axes
    }
    spec = GridSpec(**spec_kwargs)
    evolutions = [Evolution.parse(e) for e in cfg["evolutions"]]
    log.info("grid: %d configurations x %d graphs x %d seeds", spec.size(evolutions),
             sum(len(g) for g in datasets.values()), len(cfg["seeds"]))
    result = grid_search(spec, evolutions, datasets, cfg["problem"], cfg["seeds"], cfg["budget"], cfg["threads"])
    out = ensure_parent(cfg["out"])
    write_grid_csv(result.rows, out)
    best_path = out.with_suffix(".best.csv")
    with open(best_path, "w", encoding="utf-8") as fh:
        fh.write("evolution,dataset,mu,lambda,rc,plb,mean_best_fitness\n")
        for (evolution, dataset), (cell, mean) in sorted(result.best.items(), key=lambda kv: (kv[0][1], kv[0][0].value)):
            plb = "" if cell.plb is None else repr(cell.plb)
            fh.write(f"{evolution.value},{dataset},{cell.mu},{cell.lam},{cell.rc!r},{plb},{mean!r}\n")
            print(f"{dataset:>12} {evolution.value:>10}: {cell.label():<22} mean {mean:g}")
    print(f"{len(result.rows)} runs written to {out}; best configurations in {best_path}")
    return 0


def cmd_dlb_scale(cfg: dict) -> int:
    k = cfg["k"]
    bad = [n for n in cfg["n"] if n < k or n % k]
    if bad:
        raise UsageError(f"sizes {bad} are not positive multiples of k={k}")
    report = dlb_scaling_experiment(
        k, cfg["n"], cfg["reps"], cfg["types"], cfg["seed"], cfg["max_iterations"], cfg["threads"]
    )
    for evolution, pts in report.points.items():
        for p in pts:
            print(f"{evolution.value:>10} n={p.n:<5} mean iterations {p.mean_iterations:.1f} "
                  f"+- {p.sem_iterations:.1f}  pessimistic evals {p.mean_pessimistic_evals:.1f}  "
                  f"success {p.success_rate:.2f}")
        if evolution in report.slopes:
            slope, se = report.slopes[evolution]
            eslope, ese = report.eval_slopes[evolution]
            print(f"{evolution.value:>10} slope {slope:.3f} +- {se:.3f} (iterations), "
                  f"{eslope:.3f} +- {ese:.3f} (pessimistic evals)")
        else:
            print(f"{evolution.value:>10} slope n/a (needs 3 sizes)")
    if cfg["out"]:
        write_scaling_csv(report.rows, ensure_parent(cfg["out"]))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = resolve(args.command, args)
        if args.print_config:
            yaml.safe_dump({args.command: cfg}, sys.stdout, sort_keys=True)
            return 0
        if args.command == "generate":
            return cmd_generate(cfg)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "grid":
            return cmd_grid(cfg, args.config)
        return cmd_dlb_scale(cfg)
    except (UsageError, EvotypesError, ValueError, KeyError) as exc:
        print(f"evotypes {args.command}: error: {exc}", file=sys.stderr)
        if isinstance(exc, ValueError) and "evolution type" in str(exc):
            parser.print_usage(sys.stderr)
        return 2
    except OSError as exc:
        print(f"evotypes {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

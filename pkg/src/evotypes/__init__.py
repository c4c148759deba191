"""Darwinian, Baldwinian, Lamarckian and partial-Lamarckian evolution for graph
problems, plus the DeceptiveLeadingBlocks runtime benchmark."""

from evotypes.dlb import DlbProblem, LsResult, baldwin_value, critical_block, dlb_value, hillclimb
from evotypes.ea import (
    EAConfig,
    EvalCounter,
    Evolution,
    Individual,
    Population,
    RunRecord,
    run_mu_plus_lambda,
    run_one_plus_one,
)
from evotypes.graph import Graph, cut_value, from_edge_list, gen_ba, gen_er, internal_edges
from evotypes.problems import McProblem, MisProblem

__version__ = "0.1.0"

__all__ = [
    "DlbProblem",
    "EAConfig",
    "EvalCounter",
    "Evolution",
    "Graph",
    "Individual",
    "LsResult",
    "McProblem",
    "MisProblem",
    "Population",
    "RunRecord",
    "baldwin_value",
    "critical_block",
    "cut_value",
    "dlb_value",
    "from_edge_list",
    "gen_ba",
    "gen_er",
    "hillclimb",
    "internal_edges",
    "run_mu_plus_lambda",
    "run_one_plus_one",
]

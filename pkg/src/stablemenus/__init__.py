"""Stable menus of public goods: checking, search, reductions, encodings and mechanisms."""

from .model import (
    OUTSIDE,
    AgentGroup,
    Problem,
    ProblemError,
    StabilityParams,
    assign,
    count_top,
    lobby_size,
    load_problem,
    pairwise,
    parse_problem,
    save_problem,
    served_count,
    serialize_problem,
)
from .solvers import NoStableMenu, Solution, enumerate_stable, greedy, solve
from .stability import MenuTable, StabilityVerdict, check_gap, is_feasible, is_stable, is_uncontestable

__all__ = [
    "OUTSIDE",
    "AgentGroup",
    "MenuTable",
    "NoStableMenu",
    "Problem",
    "ProblemError",
    "Solution",
    "StabilityParams",
    "StabilityVerdict",
    "assign",
    "check_gap",
    "count_top",
    "enumerate_stable",
    "greedy",
    "is_feasible",
    "is_stable",
    "is_uncontestable",
    "load_problem",
    "lobby_size",
    "pairwise",
    "parse_problem",
    "save_problem",
    "served_count",
    "serialize_problem",
    "solve",
]

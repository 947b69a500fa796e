"""Stable menu mechanisms and an exhaustive search for profitable misreports."""

from __future__ import annotations

from collections.abc import Callable, Iterator
from dataclasses import dataclass
from itertools import combinations_with_replacement, permutations
from typing import Optional

from .covering import pref_universe
from .model import AgentGroup, Problem, StabilityParams, favorite_in, pairwise
from .solvers import NoStableMenu, enumerate_stable
from .stability import is_stable

Mechanism = Callable[[Problem, StabilityParams], frozenset]

DEFAULT_SCAN_BUDGET = 200_000


class MechanismError(RuntimeError):
    """A mechanism failed on a problem reached during a manipulation search."""

    def __init__(self, message: str, problem: Problem):
        super().__init__(message)
        self.problem = problem


@dataclass(frozen=True)
class SummaryStats:
    x1: int  # agents with 1 > 2
    x2: int  # agents with 2 > 1


def summary_stats(p: Problem) -> SummaryStats:
    return SummaryStats(pairwise(p, 1, 2), pairwise(p, 2, 1))


def mechanism_g2_from_stats(x1: int, x2: int, params: StabilityParams) -> frozenset[int]:
    """Two-good rule on summary statistics: nothing, both, or the majority winner."""
    if x1 + x2 < params.t:
        return frozenset()
    if x1 >= params.t and x2 >= params.t:
        return frozenset({1, 2})
    return frozenset({1}) if x1 >= x2 else frozenset({2})


def mechanism_g2(p: Problem, params: StabilityParams) -> frozenset[int]:
    """Strategyproof anonymous stable mechanism for two goods and complete lists."""
    if p.num_goods != 2:
        raise ValueError(f"mechanism_g2 needs g=2, got g={p.num_goods}")
    if not p.is_complete():
        raise ValueError("mechanism_g2 needs complete preference lists")
    if params.u < params.t:
        raise ValueError("mechanism_g2 needs u >= t")
    stats = summary_stats(p)
    return mechanism_g2_from_stats(stats.x1, stats.x2, params)


def default_mechanism(p: Problem, params: StabilityParams) -> frozenset[int]:
    """First stable menu in size-then-lexicographic order."""
    menus = enumerate_stable(p, params)
    if not menus:
        raise NoStableMenu(f"no ({params.t},{params.u})-stable menu")
    return menus[0]


MECHANISMS: dict[str, Mechanism] = {"g2": mechanism_g2, "default": default_mechanism}


# -- manipulation search ----------------------------------------------------


@dataclass(frozen=True)
class ManipulationWitness:
    problem: Problem
    group_index: int
    true_prefs: tuple[int, ...]
    misreport: tuple[int, ...]
    honest_menu: frozenset[int]
    deviant_menu: frozenset[int]
    honest_outcome: Optional[int]
    deviant_outcome: Optional[int]

    def to_dict(self) -> dict:
        return {
            "instance": self.problem.to_dict(),
            "deviation": {
                "group_index": self.group_index,
                "true_prefs": list(self.true_prefs),
                "misreport": list(self.misreport),
                "honest_menu": sorted(self.honest_menu),
                "deviant_menu": sorted(self.deviant_menu),
                "honest_outcome": self.honest_outcome,
                "deviant_outcome": self.deviant_outcome,
            },
        }


def _rank(prefs: tuple[int, ...], outcome: Optional[int]) -> int:
    return len(prefs) if outcome is None else prefs.index(outcome)


def deviate(p: Problem, group_index: int, misreport: tuple[int, ...]) -> Problem:
    """Move one agent of ``group_index`` into a new trailing group reporting ``misreport``."""
    groups = list(p.groups)
    source = groups[group_index]
    groups[group_index] = AgentGroup(source.count - 1, source.prefs)
    groups.append(AgentGroup(1, misreport))
    return Problem(p.num_goods, tuple(groups))


def _report_space(g: int, kind: str) -> list[tuple[int, ...]]:
    if kind == "complete":
        return list(permutations(range(1, g + 1)))
    if kind == "truncations":
        return list(pref_universe(g, False).prefs)
    raise ValueError(f"report space must be 'complete' or 'truncations', got {kind!r}")


def _run(mech: Mechanism, p: Problem, params: StabilityParams) -> frozenset[int]:
    try:
        return frozenset(mech(p, params))
    except Exception as exc:  # noqa: BLE001 - re-raised with the problem attached
        raise MechanismError(f"mechanism failed: {exc}", p) from exc


def iter_manipulations(
    mech: Mechanism,
    p: Problem,
    params: StabilityParams,
    report_space: Optional[str] = None,
) -> Iterator[ManipulationWitness]:
    """All profitable single-agent misreports, groups in order, reports in space order."""
    if report_space is None:
        report_space = "complete" if p.is_complete() else "truncations"
    reports = _report_space(p.num_goods, report_space)
    honest_menu = _run(mech, p, params)
    for idx, group in enumerate(p.groups):
        if group.count == 0:
            continue
        honest = favorite_in(group.prefs, honest_menu)
        if honest is not None and group.prefs and honest == group.prefs[0]:
            continue
        for report in reports:
            if report == group.prefs:
                continue
            deviant_menu = _run(mech, deviate(p, idx, report), params)
            outcome = favorite_in(group.prefs, deviant_menu)
            if _rank(group.prefs, outcome) < _rank(group.prefs, honest):
                yield ManipulationWitness(
                    p, idx, group.prefs, report, honest_menu, deviant_menu, honest, outcome
                )


def find_manipulation(
    mech: Mechanism,
    p: Problem,
    params: StabilityParams,
    report_space: Optional[str] = None,
) -> Optional[ManipulationWitness]:
    return next(iter_manipulations(mech, p, params, report_space), None)


def replay(mech: Mechanism, witness: ManipulationWitness, params: StabilityParams) -> bool:
    """Re-run both sides of a witness and confirm the deviator strictly gains."""
    honest_menu = frozenset(mech(witness.problem, params))
    deviant_menu = frozenset(mech(deviate(witness.problem, witness.group_index, witness.misreport), params))
    prefs = witness.true_prefs
    honest = favorite_in(prefs, honest_menu)
    deviant = favorite_in(prefs, deviant_menu)
    return (
        honest_menu == witness.honest_menu
        and deviant_menu == witness.deviant_menu
        and _rank(prefs, deviant) < _rank(prefs, honest)
    )


def all_profiles(g: int, n: int, complete: bool) -> Iterator[Problem]:
    """Every multiset of ``n`` lists from the universe, as problems with one group per distinct list."""
    universe = pref_universe(g, complete).prefs
    for combo in combinations_with_replacement(range(len(universe)), n):
        counts: dict[int, int] = {}
        for i in combo:
            counts[i] = counts.get(i, 0) + 1
        yield Problem(g, tuple(AgentGroup(c, universe[i]) for i, c in counts.items()))


def count_profiles(g: int, n: int, complete: bool) -> int:
    from math import comb

    return comb(len(pref_universe(g, complete)) + n - 1, n)


def scan_strategyproofness(
    mech: Mechanism,
    g: int,
    n: int,
    params: StabilityParams,
    complete: bool = True,
    budget: int = DEFAULT_SCAN_BUDGET,
) -> list[ManipulationWitness]:
    """Every profitable misreport over all profiles of ``n`` agents; empty means none exists."""
    total = count_profiles(g, n, complete)
    if total > budget:
        raise ValueError(f"{total} profiles exceed the scan budget of {budget}")
    report_space = "complete" if complete else "truncations"
    witnesses: list[ManipulationWitness] = []
    for p in all_profiles(g, n, complete):
        witnesses.extend(iter_manipulations(mech, p, params, report_space))
    return witnesses


def is_stable_output(mech: Mechanism, p: Problem, params: StabilityParams) -> bool:
    return is_stable(p, mech(p, params), params).stable

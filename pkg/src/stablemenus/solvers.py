"""Procedures that find stable menus.

Everything returned as stable here has been re-checked with
:func:`stablemenus.stability.is_stable`; nothing is trusted from the
construction alone.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Union

from .model import Problem, StabilityParams, format_menu, lobby_size, pairwise, served_count, count_top
from .reductions import reduce_popular, reduce_rarely_ranked
from .stability import (
    DEFAULT_MAX_GOODS,
    MenuTable,
    StabilityVerdict,
    is_feasible,
    is_stable,
    is_uncontestable,
)


class NoStableMenu(Exception):
    """No menu passes the stability check."""


class CycleShapeError(ValueError):
    """The cycle is not the alternating singleton/pair cycle over four goods."""


class RecoveryFailure(RuntimeError):
    """Neither candidate extracted from a four-cycle is stable."""


class StepLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Solution:
    method: str
    menu: frozenset[int]
    verdict: StabilityVerdict

    @property
    def stable(self) -> bool:
        return self.verdict.stable

    def to_dict(self) -> dict:
        return {"method": self.method, "menu": sorted(self.menu), "verdict": self.verdict.to_dict()}


def enumerate_stable(p: Problem, params: StabilityParams, max_goods: int = DEFAULT_MAX_GOODS) -> list[frozenset[int]]:
    """Every stable menu, sorted by size and then lexicographically."""
    return MenuTable(p, max_goods=max_goods).stable_menus(params)


# -- greedy -----------------------------------------------------------------

ADD = "+"
REMOVE = "-"


@dataclass(frozen=True)
class GreedyStep:
    from_menu: frozenset[int]
    op: str
    good: int
    to_menu: frozenset[int]

    def __str__(self) -> str:
        return f"{format_menu(self.from_menu)} -{self.op}{self.good}-> {format_menu(self.to_menu)}"

    def to_dict(self) -> dict:
        return {
            "from": sorted(self.from_menu),
            "op": self.op,
            "good": self.good,
            "to": sorted(self.to_menu),
        }


@dataclass(frozen=True)
class GreedyStable:
    menu: frozenset[int]
    steps: tuple[GreedyStep, ...]


@dataclass(frozen=True)
class GreedyCycle:
    prefix: tuple[GreedyStep, ...]
    cycle: tuple[GreedyStep, ...]

    def menus(self) -> list[frozenset[int]]:
        return [step.from_menu for step in self.cycle]


GreedyOutcome = Union[GreedyStable, GreedyCycle]


def greedy_step(p: Problem, params: StabilityParams, menu: frozenset[int]) -> Optional[GreedyStep]:
    """One move of the greedy algorithm, or None when ``menu`` is stable.

    Removal of an under-served good takes priority over adding a contesting
    good; ties go to the smallest index.
    """
    for j in sorted(menu):
        if served_count(p, j, menu) < params.t:
            return GreedyStep(menu, REMOVE, j, menu - {j})
    for j in p.goods:
        if j not in menu and lobby_size(p, j, menu) >= params.u:
            return GreedyStep(menu, ADD, j, menu | {j})
    return None


def greedy(p: Problem, params: StabilityParams, init: Sequence[int] = (), max_steps: Optional[int] = None) -> GreedyOutcome:
    """Run the greedy add/remove algorithm until it stops or revisits a menu."""
    if max_steps is None:
        max_steps = 3 ** p.num_goods + 1
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    menu = frozenset(init)
    seen = {menu: 0}
    steps: list[GreedyStep] = []
    while len(steps) < max_steps:
        step = greedy_step(p, params, menu)
        if step is None:
            return GreedyStable(menu, tuple(steps))
        steps.append(step)
        menu = step.to_menu
        if menu in seen:
            start = seen[menu]
            return GreedyCycle(tuple(steps[:start]), tuple(steps[start:]))
        seen[menu] = len(steps)
    raise StepLimitExceeded(f"greedy did not settle within {max_steps} steps")


def cycle_singletons(cycle: Sequence[GreedyStep]) -> list[int]:
    """Goods j1..j4 of an alternating singleton/pair four-cycle, rotated to start at the smallest."""
    if len(cycle) != 8:
        raise CycleShapeError(f"cycle not of alternating 1-2 length-4 shape (length {len(cycle)})")
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        if a.to_menu != b.from_menu:
            raise CycleShapeError("cycle steps do not chain")
    # rotate to begin at a singleton
    offset = next((i for i, s in enumerate(cycle) if len(s.from_menu) == 1), None)
    if offset is None:
        raise CycleShapeError("cycle not of alternating 1-2 length-4 shape (no singleton menu)")
    steps = list(cycle[offset:]) + list(cycle[:offset])
    singles = []
    for i, step in enumerate(steps):
        want_size, want_op = (1, ADD) if i % 2 == 0 else (2, REMOVE)
        if len(step.from_menu) != want_size or step.op != want_op:
            raise CycleShapeError(
                "cycle not of alternating 1-2 length-4 shape "
                f"(menu sizes {[len(s.from_menu) for s in steps]})"
            )
        if i % 2 == 0:
            singles.append(next(iter(step.from_menu)))
    for i, step in enumerate(steps[1::2]):
        # the pair {j_k, j_{k+1}} drops j_k
        if step.good != singles[i]:
            raise CycleShapeError("pair step does not drop the older good")
    if len(set(singles)) != 4:
        raise CycleShapeError(f"cycle singletons {singles} are not four distinct goods")
    low = singles.index(min(singles))
    return singles[low:] + singles[:low]


def recover_from_cycle(p: Problem, params: StabilityParams, cycle: Sequence[GreedyStep]) -> list[frozenset[int]]:
    """Candidates {j1,j3} and {j2,j4} from a four-cycle that pass the stability check."""
    j1, j2, j3, j4 = cycle_singletons(cycle)
    candidates = [frozenset((j1, j3)), frozenset((j2, j4))]
    found = [c for c in candidates if is_stable(p, c, params).stable]
    if not found:
        raise RecoveryFailure(
            f"neither {format_menu(candidates[0])} nor {format_menu(candidates[1])} is "
            f"({params.t},{params.u})-stable"
        )
    return found


# -- constructive solvers ---------------------------------------------------


def solve_simple(p: Problem, params: StabilityParams) -> Solution:
    """Offer every good that is some t agents' favorite; otherwise nothing or one lobbied good.

    Guaranteed stable when (u-1) >= (g-1)(t-1); outside that regime the
    returned verdict may be negative.
    """
    popular = frozenset(j for j in p.goods if count_top(p, j) >= params.t)
    if popular:
        menu = popular
    else:
        ok, contests = is_uncontestable(p, frozenset(), params.u)
        menu = frozenset() if ok else frozenset((contests[0][0],))
    return Solution("simple", menu, is_stable(p, menu, params))


def solve_gminus2(p: Problem, params: StabilityParams) -> Optional[Solution]:
    """Search singletons and pairs after removing rarely ranked goods and forcing popular ones.

    Guaranteed to succeed when g >= 4 and (u-1) >= (g-2)(t-1). Returns None
    when no candidate verifies.
    """
    rare = reduce_rarely_ranked(p, params.t)
    pop = reduce_popular(rare.reduced, params.t)
    q = pop.reduced
    candidates: list[frozenset[int]] = []
    for j in q.goods:
        if is_uncontestable(q, (j,), params.u)[0]:
            candidates.append(frozenset((j,)))
    for pair in combinations(q.goods, 2):
        if is_feasible(q, pair, params.t)[0]:
            candidates.append(frozenset(pair))
    candidates.append(frozenset())
    for menu in candidates:
        lifted = rare.forward(pop.forward(menu))
        verdict = is_stable(p, lifted, params)
        if verdict.stable:
            return Solution("gminus2", lifted, verdict)
    return None


# -- structured preferences -------------------------------------------------


def classify_regular(p: Problem, gprime: Sequence[int]) -> tuple[list[int], int]:
    """Count regular agents by favorite position in ``gprime`` and the irregular rest.

    An agent is regular when their favorite good is ``gprime[k]`` and they
    prefer ``gprime[i+1]`` to ``gprime[i]`` for every cyclic i except k.
    """
    m = len(gprime)
    if not 2 <= m <= p.num_goods or len(set(gprime)) != m:
        raise ValueError(f"gprime must list 2..g distinct goods, got {list(gprime)}")
    position = {good: k for k, good in enumerate(gprime)}
    x = [0] * m
    irregular = 0
    for group in p.groups:
        if not group.count:
            continue
        fav = group.prefs[0] if group.prefs else None
        k = position.get(fav)
        regular = k is not None and all(
            group.prefers(gprime[(i + 1) % m], gprime[i]) for i in range(m) if i != k
        )
        if regular:
            x[k] += group.count
        else:
            irregular += group.count
    return x, irregular


def structured_menu(x: Sequence[int], t: int) -> list[int]:
    """Positions (1-based) offered by the pending-pointer sweep over regular counts."""
    chosen = []
    pending = 1
    for k in range(2, len(x) + 1):
        if sum(x[pending - 1:k]) >= t:
            chosen.append(pending)
            pending = k + 1
    return chosen


def structured_solve(p: Problem, gprime: Sequence[int], params: StabilityParams) -> Solution:
    x, _ = classify_regular(p, gprime)
    menu = frozenset(gprime[k - 1] for k in structured_menu(x, params.t))
    return Solution("structured", menu, is_stable(p, menu, params))


def find_structure(p: Problem, params: StabilityParams, epsilon: Fraction = Fraction(0)) -> Optional[list[int]]:
    """Cycle j1..jm with |j_{i+1} > j_i| >= u, found on the popular-forced reduction.

    Returns goods in the labels of ``p``, or None when some good has no
    ``u``-sized pairwise majority against it (a stable menu of size <= 1 may
    then exist). ``epsilon`` is accepted for symmetry with the regime check
    and does not change the search.
    """
    pop = reduce_popular(p, params.t)
    q = pop.reduced
    if q.num_goods < 2:
        return None
    succ = {}
    for k in q.goods:
        winner = next((j for j in q.goods if j != k and pairwise(q, j, k) >= params.u), None)
        if winner is None:
            return None
        succ[k] = winner
    walk = [1]
    seen = {1: 0}
    while True:
        nxt = succ[walk[-1]]
        if nxt in seen:
            cycle = walk[seen[nxt]:]
            return [pop.labels[k - 1] for k in cycle]
        seen[nxt] = len(walk)
        walk.append(nxt)


def in_structured_regime(g: int, params: StabilityParams, epsilon: Fraction) -> bool:
    t, u = params.t, params.u
    return g >= 5 and t >= 2 and 0 <= epsilon < Fraction(1, 6) and u >= (g - 1 - epsilon) * (t - 1)


def solve_structured(p: Problem, params: StabilityParams, epsilon: Fraction = Fraction(0)) -> Optional[Solution]:
    """Force popular goods, locate the majority cycle and sweep it.

    Falls back to menus of size <= 1 when no cycle exists. Returns None if no
    candidate verifies.
    """
    pop = reduce_popular(p, params.t)
    q = pop.reduced
    gprime = find_structure(p, params, epsilon)
    if gprime is not None:
        index = {orig: k for k, orig in enumerate(pop.labels, start=1)}
        local = [index[j] for j in gprime]
        menu = pop.forward(structured_solve(q, local, params).menu)
        verdict = is_stable(p, menu, params)
        if verdict.stable:
            return Solution("structured", menu, verdict)
    for menu in [frozenset()] + [frozenset((j,)) for j in q.goods]:
        lifted = pop.forward(menu)
        verdict = is_stable(p, lifted, params)
        if verdict.stable:
            return Solution("structured", lifted, verdict)
    return None


def solve(p: Problem, params: StabilityParams, method: str = "auto") -> Solution:
    """Dispatch to a solver; ``auto`` tries the constructive ones before exhaustive search."""
    if method == "simple":
        return solve_simple(p, params)
    if method == "gminus2":
        sol = solve_gminus2(p, params)
    elif method == "structured":
        sol = solve_structured(p, params)
    elif method == "auto":
        sol = solve_simple(p, params)
        if not sol.stable:
            sol = solve_gminus2(p, params) or solve_structured(p, params)
        if sol is None:
            menus = enumerate_stable(p, params)
            if menus:
                sol = Solution("enumerate", menus[0], is_stable(p, menus[0], params))
    else:
        raise ValueError(f"unknown method {method!r}")
    if sol is None:
        raise NoStableMenu(f"method {method!r} found no ({params.t},{params.u})-stable menu")
    return sol

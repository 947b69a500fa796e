"""Constructors for the named instance families and a seeded random generator.

Rows are emitted in table order so generated files diff cleanly against
golden copies.
"""

from __future__ import annotations

import functools
import itertools
import math
import random
from collections.abc import Sequence

from .model import AgentGroup, Problem, ProblemError

# Cohorts with t=4, u=7, n=15 that share a greedy cycle but no stable menu.
_COHORTS = {
    "A": [
        ((5, 4, 3, 2, 1), 2),
        ((4, 3, 2, 1, 5), 2),
        ((3, 2, 1, 5, 4), 2),
        ((2, 1, 5, 4, 3), 2),
        ((1, 5, 4, 3, 2), 2),
        ((5, 4, 2, 3, 1), 1),
        ((1, 5, 3, 4, 2), 1),
        ((2, 1, 4, 5, 3), 1),
        ((3, 2, 5, 1, 4), 1),
        ((4, 3, 1, 2, 5), 1),
    ],
    "B": [
        ((5, 4, 3, 2, 1), 1),
        ((4, 3, 2, 1, 5), 1),
        ((3, 2, 1, 5, 4), 1),
        ((2, 1, 5, 4, 3), 1),
        ((1, 5, 4, 3, 2), 1),
        ((5, 3, 1, 4, 2), 2),
        ((1, 4, 2, 5, 3), 2),
        ((2, 5, 3, 1, 4), 2),
        ((3, 1, 4, 2, 5), 2),
        ((4, 2, 5, 3, 1), 2),
    ],
}

# Seven-good construction: (multiplier of x, base list); each column of the
# table is the cyclic shift of its first row.
_TABLE1_BASES = [
    (5, (1, 2, 3)),
    (3, (1, 2, 4, 5)),
    (1, (1, 4, 2, 5)),
    (1, (1, 6, 4, 2)),
]


def _shift(prefs: Sequence[int], by: int, modulus: int) -> tuple[int, ...]:
    return tuple((j - 1 + by) % modulus + 1 for j in prefs)


def gen_g2_lower(t: int, u: int) -> Problem:
    """``u`` agents all ranking 1 over 2: no (t,u)-stable menu when u < t."""
    if not 1 <= u < t:
        raise ValueError(f"need 1 <= u < t, got t={t}, u={u}")
    return Problem.from_lists(2, [(u, (1, 2))])


def gen_cyclic3(t: int, u: int, g: int = 3) -> Problem:
    """Three blocks of ceil(u/2) agents with cyclically rotated lists over goods 1..3."""
    if g < 3:
        raise ValueError(f"need g >= 3, got {g}")
    x = math.ceil(u / 2)
    if t < 1 or u < 1 or x >= t:
        raise ValueError(f"need ceil(u/2) < t, got t={t}, u={u}")
    return Problem.from_lists(g, [(x, (1, 2, 3)), (x, (2, 3, 1)), (x, (3, 1, 2))])


def gen_c4_cycle(t: int) -> Problem:
    """Four blocks of t-1 agents on which the greedy algorithm cycles."""
    if t < 2:
        raise ValueError(f"need t >= 2, got {t}")
    block = t - 1
    return Problem.from_lists(
        4,
        [
            (block, (4, 3, 2, 1)),
            (block, (3, 2, 1, 4)),
            (block, (2, 1, 4, 3)),
            (block, (1, 4, 3, 2)),
        ],
    )


def gen_table1(x: int = 1, g: int = 7) -> Problem:
    """The 70x-agent instance with no (11x+1, 23x)-stable menu; goods 8..g unranked."""
    if x < 1:
        raise ValueError(f"need x >= 1, got {x}")
    if g < 7:
        raise ValueError(f"need g >= 7, got {g}")
    rows = []
    for mult, base in _TABLE1_BASES:
        for shift in range(7):
            rows.append((mult * x, _shift(base, shift, 7)))
    return Problem.from_lists(g, rows)


def gen_table1_complete(x: int = 1, g: int = 7, completion_seed: int = 0) -> Problem:
    """The seven-good counterexample with every list filled up to a full order in seeded-shuffle order."""
    base = gen_table1(x, g)
    rng = random.Random(completion_seed)
    groups = []
    for group in base.groups:
        missing = [j for j in range(1, g + 1) if j not in group.prefs]
        rng.shuffle(missing)
        groups.append(AgentGroup(group.count, group.prefs + tuple(missing)))
    return Problem(g, tuple(groups))


def gen_appendixB(which: str) -> Problem:
    key = which.upper()
    if key not in _COHORTS:
        raise ValueError(f"cohort must be 'A' or 'B', got {which!r}")
    return Problem.from_lists(5, [(count, prefs) for prefs, count in _COHORTS[key]])


def gen_structured(g: int, t: int) -> Problem:
    """g blocks of t-1 agents; block k ranks k, k-1, ..., 1, g, ..., k+1."""
    if g < 2 or t < 2:
        raise ValueError(f"need g >= 2 and t >= 2, got g={g}, t={t}")
    rows = []
    for k in range(1, g + 1):
        prefs = tuple((k - 1 - s) % g + 1 for s in range(g))
        rows.append((t - 1, prefs))
    return Problem.from_lists(g, rows)


_TABULATE_MAX_GOODS = 7


@functools.lru_cache(maxsize=None)
def _all_lists(g: int, complete: bool) -> tuple[tuple[int, ...], ...]:
    goods = range(1, g + 1)
    if complete:
        return tuple(itertools.permutations(goods))
    return tuple(perm for length in range(g + 1) for perm in itertools.permutations(goods, length))


def _random_list(rng: random.Random, g: int, complete: bool) -> tuple[int, ...]:
    # uniform over all complete lists, or over all lists of distinct goods
    if g <= _TABULATE_MAX_GOODS:
        lists = _all_lists(g, complete)
        return lists[rng.randrange(len(lists))]
    if complete:
        return tuple(rng.sample(range(1, g + 1), g))
    # length L has g!/(g-L)! members
    weights = [math.perm(g, length) for length in range(g + 1)]
    length = rng.choices(range(g + 1), weights=weights)[0]
    return tuple(rng.sample(range(1, g + 1), length))


def gen_random(g: int, n: int, seed: int, complete: bool = False) -> Problem:
    """``n`` agents with independent uniform lists, merged into groups by first appearance."""
    if g < 1 or n < 0:
        raise ProblemError(f"need g >= 1 and n >= 0, got g={g}, n={n}")
    rng = random.Random(seed)
    counts: dict[tuple[int, ...], int] = {}
    for _ in range(n):
        prefs = _random_list(rng, g, complete)
        counts[prefs] = counts.get(prefs, 0) + 1
    return Problem.from_lists(g, [(c, prefs) for prefs, c in counts.items()])


FAMILIES = (
    "g2lower",
    "cyclic3",
    "c4cycle",
    "table1",
    "table1-complete",
    "appendixB",
    "structured",
    "random",
)

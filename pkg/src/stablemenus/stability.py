"""Feasibility, uncontestability and stability predicates.

The per-menu predicates work directly on a :class:`Problem`. For routines that
look at every menu at once (exhaustive enumeration, gap checks) a
:class:`MenuTable` precomputes the served count of every good under every menu
with numpy, indexing menus by bitmask (bit ``j-1`` set when good ``j`` is
offered).
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

from .model import Problem, StabilityParams, lobby_size, served_count

DEFAULT_MAX_GOODS = 20


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    feasibility_violations: tuple[tuple[int, int], ...] = field(default_factory=tuple)
    contests: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "stable": self.stable,
            "feasibility_violations": [list(v) for v in self.feasibility_violations],
            "contests": [list(c) for c in self.contests],
        }


def is_feasible(p: Problem, o: Iterable[int], t: int) -> tuple[bool, list[tuple[int, int]]]:
    """t-feasibility of ``o`` with every offered good serving fewer than ``t`` agents."""
    if t < 1:
        raise ValueError("t must be >= 1")
    menu = frozenset(o)
    witnesses = []
    for j in sorted(menu):
        served = served_count(p, j, menu)
        if served < t:
            witnesses.append((j, served))
    return not witnesses, witnesses


def is_uncontestable(p: Problem, o: Iterable[int], u: int) -> tuple[bool, list[tuple[int, int]]]:
    """u-uncontestability of ``o`` with every unoffered good whose lobby reaches ``u``."""
    if u < 1:
        raise ValueError("u must be >= 1")
    menu = frozenset(o)
    witnesses = []
    for j in p.goods:
        if j in menu:
            continue
        lobby = lobby_size(p, j, menu)
        if lobby >= u:
            witnesses.append((j, lobby))
    return not witnesses, witnesses


def is_stable(p: Problem, o: Iterable[int], params: StabilityParams) -> StabilityVerdict:
    menu = frozenset(o)
    _, violations = is_feasible(p, menu, params.t)
    _, contests = is_uncontestable(p, menu, params.u)
    return StabilityVerdict(not violations and not contests, tuple(violations), tuple(contests))


# -- all-menus table --------------------------------------------------------


def mask_of(menu: Iterable[int]) -> int:
    mask = 0
    for j in menu:
        mask |= 1 << (j - 1)
    return mask


def menu_of(mask: int) -> frozenset[int]:
    return frozenset(j + 1 for j in range(mask.bit_length()) if mask >> j & 1)


@lru_cache(maxsize=None)
def _membership(g: int) -> np.ndarray:
    masks = np.arange(1 << g, dtype=np.int64)
    return ((masks[:, None] >> np.arange(g)) & 1).astype(bool)


@lru_cache(maxsize=None)
def canonical_mask_order(g: int) -> tuple[int, ...]:
    """All 2^g masks sorted by menu size, then lexicographically by goods."""
    order = []
    for size in range(g + 1):
        for combo in combinations(range(1, g + 1), size):
            order.append(mask_of(combo))
    return tuple(order)


@lru_cache(maxsize=None)
def masks_of_size(g: int, size: int) -> np.ndarray:
    return np.array([mask_of(c) for c in combinations(range(1, g + 1), size)], dtype=np.int64)


class MenuTable:
    """Served counts of every good under every menu of a problem.

    ``served[mask, j-1]`` is the number of agents assigned to good ``j`` when
    the menu ``mask`` is offered; the lobby of an unoffered ``j`` against
    ``mask`` is ``served[mask | bit(j), j-1]``.
    """

    _CHUNK_CELLS = 1 << 22

    def __init__(self, p: Problem, max_goods: int = DEFAULT_MAX_GOODS):
        g = p.num_goods
        if g > max_goods:
            raise ValueError(f"exhaustive menu table needs g <= {max_goods}, got g={g}")
        self.problem = p
        self.num_goods = g
        hist = p.histogram()
        lists = list(hist)
        counts = np.array([hist[lst] for lst in lists], dtype=np.int64)
        n_masks = 1 << g
        served = np.zeros((n_masks, g), dtype=np.int64)
        if lists and g:
            big = g + 1
            ranks = np.full((len(lists), g), big, dtype=np.int64)
            for row, lst in enumerate(lists):
                for pos, good in enumerate(lst):
                    ranks[row, good - 1] = pos
            member = _membership(g)
            chunk = max(1, self._CHUNK_CELLS // max(1, len(lists) * g))
            for start in range(0, n_masks, chunk):
                sub = member[start:start + chunk]
                masked = np.where(sub[None, :, :], ranks[:, None, :], big)
                best = masked.argmin(axis=2)
                hit = masked.min(axis=2) < big
                rows, cols = np.nonzero(hit)
                np.add.at(served, (cols + start, best[rows, cols]), counts[rows])
        self.served = served
        masks = np.arange(n_masks, dtype=np.int64)
        lobby = np.zeros((n_masks, g), dtype=np.int64)
        for j in range(g):
            lobby[:, j] = served[masks | (1 << j), j]
        self.lobby = lobby
        self._member = _membership(g) if g else np.zeros((1, 0), dtype=bool)

    def feasible(self, t: int) -> np.ndarray:
        """Boolean per mask: every offered good serves at least ``t``."""
        return ~np.any(self._member & (self.served < t), axis=1)

    def uncontestable(self, u: int) -> np.ndarray:
        """Boolean per mask: no unoffered good has a lobby of ``u`` or more."""
        return ~np.any(~self._member & (self.lobby >= u), axis=1)

    def stable(self, params: StabilityParams) -> np.ndarray:
        return self.feasible(params.t) & self.uncontestable(params.u)

    def stable_menus(self, params: StabilityParams) -> list[frozenset[int]]:
        ok = self.stable(params)
        return [menu_of(m) for m in canonical_mask_order(self.num_goods) if ok[m]]


def check_gap(p: Problem, params: StabilityParams, k: int, table: MenuTable | None = None) -> bool:
    """True iff every size-k menu is contestable and every size-(k+1) menu is infeasible."""
    g = p.num_goods
    if not 0 <= k < g:
        raise ValueError(f"gap size k must satisfy 0 <= k < g={g}, got {k}")
    table = table if table is not None else MenuTable(p)
    small = masks_of_size(g, k)
    large = masks_of_size(g, k + 1)
    if table.uncontestable(params.u)[small].any():
        return False
    return not table.feasible(params.t)[large].any()

"""Stability-preserving transformations of a problem.

Each reduction returns a :class:`ReductionMap` holding the transformed problem
and the translation of menus in both directions. ``forward`` takes a menu of
the transformed problem to the corresponding menu of the original one;
``backward`` goes the other way and returns None when the original menu has
no counterpart.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from typing import Optional

from .model import AgentGroup, Problem, count_top


@dataclass(frozen=True)
class ReductionMap:
    kind: str
    original: Problem
    reduced: Problem
    labels: tuple[int, ...]  # reduced good k corresponds to original good labels[k-1]
    forced: frozenset[int] = frozenset()  # original goods always offered alongside
    added: Optional[int] = None  # good introduced by the complete embedding

    def forward(self, menu: Iterable[int]) -> frozenset[int]:
        menu = frozenset(menu)
        if self.added is not None:
            if self.added not in menu:
                raise ValueError(f"embedded menu must contain the added good {self.added}")
            return menu - {self.added}
        return frozenset(self.labels[k - 1] for k in menu) | self.forced

    def backward(self, menu: Iterable[int]) -> Optional[frozenset[int]]:
        menu = frozenset(menu)
        if self.added is not None:
            return menu | {self.added}
        if not self.forced <= menu:
            return None
        index = {orig: k for k, orig in enumerate(self.labels, start=1)}
        rest = menu - self.forced
        if not rest <= index.keys():
            return None
        return frozenset(index[j] for j in rest)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "labels": list(self.labels),
            "forced": sorted(self.forced),
            "added": self.added,
            "reduced": self.reduced.to_dict(),
        }


def _relabel(p: Problem, keep: list[int], truncate_at: frozenset[int] = frozenset()) -> tuple[Problem, tuple[int, ...]]:
    index = {orig: k for k, orig in enumerate(keep, start=1)}
    groups = []
    for group in p.groups:
        prefs = []
        for good in group.prefs:
            if good in truncate_at:
                break
            if good in index:
                prefs.append(index[good])
        groups.append(AgentGroup(group.count, tuple(prefs)))
    return Problem(len(keep), tuple(groups)), tuple(keep)


def complete_embedding(p: Problem, u: int) -> ReductionMap:
    """Add good g+1 and ``u`` agents favoring it; every list becomes a full order.

    Original lists are followed by g+1 and then the remaining goods in
    ascending order; the new agents rank g+1 first, then 1..g ascending.
    """
    if u < 1:
        raise ValueError("u must be >= 1")
    g = p.num_goods
    extra = g + 1
    groups = []
    for group in p.groups:
        rest = tuple(j for j in range(1, g + 1) if j not in group.prefs)
        groups.append(AgentGroup(group.count, group.prefs + (extra,) + rest))
    groups.append(AgentGroup(u, (extra,) + tuple(range(1, g + 1))))
    embedded = Problem(extra, tuple(groups))
    return ReductionMap("embed", p, embedded, tuple(range(1, extra + 1)), added=extra)


def reduce_rarely_ranked(p: Problem, t: int) -> ReductionMap:
    """Drop goods ranked (anywhere) by fewer than ``t`` agents."""
    if t < 1:
        raise ValueError("t must be >= 1")
    ranked = {j: 0 for j in p.goods}
    for group in p.groups:
        for good in group.prefs:
            ranked[good] += group.count
    keep = [j for j in p.goods if ranked[j] >= t]
    reduced, labels = _relabel(p, keep)
    return ReductionMap("rare", p, reduced, labels)


def reduce_popular(p: Problem, t: int) -> ReductionMap:
    """Force every good that is the favorite of at least ``t`` agents.

    Lists are cut at their first forced good; the forced good and everything
    ranked below it disappear.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    forced = frozenset(j for j in p.goods if count_top(p, j) >= t)
    keep = [j for j in p.goods if j not in forced]
    reduced, labels = _relabel(p, keep, truncate_at=forced)
    return ReductionMap("popular", p, reduced, labels, forced=forced)

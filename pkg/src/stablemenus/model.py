"""Core types for menu selection problems and the counting primitives.

A problem is stored as a sequence of ``(count, prefs)`` groups rather than
individual agents. Every quantity used by the stability notions depends only
on the multiset of preference lists, so nothing is lost.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any, Optional

# Outside option: an agent whose list meets no offered good is assigned here.
OUTSIDE = None

Menu = frozenset  # frozenset[int] of 1-indexed goods


class ProblemError(ValueError):
    """Raised for malformed instances, preference lists or menus."""


@dataclass(frozen=True)
class AgentGroup:
    count: int
    prefs: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "prefs", tuple(self.prefs))
        if not isinstance(self.count, int) or self.count < 0:
            raise ProblemError(f"group count must be a nonnegative integer, got {self.count!r}")
        if len(set(self.prefs)) != len(self.prefs):
            raise ProblemError(f"duplicate good in preference list {list(self.prefs)}")

    def rank(self, good: int) -> Optional[int]:
        """0-based position of ``good`` in the list, or None when unranked."""
        try:
            return self.prefs.index(good)
        except ValueError:
            return None

    def prefers(self, j: int, k: int) -> bool:
        """True when ``j`` is ranked and beats ``k`` (an unranked ``k`` loses to any ranked good)."""
        rj = self.rank(j)
        if rj is None:
            return False
        rk = self.rank(k)
        return rk is None or rj < rk


@dataclass(frozen=True)
class Problem:
    num_goods: int
    groups: tuple[AgentGroup, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "groups", tuple(self.groups))
        if not isinstance(self.num_goods, int) or self.num_goods < 0:
            raise ProblemError(f"num_goods must be a nonnegative integer, got {self.num_goods!r}")
        for idx, group in enumerate(self.groups):
            for good in group.prefs:
                if not 1 <= good <= self.num_goods:
                    raise ProblemError(
                        f"group {idx}: good {good} out of range 1..{self.num_goods}"
                    )

    @classmethod
    def from_lists(cls, num_goods: int, rows: Iterable[tuple[int, Sequence[int]]]) -> "Problem":
        """Build from ``(count, prefs)`` pairs."""
        return cls(num_goods, tuple(AgentGroup(c, tuple(prefs)) for c, prefs in rows))

    @property
    def goods(self) -> range:
        return range(1, self.num_goods + 1)

    @property
    def n(self) -> int:
        return sum(group.count for group in self.groups)

    def is_complete(self) -> bool:
        return all(len(group.prefs) == self.num_goods for group in self.groups)

    def scaled(self, factor: int) -> "Problem":
        return Problem(self.num_goods, tuple(AgentGroup(g.count * factor, g.prefs) for g in self.groups))

    def histogram(self) -> dict[tuple[int, ...], int]:
        """Multiset of preference lists (zero counts dropped)."""
        hist: dict[tuple[int, ...], int] = {}
        for group in self.groups:
            if group.count:
                hist[group.prefs] = hist.get(group.prefs, 0) + group.count
        return hist

    def to_dict(self) -> dict[str, Any]:
        return {
            "num_goods": self.num_goods,
            "agents": [{"count": g.count, "prefs": list(g.prefs)} for g in self.groups],
        }


@dataclass(frozen=True)
class StabilityParams:
    t: int
    u: int

    def __post_init__(self) -> None:
        if self.t < 1 or self.u < 1:
            raise ValueError(f"stability parameters need t >= 1 and u >= 1, got t={self.t}, u={self.u}")


def make_menu(goods: Iterable[int], num_goods: Optional[int] = None) -> frozenset[int]:
    menu = frozenset(int(j) for j in goods)
    if num_goods is not None:
        bad = sorted(j for j in menu if not 1 <= j <= num_goods)
        if bad:
            raise ProblemError(f"menu goods {bad} out of range 1..{num_goods}")
    return menu


def menu_key(menu: Iterable[int]) -> tuple[int, tuple[int, ...]]:
    """Sort key: size first, then lexicographic on the sorted goods."""
    items = tuple(sorted(menu))
    return len(items), items


def format_menu(menu: Iterable[int]) -> str:
    return "{" + ",".join(str(j) for j in sorted(menu)) + "}"


# -- instance file I/O ------------------------------------------------------


def _check_int(value: Any, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ProblemError(f"{what} must be an integer, got {value!r}")
    return value


def problem_from_dict(data: Mapping[str, Any]) -> Problem:
    if not isinstance(data, Mapping):
        raise ProblemError("instance must be a JSON object")
    if "num_goods" not in data or "agents" not in data:
        raise ProblemError("instance needs fields 'num_goods' and 'agents'")
    g = _check_int(data["num_goods"], "num_goods")
    if g < 1:
        raise ProblemError(f"num_goods must be >= 1, got {g}")
    agents = data["agents"]
    if not isinstance(agents, list):
        raise ProblemError("'agents' must be an array")
    groups = []
    for idx, entry in enumerate(agents):
        if not isinstance(entry, Mapping) or "count" not in entry or "prefs" not in entry:
            raise ProblemError(f"group {idx}: expected object with 'count' and 'prefs'")
        count = _check_int(entry["count"], f"group {idx}: count")
        if count < 0:
            raise ProblemError(f"group {idx}: count must be >= 0, got {count}")
        prefs = entry["prefs"]
        if not isinstance(prefs, list):
            raise ProblemError(f"group {idx}: 'prefs' must be an array")
        prefs = [_check_int(j, f"group {idx}: good") for j in prefs]
        for j in prefs:
            if not 1 <= j <= g:
                raise ProblemError(f"group {idx}: good {j} out of range 1..{g}")
        if len(set(prefs)) != len(prefs):
            raise ProblemError(f"group {idx}: duplicate good in {prefs}")
        groups.append(AgentGroup(count, tuple(prefs)))
    return Problem(g, tuple(groups))


def parse_problem(text: str) -> Problem:
    """Parse the JSON instance format."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"malformed JSON: {exc}") from exc
    return problem_from_dict(data)


def serialize_problem(p: Problem) -> str:
    return json.dumps(p.to_dict(), indent=2) + "\n"


def load_problem(path: str) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


def save_problem(p: Problem, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_problem(p))


# -- counting primitives ----------------------------------------------------


def favorite_in(prefs: Sequence[int], menu: frozenset[int]) -> Optional[int]:
    for good in prefs:
        if good in menu:
            return good
    return OUTSIDE


def assign(p: Problem, o: Iterable[int]) -> dict[int, Optional[int]]:
    """Map each group index to its favorite offered good, or OUTSIDE."""
    menu = frozenset(o)
    return {idx: favorite_in(group.prefs, menu) for idx, group in enumerate(p.groups)}


def count_top(p: Problem, j: int) -> int:
    """Number of agents whose first-ranked good is ``j``."""
    return sum(g.count for g in p.groups if g.prefs and g.prefs[0] == j)


def lobby_size(p: Problem, j: int, o: Iterable[int]) -> int:
    """Agents who rank ``j`` above every good of the menu ``o`` (``j`` not in ``o``)."""
    menu = frozenset(o)
    if j in menu:
        raise ValueError(f"lobby_size needs an unoffered good, {j} is in {format_menu(menu)}")
    return _served(p, j, menu)


def pairwise(p: Problem, j: int, k: int) -> int:
    if j == k:
        raise ValueError("pairwise needs two distinct goods")
    return _served(p, j, frozenset((k,)))


def served_count(p: Problem, j: int, o: Iterable[int]) -> int:
    """Agents assigned to ``j`` when the menu ``o`` (containing ``j``) is offered."""
    menu = frozenset(o)
    if j not in menu:
        raise ValueError(f"served_count needs an offered good, {j} is not in {format_menu(menu)}")
    return _served(p, j, menu - {j})


def _served(p: Problem, j: int, others: frozenset[int]) -> int:
    total = 0
    for group in p.groups:
        for good in group.prefs:
            if good == j:
                total += group.count
                break
            if good in others:
                break
    return total

"""Polyhedral view of stability and its SMT-LIB encoding.

A problem over a fixed universe of preference lists becomes its cohort
vector (how many agents hold each list). For a menu ``O`` the stability
matrix has one row per good: a feasibility row (agents who would be served by
``i``) when ``i`` is offered, an uncontestability row (agents who would lobby
for ``i``) otherwise. ``O`` is (t,u)-stable exactly when every feasibility row
sums to at least ``t`` and every uncontestability row to at most ``u - 1``.

Universe orderings:

* complete: the lexicographic-cyclic order. For g >= 3 entry
  ``(g-1)!*(a-1) + b`` is ``a`` followed by the ``b``-th order of the
  (g-1)-good universe with every good shifted by ``a`` modulo g.
* incomplete: all lists of distinct goods of length 0..g, by length and then
  lexicographically.
"""

from __future__ import annotations

import math
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Optional

import numpy as np

from .model import AgentGroup, Problem, StabilityParams
from .stability import canonical_mask_order, menu_of

SMT_MAX_GOODS = 7


@dataclass(frozen=True)
class PrefUniverse:
    g: int
    complete: bool
    prefs: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.prefs)

    @property
    def index(self) -> dict[tuple[int, ...], int]:
        return _index_of(self)


@lru_cache(maxsize=None)
def _index_of(universe: PrefUniverse) -> dict[tuple[int, ...], int]:
    return {prefs: i for i, prefs in enumerate(universe.prefs)}


@lru_cache(maxsize=None)
def _lex_cyclic(g: int) -> tuple[tuple[int, ...], ...]:
    if g == 1:
        return ((1,),)
    if g == 2:
        return ((1, 2), (2, 1))
    smaller = _lex_cyclic(g - 1)
    out = []
    for first in range(1, g + 1):
        for order in smaller:
            out.append((first,) + tuple((j + first - 1) % g + 1 for j in order))
    return tuple(out)


@lru_cache(maxsize=None)
def pref_universe(g: int, complete: bool) -> PrefUniverse:
    if g < 1:
        raise ValueError("g must be >= 1")
    if complete:
        return PrefUniverse(g, True, _lex_cyclic(g))
    prefs = []
    for length in range(g + 1):
        prefs.extend(permutations(range(1, g + 1), length))
    return PrefUniverse(g, False, tuple(prefs))


def universe_size(g: int, complete: bool) -> int:
    if complete:
        return math.factorial(g)
    return sum(math.factorial(g) // math.factorial(k) for k in range(g + 1))


@dataclass(frozen=True)
class CohortVector:
    universe: PrefUniverse
    counts: tuple[int, ...]

    @property
    def n(self) -> int:
        return sum(self.counts)

    def as_array(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.int64)


def cohort_vector(p: Problem, universe: PrefUniverse) -> CohortVector:
    if p.num_goods != universe.g:
        raise ValueError(f"problem has g={p.num_goods}, universe has g={universe.g}")
    index = universe.index
    counts = [0] * len(universe)
    for idx, group in enumerate(p.groups):
        pos = index.get(group.prefs)
        if pos is None:
            kind = "complete" if universe.complete else "incomplete"
            raise ValueError(f"group {idx}: list {list(group.prefs)} is not in the {kind} universe")
        counts[pos] += group.count
    return CohortVector(universe, tuple(counts))


def problem_from_cohort(x: CohortVector) -> Problem:
    """Inverse of :func:`cohort_vector`: one group per nonzero entry, in universe order."""
    rows = [AgentGroup(c, prefs) for prefs, c in zip(x.universe.prefs, x.counts) if c]
    return Problem(x.universe.g, tuple(rows))


@lru_cache(maxsize=None)
def _rank_matrix(universe: PrefUniverse) -> np.ndarray:
    """rank[i-1, col] = position of good i in list col, or g when unranked."""
    g = universe.g
    rank = np.full((g, len(universe)), g, dtype=np.int64)
    for col, prefs in enumerate(universe.prefs):
        for pos, good in enumerate(prefs):
            rank[good - 1, col] = pos
    rank.setflags(write=False)
    return rank


def matrix_A(o: Iterable[int], universe: PrefUniverse) -> np.ndarray:
    """0/1 stability matrix of menu ``o`` over ``universe`` (rows are goods 1..g).

    Entry (i, col) is 1 when list ``col`` ranks i above every other offered good.
    """
    menu = frozenset(o)
    g = universe.g
    rank = _rank_matrix(universe)
    out = np.zeros((g, len(universe)), dtype=np.int64)
    for i in range(1, g + 1):
        others = [k - 1 for k in menu if k != i]
        best_other = rank[others].min(axis=0) if others else np.full(len(universe), g)
        out[i - 1] = rank[i - 1] < best_other
    return out


@lru_cache(maxsize=4096)
def _matrix_cached(menu: frozenset[int], universe: PrefUniverse) -> np.ndarray:
    mat = matrix_A(menu, universe)
    mat.setflags(write=False)
    return mat


# Stability matrices for g=2 over [1>2, 2>1], keyed by menu.
_BASE_G2 = {
    frozenset(): ((1, 1), (1, 1)),
    frozenset({1}): ((1, 1), (0, 1)),
    frozenset({2}): ((1, 0), (1, 1)),
    frozenset({1, 2}): ((1, 0), (0, 1)),
}


def _cyclic_shift_matrix(g: int, power: int) -> np.ndarray:
    """Permutation matrix sending basis vector e_r to e_{r+power mod g}."""
    out = np.zeros((g, g), dtype=np.int64)
    for r in range(g):
        out[(r + power) % g, r] = 1
    return out


def shift_good(k: int, i: int, g: int) -> int:
    """Index bijection 1..g-1 -> goods other than i: k -> k + i (mod g, valued in 1..g)."""
    return (k + i - 1) % g + 1


def matrix_A_recursive(o: Iterable[int], g: int) -> np.ndarray:
    """Stability matrix over the complete universe built from the g-1 case.

    For every unoffered good i, the column block of lists starting with i
    carries the (g-1)-good matrix of the menu relabeled by k -> k + i (mod g),
    padded with a zero row and rotated so that row k lands on good k + i.
    """
    menu = frozenset(o)
    if g < 2:
        raise ValueError("recurrence needs g >= 2")
    if g == 2:
        return np.array(_BASE_G2[menu], dtype=np.int64)
    block = math.factorial(g - 1)
    out = np.kron(np.eye(g, dtype=np.int64), np.ones((1, block), dtype=np.int64))
    pad = np.vstack([np.zeros((1, g - 1), dtype=np.int64), np.eye(g - 1, dtype=np.int64)])
    for i in range(1, g + 1):
        if i in menu:
            continue
        sub_menu = frozenset(k for k in range(1, g) if shift_good(k, i, g) in menu)
        lifted = _cyclic_shift_matrix(g, i - 1) @ pad @ matrix_A_recursive(sub_menu, g - 1)
        e_i = np.zeros((1, g), dtype=np.int64)
        e_i[0, i - 1] = 1
        out = out + np.kron(e_i, lifted)
    return out


def membership(x: CohortVector, o: Iterable[int], params: StabilityParams) -> bool:
    """Whether the cohort lies in the stability polyhedron of ``o``."""
    menu = frozenset(o)
    a = _matrix_cached(menu, x.universe)
    if a.shape[1] != len(x.counts):
        raise ValueError("cohort vector and matrix dimensions disagree")
    totals = a @ x.as_array()
    for i in range(1, x.universe.g + 1):
        if i in menu:
            if totals[i - 1] < params.t:
                return False
        elif -totals[i - 1] < -(params.u - 1):
            return False
    return True


# -- SMT-LIB ----------------------------------------------------------------


def _sum_expr(cols: Sequence[int]) -> str:
    if not cols:
        return "0"
    if len(cols) == 1:
        return f"x_{cols[0]}"
    return "(+ " + " ".join(f"x_{c}" for c in cols) + ")"


def emit_smtlib(
    g: int,
    complete: bool = False,
    ratio: tuple[int, int] = (1, 2),
    fixed: Optional[tuple[int, int]] = None,
    max_goods: int = SMT_MAX_GOODS,
) -> str:
    """Satisfiable iff some problem on ``g`` goods with a*(u-1) >= b*(t-1) has no stable menu.

    Every menu gets one assertion: a disjunction over goods of the violated
    row (offered good serving at most t-1, or unoffered good lobbied by at
    least u). ``fixed`` pins t and u to constants.
    """
    if g > max_goods:
        raise ValueError(f"SMT emission limited to g <= {max_goods}, got g={g}")
    a, b = ratio
    if a < 1 or b < 1:
        raise ValueError("ratio coefficients must be >= 1")
    universe = pref_universe(g, complete)
    size = len(universe)
    kind = "complete" if complete else "incomplete"
    lines = [
        f"; menu selection covering condition, g={g}, universe={kind} ({size} lists)",
        f"; ratio: {a}*(u-1) >= {b}*(t-1)" + (f"; fixed t={fixed[0]} u={fixed[1]}" if fixed else ""),
        "; sat: a problem with no (t,u)-stable menu exists; unsat: every problem has one",
        "(set-logic QF_LIA)",
    ]
    lines += [f"(declare-fun x_{i} () Int)" for i in range(size)]
    lines += ["(declare-fun t () Int)", "(declare-fun u () Int)"]
    lines += [f"(assert (>= x_{i} 0))" for i in range(size)]
    lines += ["(assert (>= t 1))", "(assert (>= u 1))"]
    lines.append(f"(assert (>= (* {a} (- u 1)) (* {b} (- t 1))))")
    if fixed is not None:
        lines.append(f"(assert (= t {fixed[0]}))")
        lines.append(f"(assert (= u {fixed[1]}))")
    for mask in canonical_mask_order(g):
        menu = menu_of(mask)
        mat = _matrix_cached(menu, universe)
        clauses = []
        for i in range(1, g + 1):
            expr = _sum_expr(list(np.flatnonzero(mat[i - 1])))
            if i in menu:
                clauses.append(f"(<= {expr} (- t 1))")
            else:
                clauses.append(f"(>= {expr} u)")
        label = ",".join(str(j) for j in sorted(menu)) or "none"
        lines.append(f"; menu {{{label}}} is not stable")
        lines.append("(assert (or " + " ".join(clauses) + "))")
    lines += ["(check-sat)", "(get-model)", ""]
    return "\n".join(lines)


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _parse_sexprs(text: str) -> list:
    stack: list[list] = [[]]
    for tok in _TOKEN.findall(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ValueError("unbalanced ')' in model text")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ValueError("unbalanced '(' in model text")
    return stack[0]


def _eval_int(expr) -> int:
    if isinstance(expr, str):
        return int(expr)
    if len(expr) == 2 and expr[0] == "-":
        return -_eval_int(expr[1])
    raise ValueError(f"unsupported value expression {expr!r}")


def parse_model(text: str) -> dict[str, int]:
    """Integer assignments from ``define-fun`` entries of a (get-model) response."""
    values: dict[str, int] = {}

    def walk(node) -> None:
        if not isinstance(node, list):
            return
        if len(node) == 5 and node[0] == "define-fun" and node[2] == [] and node[3] == "Int":
            values[node[1]] = _eval_int(node[4])
            return
        for child in node:
            walk(child)

    try:
        walk(_parse_sexprs(text))
    except (ValueError, IndexError) as exc:
        raise ValueError(f"unparseable model: {exc}") from exc
    return values


def decode_model(model_text: str, universe: PrefUniverse) -> tuple[Problem, StabilityParams]:
    """Turn a solver model back into the problem and (t,u) it describes."""
    values = parse_model(model_text)
    missing = [name for name in ("t", "u") if name not in values]
    missing += [f"x_{i}" for i in range(len(universe)) if f"x_{i}" not in values]
    if missing:
        raise ValueError(f"model does not assign {', '.join(missing[:5])}")
    counts = tuple(values[f"x_{i}"] for i in range(len(universe)))
    if min(counts, default=0) < 0:
        raise ValueError("model assigns a negative agent count")
    x = CohortVector(universe, counts)
    return problem_from_cohort(x), StabilityParams(values["t"], values["u"])

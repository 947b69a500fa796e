import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import check_embedding, check_popular, check_rare, problems
from stablemenus.generators import gen_c4_cycle, gen_random, gen_table1
from stablemenus.model import AgentGroup, Problem, StabilityParams
from stablemenus.reductions import complete_embedding, reduce_popular, reduce_rarely_ranked
from stablemenus.stability import is_stable


def test_embedding_single_agent():
    rmap = complete_embedding(Problem.from_lists(2, [(1, (1,))]), 2)
    assert rmap.reduced == Problem.from_lists(3, [(1, (1, 3, 2)), (2, (3, 1, 2))])
    assert rmap.added == 3


def test_embedding_empty_problem():
    rmap = complete_embedding(Problem(1), 1)
    assert rmap.reduced == Problem.from_lists(2, [(1, (2, 1))])


def test_embedding_table1():
    p = gen_table1(1)
    params = StabilityParams(12, 23)
    rmap = complete_embedding(p, 23)
    assert rmap.reduced.num_goods == 8
    for o in [frozenset(), frozenset({1, 3}), frozenset({2, 4, 6})]:
        assert is_stable(p, o, params).stable == is_stable(rmap.reduced, o | {8}, params).stable


def test_embedding_forward_requires_added_good():
    rmap = complete_embedding(gen_c4_cycle(2), 3)
    assert rmap.forward({1, 5}) == {1}
    assert rmap.backward({1}) == {1, 5}
    with pytest.raises(ValueError):
        rmap.forward({1})
    with pytest.raises(ValueError):
        complete_embedding(gen_c4_cycle(2), 0)


def test_rare_drops_goods():
    p = Problem.from_lists(3, [(2, (1, 3, 2)), (1, (2, 1))])
    rmap = reduce_rarely_ranked(p, 3)
    # goods 1 and 2 are ranked 3 times, good 3 only twice
    assert rmap.labels == (1, 2)
    assert rmap.reduced == Problem.from_lists(2, [(2, (1, 2)), (1, (2, 1))])
    once = Problem.from_lists(3, [(1, (1, 2, 3)), (1, (1, 2))])
    assert 3 not in reduce_rarely_ranked(once, 2).labels


def test_rare_identity_cases():
    p = gen_table1(1)
    rmap = reduce_rarely_ranked(p, 12)
    assert rmap.labels == tuple(range(1, 8))
    assert rmap.reduced == p


def test_rare_relabels_gaps():
    p = Problem.from_lists(4, [(3, (4, 2)), (1, (1, 3))])
    rmap = reduce_rarely_ranked(p, 2)
    assert rmap.labels == (2, 4)
    assert rmap.reduced == Problem.from_lists(2, [(3, (2, 1)), (1, ())])
    assert rmap.forward({2}) == {4}
    assert rmap.backward({1}) is None


def test_popular_forces_and_truncates():
    p = Problem.from_lists(3, [(2, (1, 2)), (1, (2, 1, 3))])
    rmap = reduce_popular(p, 2)
    assert rmap.forced == {1}
    assert rmap.labels == (2, 3)
    assert [g.prefs for g in rmap.reduced.groups] == [(), (1,)]
    assert rmap.forward(frozenset()) == {1}


def test_popular_identity_when_nothing_popular():
    p = gen_c4_cycle(2)
    rmap = reduce_popular(p, 2)
    assert rmap.forced == frozenset()
    assert rmap.reduced == p


def test_popular_fully_forced():
    p = Problem.from_lists(2, [(2, (1, 2)), (2, (2, 1))])
    rmap = reduce_popular(p, 2)
    assert rmap.reduced.num_goods == 0
    assert rmap.forward(frozenset()) == {1, 2}


def test_to_dict():
    d = reduce_popular(Problem.from_lists(2, [(2, (1, 2))]), 2).to_dict()
    assert d["kind"] == "popular" and d["forced"] == [1] and d["labels"] == [2]


@st.composite
def instance_with_params(draw, max_goods=5):
    p = draw(problems(max_goods=max_goods))
    t = draw(st.integers(1, 4))
    u = draw(st.integers(t, t + 4))
    return p, StabilityParams(t, u)


@given(instance_with_params(max_goods=4))
def test_embedding_biconditionals(case):
    check_embedding(*case)


@given(instance_with_params())
def test_rare_biconditional(case):
    check_rare(*case)


@given(instance_with_params())
def test_popular_biconditional(case):
    check_popular(*case)


@given(problems(), st.integers(1, 4))
def test_reductions_idempotent(p, t):
    once = reduce_rarely_ranked(p, t).reduced
    assert reduce_rarely_ranked(once, t).reduced == once
    once = reduce_popular(p, t).reduced
    # a second pass may find new popular goods only among truncated lists; none exist
    assert reduce_popular(once, t).reduced == once


def test_random_biconditionals_sampled():
    rng = random.Random(3)
    for seed in range(150):
        g = rng.randint(1, 5)
        t = rng.randint(1, 4)
        params = StabilityParams(t, rng.randint(t, 2 * t + 1))
        p = gen_random(g, rng.randint(0, 4 * t * g), seed, complete=rng.random() < 0.5)
        check_rare(p, params)
        check_popular(p, params)
        if g <= 4:
            check_embedding(p, params)


def test_zero_count_groups_are_harmless():
    p = Problem(2, (AgentGroup(0, (1,)), AgentGroup(3, (2, 1))))
    assert reduce_rarely_ranked(p, 1).labels == (1, 2)
    assert reduce_popular(p, 1).forced == {2}

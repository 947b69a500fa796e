import itertools

from hypothesis import strategies as st

from stablemenus.model import AgentGroup, Problem


def all_menus(g: int):
    goods = range(1, g + 1)
    for size in range(g + 1):
        for combo in itertools.combinations(goods, size):
            yield frozenset(combo)


@st.composite
def problems(draw, min_goods: int = 1, max_goods: int = 5, max_groups: int = 8, max_count: int = 4, complete=None):
    g = draw(st.integers(min_goods, max_goods))
    groups = []
    for _ in range(draw(st.integers(0, max_groups))):
        perm = draw(st.permutations(list(range(1, g + 1))))
        is_complete = complete if complete is not None else draw(st.booleans())
        length = g if is_complete else draw(st.integers(0, g))
        groups.append(AgentGroup(draw(st.integers(0, max_count)), tuple(perm[:length])))
    return Problem(g, tuple(groups))


# -- reduction biconditionals --------------------------------------------------


def stable_set(p, params):
    from stablemenus.solvers import enumerate_stable

    return set(enumerate_stable(p, params))


def check_embedding(p, params):
    """Every embedded stable menu holds the new good; O stable iff O + new good stable; existence agrees."""
    from stablemenus.reductions import complete_embedding

    rmap = complete_embedding(p, params.u)
    assert rmap.reduced.is_complete()
    original = stable_set(p, params)
    embedded = stable_set(rmap.reduced, params)
    assert all(rmap.added in o for o in embedded)
    for o in all_menus(p.num_goods):
        assert (o in original) == ((o | {rmap.added}) in embedded)
    assert bool(original) == bool(embedded)
    assert {rmap.forward(o) for o in embedded} == original


def check_rare(p, params):
    """O stable for p iff O lies in the kept goods and its relabeling is stable for the reduction."""
    from stablemenus.reductions import reduce_rarely_ranked

    rmap = reduce_rarely_ranked(p, params.t)
    original = stable_set(p, params)
    reduced = stable_set(rmap.reduced, params)
    kept = set(rmap.labels)
    for o in all_menus(p.num_goods):
        back = rmap.backward(o)
        assert (back is not None) == (o <= kept)
        assert (o in original) == (back is not None and back in reduced)
    assert {rmap.forward(o) for o in reduced} == original


def check_popular(p, params):
    """O + forced stable for p iff O stable for the reduction."""
    from stablemenus.reductions import reduce_popular

    rmap = reduce_popular(p, params.t)
    original = stable_set(p, params)
    reduced = stable_set(rmap.reduced, params)
    for o in all_menus(rmap.reduced.num_goods):
        assert (rmap.forward(o) in original) == (o in reduced)
        assert rmap.backward(rmap.forward(o)) == o


# -- published reference data --------------------------------------------------

# Example cycle on four goods: menus visited from the empty menu.
C4_PATH = [(), (1,), (1, 2), (2,), (2, 3), (3,), (3, 4), (4,), (1, 4), (1,)]

# Five-good cohorts: shared greedy cycle from {1,2} and their stable menus.
COHORT_CYCLE = [(1, 2), (1, 2, 3), (2, 3), (2, 3, 4), (3, 4), (3, 4, 5), (4, 5), (1, 4, 5), (1, 5), (1, 2, 5), (1, 2)]
COHORT_A_STABLE = {frozenset(m) for m in [(1, 3), (4, 1), (2, 4), (5, 2), (3, 5)]}
COHORT_B_STABLE = {frozenset(m) for m in [(1, 2, 4), (3, 4, 1), (5, 1, 3), (2, 3, 5), (4, 5, 2)]}


def transcript_menus(steps):
    """Menus visited by a list of greedy steps, starting with the first from_menu."""
    if not steps:
        return []
    return [tuple(sorted(steps[0].from_menu))] + [tuple(sorted(s.to_menu)) for s in steps]


def cyclic_with_noise(seed, goods=(4, 6)):
    """Relabeled cyclic-structure instance plus up to two random agents; greedy often cycles on these."""
    import random

    from stablemenus.generators import gen_random, gen_structured

    rng = random.Random(seed)
    g = rng.randint(*goods)
    t = rng.randint(2, 4)
    perm = list(range(1, g + 1))
    rng.shuffle(perm)
    relabel = dict(zip(range(1, g + 1), perm))
    rows = [(grp.count, tuple(relabel[j] for j in grp.prefs)) for grp in gen_structured(g, t).groups]
    noise = gen_random(g, rng.randint(0, 2), seed, complete=rng.random() < 0.5)
    rows += [(grp.count, grp.prefs) for grp in noise.groups]
    return Problem.from_lists(g, rows), t

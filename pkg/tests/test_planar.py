import time

import pytest
from hypothesis import given
from hypothesis import strategies as st

from arc2rep.planar import (
    BOT,
    TOP,
    CircleDiagram,
    Zero,
    cap_tangle,
    close,
    components,
    cup_tangle,
    closure_edges,
    enumerate_matchings,
    generator_tangle,
    glue,
    identity_tangle,
    matching_caps,
    matching_cups,
    reflect,
    word_layers,
    word_rows,
)

SIDE = ((0, 1), (2, 3))  # two side-by-side arcs
NESTED = ((0, 3), (1, 2))


def test_matching_counts_catalan():
    t0 = time.monotonic()
    counts = [len(enumerate_matchings(r)) for r in range(1, 7)]
    assert counts == [1, 2, 5, 14, 42, 132]
    assert time.monotonic() - t0 < 1.0


def test_matching_order_is_deterministic_and_noncrossing():
    ms = enumerate_matchings(2)
    assert ms == [SIDE, NESTED]
    for r in range(1, 6):
        for m in enumerate_matchings(r):
            flat = sorted(x for p in m for x in p)
            assert flat == list(range(2 * r))
            for a, b in m:
                for c, d in m:
                    assert not (a < c < b < d)


def test_reflect_involution():
    for r in range(0, 4):
        for m in enumerate_matchings(r):
            t = matching_cups(m)
            assert reflect(reflect(t)) == t
            assert reflect(t) == matching_caps(m)


def test_glue_identity_neutral():
    for m in enumerate_matchings(2):
        t = matching_cups(m)
        assert glue(identity_tangle(4), t) == t
    t = cup_tangle(2, 1)
    assert glue(t, identity_tangle(2)) == t
    assert glue(identity_tangle(4), t) == t


def test_glue_closes_circles():
    # nested cups under side-by-side caps: a single zigzag circle
    g = glue(matching_caps(SIDE), matching_cups(NESTED))
    assert (g.bot, g.top, g.pairs) == (0, 0, ())
    assert g.circles == 1
    # matching against itself: one circle per arc
    g2 = glue(matching_caps(SIDE), matching_cups(SIDE))
    assert g2.circles == 2


def test_glue_boundary_mismatch_rejected():
    with pytest.raises(ValueError):
        glue(identity_tangle(2), identity_tangle(4))


def elementary_pool():
    pool = []
    for n in (0, 2, 4):
        pool.append(identity_tangle(n))
        for j in range(n + 1):
            pool.append(cup_tangle(n, j))
        for j in range(n - 1):
            pool.append(cap_tangle(n, j))
    for m in enumerate_matchings(1) + enumerate_matchings(2):
        pool.append(matching_cups(m))
        pool.append(matching_caps(m))
    return pool


def test_glue_associative_on_elementary_triples():
    pool = elementary_pool()
    checked = 0
    for t1 in pool:
        for t2 in pool:
            if t2.top != t1.bot:
                continue
            for t3 in pool:
                if t3.top != t2.bot:
                    continue
                lhs = glue(glue(t1, t2), t3)
                rhs = glue(t1, glue(t2, t3))
                assert lhs == rhs
                checked += 1
    assert checked > 200


def test_close_frozen_examples():
    a, b = SIDE, NESTED
    d = close(a, identity_tangle(4), a)
    assert len(d.circles) == 2 and d.free == 0
    assert d.through((BOT, 0)) == d.through((BOT, 1))
    assert d.through((BOT, 0)) == d.through((TOP, 0))
    assert d.through((BOT, 0)) != d.through((BOT, 2))
    d2 = close(a, identity_tangle(4), b)
    assert len(d2.circles) == 1
    assert len(d2.circles[0]) == 8
    (m1,) = enumerate_matchings(1)
    d3 = close(m1, identity_tangle(2), m1)
    assert d3.count == 1


def test_close_keeps_free_circles():
    t = identity_tangle(2)._replace(circles=3)
    (m1,) = enumerate_matchings(1)
    d = close(m1, t, m1)
    assert d.free == 3 and d.count == 4


def test_components_rejects_odd_degree():
    with pytest.raises(ValueError):
        components([((0, 1), (0, 2)), ((0, 2), (0, 3))])


def test_generator_tangle_cases():
    g = generator_tangle(1, (1, 1))
    assert (g.kind, g.p, g.q) == ("cap", 1, 2)
    assert g.bot_positions == (1, 2) and g.top_positions == ()
    g = generator_tangle(1, (0, 2))
    assert (g.kind, g.p, g.q) == ("cup", 1, 2)
    assert g.bot_positions == () and g.top_positions == (1, 2)
    assert generator_tangle(1, (2, 0)) is Zero
    g = generator_tangle(1, (1, 2))
    assert (g.kind, g.p, g.q) == ("relabel", 1, 2)
    g = generator_tangle(1, (0, 1))
    assert (g.kind, g.p, g.q) == ("relabel", 2, 1)
    g = generator_tangle(-1, (2, 1))
    assert (g.kind, g.p, g.q) == ("relabel", 2, 1)
    assert g.top_weight == (1, 2)
    g = generator_tangle(-2, (0, 2, 0))
    assert (g.kind, g.p, g.q) == ("cup", 2, 3)
    assert g.top_weight == (0, 1, 1)


def test_generator_zero_iff_weight_leaves_range():
    from arc2rep.weights import OutOfRange, apply_root, enumerate_weights

    for lam in enumerate_weights(2, 3):
        for i in (1, -1, 2, -2):
            g = generator_tangle(i, lam)
            assert (g is Zero) == (apply_root(lam, i) is OutOfRange)


def test_word_diagram_single_cap():
    lam = (1, 1)
    layers = word_layers(lam, (1,))
    assert [g.kind for g in layers] == ["cap"]
    assert word_rows(lam, (1,)) == [(1, 2), ()]
    b = enumerate_matchings(1)[0]
    a = enumerate_matchings(0)[0]
    circles = components(closure_edges(lam, layers, b, a))
    assert len(circles) == 1
    assert circles[0] == ((0, 1), (0, 2))


def test_word_diagram_bigon():
    # E_{-1} E_1 on (0,2): cup then cap, a single two-point circle in row 1
    lam = (0, 2)
    layers = word_layers(lam, (-1, 1))
    assert [g.kind for g in layers] == ["cup", "cap"]
    circles = components(closure_edges(lam, layers, (), ()))
    assert len(circles) == 1
    assert circles[0] == ((1, 1), (1, 2))
    assert word_layers((2, 0), (-1, 1)) is Zero


def test_word_rows_threads_weights():
    rows = word_rows((1, 1, 2), (1, 2))
    assert rows == [(1, 2), (1, 3), (2, 3)]


@given(st.integers(min_value=0, max_value=4))
def test_close_of_identity_diagonal_has_r_circles(r):
    for m in enumerate_matchings(r)[:3]:
        d = close(m, identity_tangle(2 * r), m)
        assert len(d.circles) == r or r == 0 and d.count == 0

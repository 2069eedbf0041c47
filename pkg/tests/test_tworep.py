"""Relation-catalog verification on the arc backend."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arc2rep.arcrep import ArcBackend
from arc2rep.exactalg import map_equal
from arc2rep.tworep import (
    FAMILIES,
    RelationInstance,
    RelationVerifier,
    normalize_relation_id,
)
from arc2rep.weights import cartan_pairing, enumerate_weights

BACKEND = ArcBackend()
V = RelationVerifier(BACKEND)


# -- bubbles -----------------------------------------------------------------


def test_undotted_bubble_vanishes_at_pairing_minus_two():
    assert V.bubble(1, (0, 2), 0).map.is_zero()


def test_bubble_with_matching_dots_is_identity():
    ident = BACKEND.identity_2mor((), (0, 2))
    assert map_equal(V.bubble(1, (0, 2), 1).map, ident.map)
    ident = BACKEND.identity_2mor((), (1, 2, 1))
    assert map_equal(V.bubble(1, (1, 2, 1), 0).map, ident.map)


def test_fake_bubble_conventions():
    ident = BACKEND.identity_2mor((), (1, 1))
    assert map_equal(V.fake_bubble(1, (1, 1), -1).map, ident.map)
    below = V.fake_bubble(1, (1, 1), -5)
    assert below.map.is_zero() and below.degree == -8
    solved = V.fake_bubble(1, (2, 0), -2)
    assert solved.map.is_zero() and solved.degree == 2


def test_fake_bubble_delegates_to_real_composite():
    real = V.bubble(-1, (2, 0), 1)
    assert map_equal(V.fake_bubble(-1, (2, 0), 1).map, real.map)


def test_half_bubbles_close_up_to_bubbles():
    cup1, cap1 = V.half_bubbles(1, (0, 2), 1)
    cup0, cap0 = V.half_bubbles(1, (0, 2), 0)
    bub = V.bubble(1, (0, 2), 1)
    assert map_equal(BACKEND.vcompose(cap0, cup1).map, bub.map)
    assert map_equal(BACKEND.vcompose(cap1, cup0).map, bub.map)


def test_half_bubble_degrees_follow_pairing():
    for lam in enumerate_weights(2, 3):
        for i in (1, 2, -1, -2):
            c = cartan_pairing(i, lam)
            for n in (0, 1, 2):
                cup, cap = V.half_bubbles(i, lam, n)
                assert cup.degree == 2 * n + 1 + c
                assert cap.degree == 2 * n + 1 + c


def test_bubble_series_multiplies_to_one():
    for k, n in [(1, 2), (2, 3)]:
        for lam in enumerate_weights(k, n):
            for i in range(1, n):
                assert V.bubble_series_identity(i, lam)
                assert V.bubble_series_identity(-i, lam)


# -- mixed crossings -----------------------------------------------------------


def test_mixed_crossing_inverts_on_adjacent_pair():
    lam = (1, 2, 1)
    fwd = V.mixed_psi(1, -2, lam)
    back = V.mixed_psi(-2, 1, lam)
    ident = BACKEND.identity_2mor((1, -2), lam)
    assert map_equal(BACKEND.vcompose(back, fwd).map, ident.map)


def test_mixed_crossing_far_pair_behaves_like_identity():
    lam = (1, 1, 1, 1)
    fwd = V.mixed_psi(1, -3, lam)
    back = V.mixed_psi(-3, 1, lam)
    ident = BACKEND.identity_2mor((1, -3), lam)
    assert map_equal(BACKEND.vcompose(back, fwd).map, ident.map)


def test_mixed_crossing_through_dead_word_is_zero():
    theta = V.mixed_psi(1, -1, (2, 0))
    assert theta.map.is_zero()


def test_mixed_crossing_needs_opposite_signs():
    with pytest.raises(ValueError):
        V.mixed_psi(1, 2, (1, 1, 2))


def test_mixed_crossings_have_degree_zero():
    for lam in enumerate_weights(2, 3):
        for i in (1, 2, -1, -2):
            for j in (1, 2, -1, -2):
                if i * j < 0:
                    assert V.mixed_psi(i, j, lam).degree == 0


# -- horizontal composition ------------------------------------------------------


def test_identity_is_horizontally_neutral():
    theta = BACKEND.gen_cup(1, (1, 1))
    above = BACKEND.identity_2mor((), theta.src.top)
    below = BACKEND.identity_2mor((), theta.src.bot)
    assert map_equal(V.hcompose(above, theta).map, theta.map)
    assert map_equal(V.hcompose(theta, below).map, theta.map)


def test_interchange_on_generator_pairs():
    pairs, ok = V.interchange_sample(2, 3, target=100)
    assert ok
    assert pairs == 100


# -- single relation instances ------------------------------------------------------


def test_zigzag_instance_is_checked():
    r = V.verify(RelationInstance("1a", (1, 1), (1,)))
    assert r.status == "checked"
    assert r.degree == 0 and r.sign == 1


def test_crossing_square_is_vacuous_where_word_dies():
    r = V.verify(RelationInstance("2a", (1, 1), (1,)))
    assert r.status == "vacuous"


def test_crossing_square_is_checked_where_word_lives():
    r = V.verify(RelationInstance("2a", (0, 2), (1,)))
    assert r.status == "checked"


def test_quadratic_adjacent_instance_is_checked():
    r = V.verify(RelationInstance("3b", (1, 1, 2), (1, 2)))
    assert r.status == "checked"


def test_verifier_reports_honest_failures():
    # an undotted bubble at pairing -1 is the identity, not zero
    r = V.verify(RelationInstance("1c", (1, 2, 1), (1, 0)))
    assert r.status == "failed"
    assert "differ" in r.note


def test_construction_errors_surface_as_failures():
    r = V.verify(RelationInstance("1d", (1, 1), (1,)))
    assert r.status == "failed"
    assert "ValueError" in r.note


# -- suites ------------------------------------------------------------------------


def test_small_suite_passes_with_expected_coverage():
    rep = V.run_suite(1, 2)
    assert not rep.failures()
    counts = rep.counts()
    assert counts == {"checked": 19, "vacuous": 16}
    assert rep.nonvacuous_families() == {
        "1a", "1b", "1c", "1d", "1e", "1f", "2a", "2c", "2d",
    }
    assert rep.interchange_ok


def test_saturated_weight_suite_is_entirely_vacuous():
    rep = V.run_suite(2, 2)
    assert not rep.failures()
    assert rep.counts() == {"vacuous": 10}


def test_medium_suite_exercises_every_live_family():
    rep = V.run_suite(2, 3)
    assert not rep.failures()
    assert len(rep.entries) == 232
    assert rep.counts() == {"checked": 82, "vacuous": 150}
    assert rep.nonvacuous_families() == set(FAMILIES) - {"2b"}
    assert rep.interchange_pairs >= 100 and rep.interchange_ok


def test_parallel_suite_matches_serial_order():
    serial = V.run_suite(1, 2)
    threaded = V.run_suite(1, 2, jobs=4)
    strip = lambda rep: [
        (e.relation, e.lam, e.indices, e.status, e.degree, e.sign)
        for e in rep.entries
    ]
    assert strip(serial) == strip(threaded)


def test_relation_filter_restricts_the_run():
    rep = V.run_suite(1, 2, relations="(1)(d)")
    assert rep.entries
    assert {e.relation for e in rep.entries} == {"1d"}


def test_unknown_relation_ids_are_rejected():
    with pytest.raises(ValueError):
        normalize_relation_id("7q")
    with pytest.raises(ValueError):
        V.run_suite(1, 2, relations="1a,nope")


def test_relation_id_normalization():
    assert normalize_relation_id("(2)(C)") == "2c"
    assert normalize_relation_id(" 3d ") == "3d"
    assert normalize_relation_id("all") == "all"


# -- degree audit ---------------------------------------------------------------------


def test_generator_degrees_match_pairing_formulas():
    records, corrections, ok = V.audit_generator_degrees(2, 3)
    assert ok
    assert corrections == {}
    assert all(r["ok"] for r in records)


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(enumerate_weights(2, 3)),
    st.sampled_from([1, 2, -1, -2]),
    st.integers(min_value=0, max_value=3),
)
def test_dot_powers_are_even_degree_endomorphisms(lam, i, n):
    theta = V.dot_power(i, lam, n)
    assert theta.degree == 2 * n
    assert theta.src is theta.tgt

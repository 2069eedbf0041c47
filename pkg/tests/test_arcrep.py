import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arc2rep.arcrep import ArcBackend, TwoMorphism
from arc2rep.exactalg import F2, GradedMap, LaurentPoly, graded_dim, map_equal
from arc2rep.weights import cartan_pairing, enumerate_weights


@pytest.fixture(scope="module")
def be():
    return ArcBackend()


def test_fmodule_of_e_then_f_on_highest_weight(be):
    # E then F on the n=2 highest weight: two copies of the identity,
    # one shifted up and one down
    B = be.word_bimodule((-1, 1), (0, 2))
    I = be.word_bimodule((), (0, 2))
    assert graded_dim(B.space) == LaurentPoly({-1: 1, 1: 1}) * graded_dim(I.space)


def test_double_e_dies_on_middle_weight(be):
    assert be.word_bimodule((1, 1), (1, 1)).is_zero()
    assert be.word_bimodule((1,), (2, 0)).is_zero()
    assert be.word_bimodule((-1,), (0, 2)).is_zero()


def test_psi_ii_kills_units_and_strips_dots(be):
    # on E_1 E_1 of (0,2): ψ(1 ⊗ b) = 0 and ψ(x ⊗ b) = 1 ⊗ b, where the
    # first tensor factor is the top letter's bigon circle
    t = be.gen_psi(1, 1, (0, 2))
    assert t.degree == -2
    B = t.src
    assert B.space.total_dim == 2
    u1, ux = (0, 0, (0,)), (0, 0, (1,))
    comp = t.map @ B.project
    assert not any(comp.column(*B.ambient.index((u1, u1))))
    assert comp.column(*B.ambient.index((ux, u1))) == B.project.column(
        *B.ambient.index((u1, u1))
    )
    # balancing identifies the two one-dot classes and kills the two-dot one
    assert B.project.column(*B.ambient.index((u1, ux))) == B.project.column(
        *B.ambient.index((ux, u1))
    )
    assert not any(B.project.column(*B.ambient.index((ux, ux))))


def test_dot_squares_to_zero(be):
    for i, lam in [(1, (0, 2)), (-1, (2, 0)), (2, (0, 1, 1)), (1, (1, 1, 2))]:
        t = be.gen_y(i, lam)
        assert t.degree == 2
        assert be.vcompose(t, t).map.is_zero()


def test_generator_degrees_match_the_pairing(be):
    for lam in enumerate_weights(1, 2) + enumerate_weights(1, 3):
        n = len(lam)
        for i in list(range(1, n)) + [-j for j in range(1, n)]:
            c = be.gen_cup(i, lam)
            assert c.degree == 1 + cartan_pairing(i, lam)
            cap = be.gen_cap(i, lam)
            assert cap.degree == 1 + cartan_pairing(i, lam)
            assert be.gen_y(i, lam).degree == 2
            assert be.gen_psi(i, i, lam).degree == -2
        for i in range(1, n):
            for j in range(1, n):
                if i != j:
                    expect = 1 if abs(i - j) == 1 else 0
                    assert be.gen_psi(i, j, lam).degree == expect


def test_generators_are_bimodule_maps(be):
    for lam in enumerate_weights(1, 3):
        n = len(lam)
        signed = list(range(1, n)) + [-j for j in range(1, n)]
        for i in signed:
            assert be.check_bimodule_map(be.gen_y(i, lam))
            assert be.check_bimodule_map(be.gen_cup(i, lam))
            assert be.check_bimodule_map(be.gen_cap(i, lam))
            for j in signed:
                if i * j > 0:
                    assert be.check_bimodule_map(be.gen_psi(i, j, lam))


def test_corrupted_map_fails_the_check(be):
    B = be.word_bimodule((1,), (0, 2))
    # κ-like map on a single strand is not equivariant: it drops the dot
    # that the algebra can still add
    bad = GradedMap.from_entries(
        F2, B.space, B.space, -2, {((0, 0, (1,)), (0, 0, (0,))): 1}
    )
    assert not be.check_bimodule_map(TwoMorphism(B, B, bad))


def test_zero_morphism_passes_the_check(be):
    src = be.word_bimodule((1, 1), (0, 2))
    t = be.zero_2mor(src, src, 3)
    assert be.check_bimodule_map(t)


def test_whisker_with_empty_words_is_identity(be):
    t = be.gen_y(1, (0, 2))
    assert be.whisker((), t, ()) is t


def test_whiskered_generators_stay_bimodule_maps(be):
    t = be.gen_y(1, (0, 2))
    w = be.whisker((1,), t, ())
    assert w.src.word == (1, 1) and be.check_bimodule_map(w)
    w2 = be.whisker((), be.gen_y(1, (1, 1)), (1,))
    assert w2.src.word == (1, 1) and be.check_bimodule_map(w2)
    w3 = be.whisker((-1,), be.gen_y(1, (0, 2)), ())
    assert be.check_bimodule_map(w3)


def test_zigzag_identities(be):
    cases = [
        (1, (0, 2), (1, 1)),
        (-1, (2, 0), (1, 1)),
        (2, (1, 0, 1), (1, 1, 0)),
        (2, (1, 1, 0), (1, 2, -1)),  # E_2 vanishes here: zero == zero
    ]
    for i, lam, lam_up in cases:
        ident = be.identity_2mor((i,), lam)
        first = be.vcompose(
            be.whisker((), be.gen_cap(-i, lam_up), (i,)),
            be.whisker((i,), be.gen_cup(i, lam), ()),
        )
        assert map_equal(first.map, ident.map)
        second = be.vcompose(
            be.whisker((i,), be.gen_cap(i, lam), ()),
            be.whisker((), be.gen_cup(-i, lam_up), (i,)),
        )
        assert map_equal(second.map, ident.map)


def test_nilhecke_relation_instance(be):
    lam, lam_up, i = (0, 2), (1, 1), 1
    psi = be.gen_psi(i, i, lam)
    dot_right = be.whisker((i,), be.gen_y(i, lam), ())
    dot_left = be.whisker((), be.gen_y(i, lam_up), (i,))
    ident = be.identity_2mor((i, i), lam)
    lhs = be.vcompose(psi, dot_left).map + be.vcompose(dot_right, psi).map
    assert map_equal(lhs, ident.map)
    assert be.vcompose(psi, psi).map.is_zero()


def test_flattening_matches_direct_closure_dimensions(be):
    words = [
        ((1,), (0, 2)),
        ((-1, 1), (0, 2)),
        ((1, 1), (0, 2)),
        ((1, -1), (1, 1)),
        ((1, 2), (0, 1, 1)),
        ((2, 1), (0, 1, 1)),
        ((-1, 1, 1), (0, 2)),
        ((1, 1, -1), (1, 1)),
        ((2, 1, -2), (1, 0, 1)),
    ]
    for w, lam in words:
        assert be.summand_gdims_match_geometry(w, lam)


def test_comparison_iso_is_invertible_on_longer_words(be):
    # χ must invert degreewise; building its inverse raises otherwise
    for w, lam in [((-1, 1), (0, 2)), ((1, 1), (0, 2)), ((2, 1), (0, 1, 1)),
                   ((-1, 1, 1), (0, 2)), ((1, -1, 1), (0, 2))]:
        chi = be.chi(w, lam)
        inv = be.chi_inv(w, lam)
        ident = GradedMap.identity(F2, chi.src)
        assert map_equal(inv @ chi, ident)


def test_splitting_iso_roundtrips(be):
    for v, z, lam in [((1,), (1,), (0, 2)), ((-1,), (1, 1), (0, 2)),
                      ((1, -1), (1,), (0, 2)), ((2,), (1,), (0, 1, 1))]:
        c = be.cmp(v, z, lam)
        cinv = be.cmp_inv(v, z, lam)
        ident = GradedMap.identity(F2, c.src)
        assert map_equal(cinv @ c, ident)


def test_actions_respect_multiplication_on_a_leaf(be):
    B = be.word_bimodule((1,), (1, 1, 0))
    alg = be.algebra(B.top)
    labels = [l for d in alg.space.degrees for l in alg.space.labels(d)]
    for h1 in labels:
        for h2 in labels:
            lhs = B.act_left(h1) @ B.act_left(h2)
            prod = alg.multiply_basis(h1, h2)
            rhs = GradedMap.zero(F2, B.space, B.space, lhs.offset)
            for z, c in prod.items():
                rhs = rhs + B.act_left(z).scale(c)
            assert map_equal(lhs, rhs)


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(enumerate_weights(2, 3)),
    st.sampled_from([1, 2, -1, -2]),
)
def test_cups_and_caps_are_equivariant_everywhere(lam, i):
    be = _shared_backend()
    assert be.check_bimodule_map(be.gen_cup(i, lam))
    assert be.check_bimodule_map(be.gen_cap(i, lam))


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(enumerate_weights(2, 3)),
    st.sampled_from([(1, 2), (2, 1), (1, 1), (2, 2), (-1, -2), (-2, -1)]),
)
def test_crossings_are_equivariant_everywhere(lam, ij):
    be = _shared_backend()
    assert be.check_bimodule_map(be.gen_psi(ij[0], ij[1], lam))


_BE = None


def _shared_backend():
    global _BE
    if _BE is None:
        _BE = ArcBackend()
    return _BE

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from arc2rep.exactalg import (
    F2,
    QQ,
    GradedMap,
    GradedSpace,
    LaurentPoly,
    MapShapeError,
    graded_dim,
    map_equal,
    qint,
    quotient_with_section,
)


def frob_algebra() -> GradedSpace:
    # k[x]/x^2 with deg(1) = -1, deg(x) = +1
    return GradedSpace({-1: ("1",), 1: ("x",)})


def test_graded_dim_of_frobenius_algebra():
    assert graded_dim(frob_algebra()) == LaurentPoly({-1: 1, 1: 1})


@pytest.mark.parametrize("s", range(-4, 5))
def test_shift_multiplies_graded_dim_by_power_of_q(s):
    v = frob_algebra()
    assert graded_dim(v.shifted(s)) == LaurentPoly.q(s) * graded_dim(v)
    assert v.shifted(s).shift == s


def test_shift_composes():
    v = frob_algebra()
    assert v.shifted(2).shifted(-2) == v


@pytest.mark.parametrize("field", [F2, QQ])
def test_quotient_no_relations_is_identity(field):
    v = frob_algebra()
    q, proj, sect = quotient_with_section(field, v, [])
    assert q == v
    assert proj.equal(GradedMap.identity(field, v))
    assert sect.equal(GradedMap.identity(field, v))


@pytest.mark.parametrize("field", [F2, QQ])
def test_quotient_identifying_two_lines(field):
    v = GradedSpace({0: ("e1", "e2")})
    # e1 - e2 = 0  (over F2 the same vector reads e1 + e2)
    q, proj, sect = quotient_with_section(field, v, [(0, [1, -1])])
    assert q.total_dim == 1
    # both ambient basis vectors project to the class of the non-pivot label
    assert proj.column(0, 0) == proj.column(0, 1)
    assert (proj @ sect).equal(GradedMap.identity(field, q))


@pytest.mark.parametrize("field", [F2, QQ])
def test_quotient_of_square_by_symmetry(field):
    # A ⊗ A with the relation x⊗1 - 1⊗x, degrees -2, 0, 0, 2
    v = GradedSpace({-2: ("11",), 0: ("x1", "1x"), 2: ("xx",)})
    q, proj, sect = quotient_with_section(field, v, [(0, [1, -1])])
    assert [q.dim(d) for d in (-2, 0, 2)] == [1, 1, 1]
    assert (proj @ sect).equal(GradedMap.identity(field, q))
    # section of the surviving class reduces to itself under project
    img = sect.column(0, 0)
    assert sum(1 for c in img if c != 0) == 1


def test_quotient_rejects_wrong_length_relation():
    with pytest.raises(ValueError):
        quotient_with_section(F2, frob_algebra(), [(1, [1, 0])])


@pytest.mark.parametrize("field", [F2, QQ])
def test_map_compose_respects_degree(field):
    a = frob_algebra()
    # multiplication-by-x style map: deg +2, sends 1 -> x
    f = GradedMap.from_entries(field, a, a, 2, {("1", "x"): 1})
    assert f.offset == 2
    ff = f @ f
    assert ff.is_zero()


def test_f2_map_is_its_own_negative():
    a = frob_algebra()
    f = GradedMap.from_entries(F2, a, a, 2, {("1", "x"): 1})
    assert (f + f).is_zero()
    assert map_equal(f.scale(3), f)


def test_map_equal_rejects_space_mismatch():
    a = frob_algebra()
    b = GradedSpace({0: ("y",)})
    f = GradedMap.zero(F2, a, a)
    g = GradedMap.zero(F2, a, b)
    with pytest.raises(MapShapeError):
        map_equal(f, g)


def test_map_equal_rejects_degree_mismatch_but_tolerates_zero():
    a = frob_algebra()
    f = GradedMap.from_entries(F2, a, a, 2, {("1", "x"): 1})
    g = GradedMap.identity(F2, a)
    with pytest.raises(MapShapeError):
        map_equal(f, g)
    z = GradedMap.zero(F2, a, a, 5)
    assert not map_equal(f, z)
    assert map_equal(z, f - f)


def test_from_entries_rejects_inhomogeneous_entry():
    a = frob_algebra()
    with pytest.raises(MapShapeError):
        GradedMap.from_entries(F2, a, a, 0, {("1", "x"): 1})


def test_qq_exactness_no_float_creep():
    v = GradedSpace({0: ("a", "b", "c")})
    rel = [(0, [Fraction(1, 3), Fraction(-1, 6), 0])]
    q, proj, _ = quotient_with_section(QQ, v, rel)
    assert q.total_dim == 2
    col = proj.column(0, 0)
    assert all(isinstance(c, Fraction) for c in col)


# --- Laurent polynomials ----------------------------------------------------


def test_laurent_basics():
    p = LaurentPoly.q(1) + LaurentPoly.q(-1)
    assert p == qint(2)
    assert p.bar() == p
    assert p.at_one() == 2
    assert (p * p) == LaurentPoly({-2: 1, 0: 2, 2: 1})


def test_qint_values():
    assert qint(0).is_zero()
    assert qint(1) == LaurentPoly.one()
    assert qint(3) == LaurentPoly({-2: 1, 0: 1, 2: 1})
    assert qint(-2) == -qint(2)


def test_exact_div_recovers_factor():
    p = qint(2) * qint(3)
    assert p.exact_div(qint(3)) == qint(2)
    assert p.exact_div(qint(2)) == qint(3)


def test_exact_div_rejects_inexact():
    with pytest.raises(ValueError):
        (qint(2) + 1).exact_div(qint(2))


scalars = st.integers(min_value=-4, max_value=4)
polys = st.dictionaries(
    st.integers(min_value=-5, max_value=5), scalars, max_size=5
).map(LaurentPoly)


@given(polys, polys, polys)
def test_laurent_ring_axioms(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a + b == b + a
    assert a - a == LaurentPoly.zero()


@given(polys, polys)
def test_bar_is_ring_involution(a, b):
    assert (a * b).bar() == a.bar() * b.bar()
    assert a.bar().bar() == a


@given(polys, polys)
def test_exact_div_inverts_multiplication(a, b):
    if not b.is_zero():
        assert (a * b).exact_div(b) == a

from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from arc2rep.weights import (
    OutOfRange,
    apply_root,
    cartan_pairing,
    enumerate_weights,
    gamma,
    weight_sequence,
    word_content,
)


def brute_count(k, n):
    # coefficient of z^{2k} in (1 + z + z^2)^n
    coeffs = [1]
    for _ in range(n):
        nxt = [0] * (len(coeffs) + 2)
        for e, c in enumerate(coeffs):
            for d in range(3):
                nxt[e + d] += c
        coeffs = nxt
    return coeffs[2 * k] if 2 * k < len(coeffs) else 0


def test_enumerate_small_cases():
    assert enumerate_weights(1, 2) == [(0, 2), (1, 1), (2, 0)]
    assert enumerate_weights(2, 2) == [(2, 2)]
    assert len(enumerate_weights(2, 3)) == 6
    assert len(enumerate_weights(2, 4)) == 19
    assert enumerate_weights(3, 2) == []


@pytest.mark.parametrize("k,n", [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4), (3, 5)])
def test_enumeration_matches_generating_function(k, n):
    ws = enumerate_weights(k, n)
    assert len(ws) == brute_count(k, n)
    assert ws == sorted(ws)
    assert all(sum(w) == 2 * k for w in ws)


def test_gamma():
    assert gamma((2, 2)) == 0
    assert gamma((1, 1)) == 1
    assert gamma((1, 1, 1, 1)) == 2
    with pytest.raises(ValueError):
        gamma((1, 0))


def test_cartan_pairing_values():
    assert cartan_pairing(1, (1, 1)) == 0
    assert cartan_pairing(1, (0, 2)) == -2
    assert cartan_pairing(-1, (0, 2)) == 2
    assert cartan_pairing(2, (2, 1, 0)) == 1


def test_apply_root_values():
    assert apply_root((1, 1), 1) == (2, 0)
    assert apply_root((2, 0), 1) is OutOfRange
    assert apply_root((0, 2), -1) is OutOfRange
    assert apply_root((0, 1, 2, 1), 2) == (0, 2, 1, 1)


def test_word_content():
    assert word_content(()) == {}
    assert word_content((1, -1)) == {}
    assert word_content((1, 2, 1)) == {1: 2, 2: 1}
    assert word_content((-3, 1, 3)) == {1: 1}


def test_weight_sequence_rightmost_first():
    seq = weight_sequence((1, 1, 2), (1, 2))
    # letter 2 acts first: (1,1,2) -> (1,2,1) -> then letter 1 -> (2,1,1)
    assert seq == [(1, 1, 2), (1, 2, 1), (2, 1, 1)]
    assert weight_sequence((2, 0), (1,)) is OutOfRange


signed = st.integers(min_value=-3, max_value=3).filter(lambda i: i != 0)
weights4 = st.sampled_from(enumerate_weights(2, 4))


@given(weights4, signed)
def test_pairing_shifts_by_two_along_its_root(lam, i):
    nxt = apply_root(lam, i)
    if nxt is not OutOfRange:
        assert cartan_pairing(i, nxt) == cartan_pairing(i, lam) + 2


@given(weights4, signed)
def test_apply_root_inverse(lam, i):
    nxt = apply_root(lam, i)
    if nxt is not OutOfRange:
        assert apply_root(nxt, -i) == lam


@given(weights4, signed, signed)
def test_pairing_linearity_across_other_roots(lam, i, j):
    nxt = apply_root(lam, j)
    if nxt is not OutOfRange:
        # (α_i, λ + α_j) − (α_i, λ) is the Cartan integer ⟨α_i, α_j⟩
        diff = cartan_pairing(i, nxt) - cartan_pairing(i, lam)
        si, sj = (1 if i > 0 else -1), (1 if j > 0 else -1)
        ai, aj = abs(i), abs(j)
        expected = {0: 2, 1: -1}.get(abs(ai - aj), 0) * si * sj
        assert diff == expected


def test_out_of_range_is_falsy_singleton():
    assert not OutOfRange
    assert apply_root((2, 0), 1) is apply_root((0, 2), -1)

"""Weight combinatorics for the level-two representation V_{2ω_k} of sl(n).

Weights are plain tuples over {0,1,2} of length n summing to 2k.  Signed
indices i ∈ {±1,…,±(n−1)} name the simple roots α_i and their negatives
(α_{−i} = −α_i).  Words are tuples of signed indices, read right to left
when acting on weights.
"""

from __future__ import annotations

from itertools import product

Weight = tuple[int, ...]
Word = tuple[int, ...]


class _OutOfRange:
    """Sentinel for a weight pushed outside {0,1,2}^n (a zero functor)."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "OutOfRange"

    def __bool__(self) -> bool:
        return False


OutOfRange = _OutOfRange()


def enumerate_weights(k: int, n: int) -> list[Weight]:
    """All weights of V_{2ω_k} as {0,1,2}-sequences, lexicographically."""
    if 2 * k > 2 * n:
        return []
    return [w for w in product((0, 1, 2), repeat=n) if sum(w) == 2 * k]


def gamma(lam: Weight) -> int:
    """Half the number of 1-entries (the active arc count γ(λ))."""
    ones = sum(1 for x in lam if x == 1)
    if ones % 2:
        raise ValueError(f"odd number of 1-entries in {lam}")
    return ones // 2


def cartan_pairing(i: int, lam: Weight) -> int:
    """The pairing (α_i, λ) = sgn(i)·(λ_{|i|} − λ_{|i|+1})."""
    m = abs(i)
    if not 1 <= m < len(lam):
        raise ValueError(f"index {i} out of range for n={len(lam)}")
    sgn = 1 if i > 0 else -1
    return sgn * (lam[m - 1] - lam[m])


def apply_root(lam: Weight, i: int):
    """λ + α_i, or OutOfRange when an entry would leave {0,1,2}."""
    m = abs(i)
    if not 1 <= m < len(lam):
        raise ValueError(f"index {i} out of range for n={len(lam)}")
    sgn = 1 if i > 0 else -1
    a, b = lam[m - 1] + sgn, lam[m] - sgn
    if a not in (0, 1, 2) or b not in (0, 1, 2):
        return OutOfRange
    return lam[: m - 1] + (a, b) + lam[m + 1 :]


def word_content(w: Word) -> dict[int, int]:
    """Net root content {i: #i − #(−i)} over positive indices, zeros dropped."""
    out: dict[int, int] = {}
    for i in w:
        out[abs(i)] = out.get(abs(i), 0) + (1 if i > 0 else -1)
    return {i: c for i, c in out.items() if c}


def weight_sequence(lam: Weight, w: Word):
    """Weights met when the word acts on λ, bottom-up.

    The word (w_1,…,w_m) acts rightmost letter first, so the result is
    [λ, λ+α_{w_m}, …] with m+1 entries, or OutOfRange if any step leaves
    the weight set.
    """
    seq = [lam]
    for i in reversed(w):
        nxt = apply_root(seq[-1], i)
        if nxt is OutOfRange:
            return OutOfRange
        seq.append(nxt)
    return seq

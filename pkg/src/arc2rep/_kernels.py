"""Dense GF(2) matrix kernels.

Matrices are numpy uint8 arrays holding 0/1 entries.  The numba-jitted
kernels are used when numba imports cleanly; set ``ARC2REP_NO_NUMBA=1``
to force the pure-numpy fallbacks (identical results, slower on large
blocks).  ``python -m arc2rep.bench`` times one path against the other.
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("ARC2REP_NO_NUMBA", "").lower() not in ("1", "true", "yes")
if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - exercised via the env flag instead
        USE_NUMBA = False


def _matmul_np(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Entries are 0/1 and inner dimensions stay far below 2**62, so an
    # int64 accumulator cannot overflow before the mod-2 reduction.
    return ((a.astype(np.int64) @ b.astype(np.int64)) & 1).astype(np.uint8)


def _rref_np(a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2); returns (matrix, pivot columns)."""
    m = a.copy()
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.nonzero(m[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            m[[r, p]] = m[[p, r]]
        for q in np.nonzero(m[:, c])[0]:
            if q != r:
                m[q, :] ^= m[r, :]
        pivots.append(c)
        r += 1
    return m, pivots


if USE_NUMBA:

    @njit(cache=True)
    def _matmul_nb(a, b):  # pragma: no cover - compiled
        n, k = a.shape
        m = b.shape[1]
        out = np.zeros((n, m), dtype=np.uint8)
        for i in range(n):
            for t in range(k):
                if a[i, t]:
                    for j in range(m):
                        out[i, j] ^= b[t, j]
        return out

    @njit(cache=True)
    def _rref_nb(m):  # pragma: no cover - compiled
        rows, cols = m.shape
        piv = np.empty(cols if cols < rows else rows, dtype=np.int64)
        r = 0
        for c in range(cols):
            if r == rows:
                break
            p = -1
            for i in range(r, rows):
                if m[i, c]:
                    p = i
                    break
            if p < 0:
                continue
            if p != r:
                for j in range(cols):
                    tmp = m[r, j]
                    m[r, j] = m[p, j]
                    m[p, j] = tmp
            for q in range(rows):
                if q != r and m[q, c]:
                    for j in range(cols):
                        m[q, j] ^= m[r, j]
            piv[r] = c
            r += 1
        return piv[:r]


def f2_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product over GF(2)."""
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    if USE_NUMBA:
        return _matmul_nb(np.ascontiguousarray(a), np.ascontiguousarray(b))
    return _matmul_np(a, b)


def f2_rref(a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2); returns (matrix, pivot columns)."""
    if USE_NUMBA:
        m = np.ascontiguousarray(a.copy())
        piv = _rref_nb(m)
        return m, [int(c) for c in piv]
    return _rref_np(a)

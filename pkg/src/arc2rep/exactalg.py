"""Exact scalars, graded vector spaces, graded maps, Laurent polynomials.

Two scalar modes, one per backend: the two-element field (numpy uint8
matrices, kernels in :mod:`arc2rep._kernels`) and exact rationals (integer
numerator matrices with one common denominator, int64 when entries fit and
arbitrary-precision otherwise).  No floating point anywhere.

Grading conventions: a :class:`GradedSpace` stores its basis labels per
*true* (already shifted) integer degree and remembers the shift that was
applied; a :class:`GradedMap` of degree ``d`` sends the source's degree-``t``
slice into the target's degree-``t+d`` slice.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Any, Hashable, Iterable, Sequence

import numpy as np

from ._kernels import f2_matmul, f2_rref


class MapShapeError(ValueError):
    """Raised when two graded maps cannot legally be compared or composed."""


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------


class F2Field:
    """GF(2) matrices as numpy uint8 arrays."""

    name = "f2"
    char = 2

    def coeff(self, c) -> int:
        return int(c) % 2

    def zeros(self, rows: int, cols: int):
        return np.zeros((rows, cols), dtype=np.uint8)

    def eye(self, n: int):
        return np.eye(n, dtype=np.uint8)

    def from_rows(self, rows: Sequence[Sequence[int]], cols: int | None = None):
        if not rows:
            return np.zeros((0, cols or 0), dtype=np.uint8)
        return (np.array(rows, dtype=np.int64) % 2).astype(np.uint8)

    def matmul(self, a, b):
        return f2_matmul(a, b)

    def add(self, a, b):
        return a ^ b

    def sub(self, a, b):
        return a ^ b

    def neg(self, a):
        return a

    def scale(self, c, a):
        return a if self.coeff(c) else np.zeros_like(a)

    def eq(self, a, b) -> bool:
        return a.shape == b.shape and bool(np.array_equal(a, b))

    def is_zero(self, a) -> bool:
        return not a.any()

    def rref(self, a):
        return f2_rref(a)

    def hstack(self, a, b):
        return np.concatenate([a, b], axis=1)

    def copy(self, a):
        return a.copy()

    def set_entry(self, a, i, j, c):
        a[i, j] = self.coeff(c)

    def entry(self, a, i, j):
        return int(a[i, j])


class QQField:
    """Exact rational matrices as tuples of tuples of Fractions."""

    name = "q"
    char = 0

    def coeff(self, c) -> Fraction:
        return Fraction(c)

    def zeros(self, rows: int, cols: int):
        return tuple(tuple(Fraction(0) for _ in range(cols)) for _ in range(rows))

    def eye(self, n: int):
        return tuple(
            tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n)
        )

    def from_rows(self, rows: Sequence[Sequence[Any]], cols: int | None = None):
        if not rows:
            return self.zeros(0, cols or 0)
        return tuple(tuple(Fraction(c) for c in row) for row in rows)

    def matmul(self, a, b):
        if (len(a[0]) if a else 0) != len(b):
            raise ValueError("shape mismatch")
        if not a or not b or not b[0]:
            width = len(b[0]) if b else 0
            return tuple(tuple(Fraction(0) for _ in range(width)) for _ in a)
        # run the inner products over scaled integers, divide out at the end
        da = 1
        for row in a:
            for x in row:
                d = x.denominator
                if d != 1:
                    da = da * d // gcd(da, d)
        db = 1
        for row in b:
            for x in row:
                d = x.denominator
                if d != 1:
                    db = db * d // gcd(db, d)
        ai = (
            [[x.numerator for x in row] for row in a]
            if da == 1
            else [[int(x * da) for x in row] for row in a]
        )
        bt = list(zip(*b))
        bi = (
            [[x.numerator for x in col] for col in bt]
            if db == 1
            else [[int(x * db) for x in col] for col in bt]
        )
        den = da * db
        if den == 1:
            return tuple(
                tuple(Fraction(sum(x * y for x, y in zip(row, col))) for col in bi)
                for row in ai
            )
        return tuple(
            tuple(Fraction(sum(x * y for x, y in zip(row, col)), den) for col in bi)
            for row in ai
        )

    def add(self, a, b):
        return tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(a, b))

    def sub(self, a, b):
        return tuple(tuple(x - y for x, y in zip(r, s)) for r, s in zip(a, b))

    def neg(self, a):
        return tuple(tuple(-x for x in r) for r in a)

    def scale(self, c, a):
        c = Fraction(c)
        return tuple(tuple(c * x for x in r) for r in a)

    def eq(self, a, b) -> bool:
        return a == b

    def is_zero(self, a) -> bool:
        return all(x == 0 for r in a for x in r)

    def rref(self, a):
        """Reduced row echelon form; returns (matrix, pivot columns).

        Elimination runs fraction-free over scaled integer rows (gcd
        normalization after each combination); the result is the canonical
        RREF either way, so only the arithmetic cost differs.
        """
        rows = len(a)
        cols = len(a[0]) if rows else 0
        m = []
        for row in a:
            den = 1
            for x in row:
                d = x.denominator if isinstance(x, Fraction) else 1
                den = den * d // gcd(den, d)
            ints = [int(x * den) for x in row]
            g = 0
            for x in ints:
                if x:
                    g = gcd(g, x)
                    if g == 1:
                        break
            if g > 1:
                ints = [x // g for x in ints]
            m.append(ints)
        pivots: list[int] = []
        r = 0
        for c in range(cols):
            if r == rows:
                break
            p = next((i for i in range(r, rows) if m[i][c]), None)
            if p is None:
                continue
            m[r], m[p] = m[p], m[r]
            prow = m[r]
            pv = prow[c]
            for q in range(rows):
                f = m[q][c]
                if q == r or not f:
                    continue
                new = [pv * x - f * y for x, y in zip(m[q], prow)]
                g = 0
                for x in new:
                    if x:
                        g = gcd(g, x)
                        if g == 1:
                            break
                if g > 1:
                    new = [x // g for x in new]
                m[q] = new
            pivots.append(c)
            r += 1
        out = []
        for i, row in enumerate(m):
            if i < len(pivots):
                pv = row[pivots[i]]
                out.append(tuple(Fraction(x, pv) for x in row))
            else:
                out.append(tuple(Fraction(x) for x in row))
        return tuple(out), pivots

    def hstack(self, a, b):
        return tuple(ra + rb for ra, rb in zip(a, b))

    def copy(self, a):
        return a

    def set_entry(self, a, i, j, c):
        raise TypeError("rational matrices are immutable; build from rows")

    def entry(self, a, i, j):
        return a[i][j]


F2 = F2Field()
QQ = QQField()

FIELDS = {"f2": F2, "q": QQ}


def _mat_shape(field, a) -> tuple[int, int]:
    if field is F2:
        return a.shape
    return (len(a), len(a[0]) if a else 0)


class _Builder:
    """Mutable column-filling helper; finalized into a field matrix."""

    def __init__(self, field, rows: int, cols: int):
        self.field = field
        self.rows = rows
        self.cols = cols
        if field is F2:
            self.data = np.zeros((rows, cols), dtype=np.uint8)
        else:
            self.data = [[Fraction(0)] * cols for _ in range(rows)]

    def add_to(self, i: int, j: int, c) -> None:
        if self.field is F2:
            self.data[i, j] ^= int(c) % 2
        else:
            self.data[i][j] += Fraction(c)

    def done(self):
        if self.field is F2:
            return self.data
        return tuple(tuple(r) for r in self.data)


# ---------------------------------------------------------------------------
# graded spaces and maps
# ---------------------------------------------------------------------------


class GradedSpace:
    """Finitely supported graded vector space with ordered basis labels.

    ``cells`` maps true degree -> tuple of hashable basis labels; ``shift``
    records how much shifting produced those degrees (metadata for audits,
    the degrees in ``cells`` are already shifted).
    """

    __slots__ = ("cells", "shift", "_index")

    def __init__(self, cells: dict[int, Sequence[Hashable]], shift: int = 0):
        self.cells = {d: tuple(ls) for d, ls in sorted(cells.items()) if len(ls)}
        self.shift = shift
        self._index: dict[Hashable, tuple[int, int]] = {}
        for d, labels in self.cells.items():
            for j, lab in enumerate(labels):
                if lab in self._index:
                    raise ValueError(f"duplicate basis label {lab!r}")
                self._index[lab] = (d, j)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(self.cells)

    def dim(self, d: int) -> int:
        return len(self.cells.get(d, ()))

    @property
    def total_dim(self) -> int:
        return sum(len(ls) for ls in self.cells.values())

    def labels(self, d: int) -> tuple[Hashable, ...]:
        return self.cells.get(d, ())

    def index(self, label: Hashable) -> tuple[int, int]:
        """Return (degree, position) of a basis label."""
        return self._index[label]

    def shifted(self, s: int) -> "GradedSpace":
        return GradedSpace({d + s: ls for d, ls in self.cells.items()}, self.shift + s)

    def is_zero(self) -> bool:
        return not self.cells

    def __eq__(self, other) -> bool:
        return isinstance(other, GradedSpace) and self.cells == other.cells

    def __hash__(self):
        return hash(tuple((d, ls) for d, ls in self.cells.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{d}:{len(ls)}" for d, ls in self.cells.items())
        return f"GradedSpace({{{body}}}, shift={self.shift})"


def graded_dim(space: GradedSpace) -> "LaurentPoly":
    """Graded dimension as a Laurent polynomial in q (shift included)."""
    return LaurentPoly({d: len(ls) for d, ls in space.cells.items()})


class GradedMap:
    """Degree-homogeneous linear map stored as per-degree matrix blocks.

    ``blocks[d]`` is the matrix of the map from the source's degree-``d``
    slice to the target's degree-``d + offset`` slice, columns indexed by
    source basis order.  Blocks that are zero or empty are omitted.
    """

    __slots__ = ("field", "src", "tgt", "offset", "blocks")

    def __init__(self, field, src: GradedSpace, tgt: GradedSpace, offset: int, blocks):
        self.field = field
        self.src = src
        self.tgt = tgt
        self.offset = offset
        pruned = {}
        for d, m in blocks.items():
            r, c = _mat_shape(field, m)
            if (r, c) != (tgt.dim(d + offset), src.dim(d)):
                raise MapShapeError(
                    f"block at degree {d}: shape {(r, c)} != "
                    f"{(tgt.dim(d + offset), src.dim(d))}"
                )
            if r and c and not field.is_zero(m):
                pruned[d] = m
        self.blocks = pruned

    @classmethod
    def identity(cls, field, space: GradedSpace) -> "GradedMap":
        return cls(
            field, space, space, 0, {d: field.eye(space.dim(d)) for d in space.degrees}
        )

    @classmethod
    def zero(cls, field, src: GradedSpace, tgt: GradedSpace, offset: int = 0):
        return cls(field, src, tgt, offset, {})

    @classmethod
    def from_entries(cls, field, src, tgt, offset, entries):
        """Build from {(src_label, tgt_label): coeff} accumulating entries."""
        builders: dict[int, _Builder] = {}
        for (sl, tl), c in entries.items():
            sd, sj = src.index(sl)
            td, ti = tgt.index(tl)
            if td != sd + offset:
                raise MapShapeError(
                    f"entry {sl!r}->{tl!r} violates declared degree {offset}"
                )
            b = builders.get(sd)
            if b is None:
                b = builders[sd] = _Builder(field, tgt.dim(td), src.dim(sd))
            b.add_to(ti, sj, c)
        return cls(field, src, tgt, offset, {d: b.done() for d, b in builders.items()})

    def is_zero(self) -> bool:
        return not self.blocks

    def block(self, d: int):
        m = self.blocks.get(d)
        if m is None:
            return self.field.zeros(self.tgt.dim(d + self.offset), self.src.dim(d))
        return m

    def column(self, d: int, j: int) -> list:
        """Image of the j-th degree-d source basis vector, as coefficients."""
        m = self.block(d)
        rows = self.tgt.dim(d + self.offset)
        return [self.field.entry(m, i, j) for i in range(rows)]

    def compose(self, other: "GradedMap") -> "GradedMap":
        """self after other (matrix product per degree)."""
        if other.tgt != self.src:
            raise MapShapeError("compose: inner spaces differ")
        off = self.offset + other.offset
        blocks = {}
        for d, m in other.blocks.items():
            upper = self.blocks.get(d + other.offset)
            if upper is not None:
                blocks[d] = self.field.matmul(upper, m)
        return GradedMap(self.field, other.src, self.tgt, off, blocks)

    def __matmul__(self, other):
        return self.compose(other)

    def _aligned(self, other: "GradedMap") -> int:
        if self.src != other.src or self.tgt != other.tgt:
            raise MapShapeError("maps have different source or target")
        if self.is_zero():
            return other.offset
        if other.is_zero():
            return self.offset
        if self.offset != other.offset:
            raise MapShapeError(
                f"degree mismatch: {self.offset} vs {other.offset}"
            )
        return self.offset

    def add(self, other: "GradedMap") -> "GradedMap":
        off = self._aligned(other)
        blocks = {}
        for d in set(self.blocks) | set(other.blocks):
            blocks[d] = self.field.add(self.block(d), other.block(d))
        return GradedMap(self.field, self.src, self.tgt, off, blocks)

    def sub(self, other: "GradedMap") -> "GradedMap":
        off = self._aligned(other)
        blocks = {}
        for d in set(self.blocks) | set(other.blocks):
            blocks[d] = self.field.sub(self.block(d), other.block(d))
        return GradedMap(self.field, self.src, self.tgt, off, blocks)

    def __add__(self, other):
        return self.add(other)

    def __sub__(self, other):
        return self.sub(other)

    def scale(self, c) -> "GradedMap":
        return GradedMap(
            self.field,
            self.src,
            self.tgt,
            self.offset,
            {d: self.field.scale(c, m) for d, m in self.blocks.items()},
        )

    def equal(self, other: "GradedMap") -> bool:
        self._aligned(other)
        for d in set(self.blocks) | set(other.blocks):
            if not self.field.eq(self.block(d), other.block(d)):
                return False
        return True

    def __repr__(self):
        kind = "0" if self.is_zero() else f"deg {self.offset}"
        return (
            f"GradedMap({kind}, src dim {self.src.total_dim}, "
            f"tgt dim {self.tgt.total_dim})"
        )


def map_equal(f: GradedMap, g: GradedMap) -> bool:
    """Exact per-block equality; raises MapShapeError on space/degree mismatch."""
    return f.equal(g)


def invert_graded_map(f: GradedMap) -> GradedMap:
    """Inverse of a degreewise-invertible map; MapShapeError if singular.

    Each source degree slice must match the corresponding target slice in
    dimension and the block must have full rank (checked by row reduction
    of the augmented matrix).
    """
    field = f.field
    blocks = {}
    for d in set(f.src.degrees) | {e - f.offset for e in f.tgt.degrees}:
        n, m = f.tgt.dim(d + f.offset), f.src.dim(d)
        if n != m:
            raise MapShapeError(f"degree {d}: block is {n}x{m}, not square")
        if n == 0:
            continue
        reduced, pivots = field.rref(field.hstack(f.block(d), field.eye(n)))
        if pivots != list(range(n)):
            raise MapShapeError(f"degree {d}: block of size {n} is singular")
        inv = field.from_rows(
            [[field.entry(reduced, i, n + j) for j in range(n)] for i in range(n)]
        )
        blocks[d + f.offset] = inv
    return GradedMap(field, f.tgt, f.src, -f.offset, blocks)


# ---------------------------------------------------------------------------
# quotients with section
# ---------------------------------------------------------------------------


def quotient_with_section(
    field,
    ambient: GradedSpace,
    relations: Iterable[tuple[int, Sequence]],
) -> tuple[GradedSpace, GradedMap, GradedMap]:
    """Quotient of ``ambient`` by homogeneous relation vectors.

    ``relations`` yields (degree, coefficient vector over the ambient
    degree slice) pairs.  Returns (quotient, project, section) with
    project ∘ section = id; bases are deterministic: degreewise row
    echelon, pivots left to right, quotient labeled by the non-pivot
    ambient labels.
    """
    by_deg: dict[int, list] = {}
    for d, vec in relations:
        if len(vec) != ambient.dim(d):
            raise ValueError(f"relation vector of length {len(vec)} in degree {d}")
        by_deg.setdefault(d, []).append(vec)

    q_cells: dict[int, tuple] = {}
    proj_blocks: dict[int, Any] = {}
    sect_blocks: dict[int, Any] = {}
    rank_total = 0
    for d in ambient.degrees:
        n = ambient.dim(d)
        rels = by_deg.get(d, [])
        if rels:
            reduced, pivots = field.rref(field.from_rows(rels, cols=n))
        else:
            reduced, pivots = field.from_rows([], cols=n), []
        rank_total += len(pivots)
        free = [j for j in range(n) if j not in set(pivots)]
        if not free:
            continue
        q_cells[d] = tuple(ambient.labels(d)[j] for j in free)
        # project: reduce each ambient basis vector by the echelon rows,
        # then read off the free coordinates
        pb = _Builder(field, len(free), n)
        for j in range(n):
            coords = {j: 1}
            for t, p in enumerate(pivots):
                c = coords.get(p, 0)
                if c:
                    for jj in range(n):
                        e = field.entry(reduced, t, jj)
                        if e:
                            coords[jj] = coords.get(jj, 0) - c * e
            for i, fj in enumerate(free):
                c = coords.get(fj, 0)
                if c:
                    pb.add_to(i, j, c)
        proj_blocks[d] = pb.done()
        sb = _Builder(field, n, len(free))
        for i, fj in enumerate(free):
            sb.add_to(fj, i, 1)
        sect_blocks[d] = sb.done()

    quotient = GradedSpace(q_cells, ambient.shift)
    project = GradedMap(field, ambient, quotient, 0, proj_blocks)
    section = GradedMap(field, quotient, ambient, 0, sect_blocks)
    if ambient.total_dim != quotient.total_dim + rank_total:
        raise AssertionError("rank bookkeeping failed in quotient_with_section")
    if not (project @ section).equal(GradedMap.identity(field, quotient)):
        raise AssertionError("project ∘ section is not the identity")
    return quotient, project, section


# ---------------------------------------------------------------------------
# Laurent polynomials
# ---------------------------------------------------------------------------


class LaurentPoly:
    """Laurent polynomial in q with exact (int or Fraction) coefficients."""

    __slots__ = ("c",)

    def __init__(self, coeffs: dict[int, Any] | None = None):
        self.c = {e: v for e, v in (coeffs or {}).items() if v != 0}

    @classmethod
    def zero(cls) -> "LaurentPoly":
        return cls()

    @classmethod
    def one(cls) -> "LaurentPoly":
        return cls({0: 1})

    @classmethod
    def q(cls, exp: int = 1, coeff=1) -> "LaurentPoly":
        return cls({exp: coeff})

    def is_zero(self) -> bool:
        return not self.c

    def __add__(self, other):
        other = _as_poly(other)
        out = dict(self.c)
        for e, v in other.c.items():
            out[e] = out.get(e, 0) + v
        return LaurentPoly(out)

    def __sub__(self, other):
        other = _as_poly(other)
        out = dict(self.c)
        for e, v in other.c.items():
            out[e] = out.get(e, 0) - v
        return LaurentPoly(out)

    def __neg__(self):
        return LaurentPoly({e: -v for e, v in self.c.items()})

    def __mul__(self, other):
        other = _as_poly(other)
        out: dict[int, Any] = {}
        for e1, v1 in self.c.items():
            for e2, v2 in other.c.items():
                e = e1 + e2
                out[e] = out.get(e, 0) + v1 * v2
        return LaurentPoly(out)

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers of a general Laurent polynomial")
        out = LaurentPoly.one()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return self.c == _as_poly(other).c

    def __hash__(self):
        return hash(frozenset(self.c.items()))

    def bar(self) -> "LaurentPoly":
        """The bar involution q -> q^{-1}."""
        return LaurentPoly({-e: v for e, v in self.c.items()})

    def at_one(self):
        """Evaluate at q = 1."""
        return sum(self.c.values())

    def min_exp(self) -> int:
        return min(self.c) if self.c else 0

    def max_exp(self) -> int:
        return max(self.c) if self.c else 0

    def exact_div(self, other: "LaurentPoly") -> "LaurentPoly":
        """Exact division; raises ValueError if a remainder survives."""
        other = _as_poly(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero Laurent polynomial")
        if self.is_zero():
            return LaurentPoly.zero()
        # shift both so the divisor is an honest polynomial with nonzero
        # constant term; long division from the top then terminates
        sa, sb = self.min_exp(), other.min_exp()
        rem = {e - sa: v for e, v in self.c.items()}
        div = {e - sb: v for e, v in other.c.items()}
        lead = max(div)
        lc = div[lead]
        quo: dict[int, Any] = {}
        while rem:
            e = max(rem)
            if e < lead:
                raise ValueError(f"{other!r} does not divide {self!r}")
            coeff = Fraction(rem[e]) / Fraction(lc)
            shift = e - lead
            quo[shift] = coeff
            for e2, v2 in div.items():
                t = e2 + shift
                nv = rem.get(t, 0) - coeff * v2
                if nv == 0:
                    rem.pop(t, None)
                else:
                    rem[t] = nv
        out = {}
        for e, v in quo.items():
            f = Fraction(v)
            out[e + sa - sb] = int(f) if f.denominator == 1 else f
        return LaurentPoly(out)

    def __repr__(self) -> str:
        if not self.c:
            return "0"
        bits = []
        for e in sorted(self.c):
            v = self.c[e]
            if e == 0:
                bits.append(f"{v}")
            else:
                head = "" if v == 1 else ("-" if v == -1 else f"{v}*")
                tail = "q" if e == 1 else f"q^{e}"
                bits.append(f"{head}{tail}")
        return " + ".join(bits).replace("+ -", "- ")


def _as_poly(x) -> LaurentPoly:
    if isinstance(x, LaurentPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return LaurentPoly({0: x})
    raise TypeError(f"cannot coerce {type(x).__name__} to LaurentPoly")


def qint(n: int) -> LaurentPoly:
    """The balanced quantum integer [n] = q^{n-1} + q^{n-3} + ... + q^{1-n}."""
    if n < 0:
        return -qint(-n)
    return LaurentPoly({n - 1 - 2 * t: 1 for t in range(n)})

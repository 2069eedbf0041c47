"""The rank-one Frobenius algebra, its circle TQFT, and the arc algebras.

The Frobenius algebra A = k[x]/x² has deg(1) = −1, deg(x) = +1.  A closed
diagram with m circles carries A^{⊗m}; labelings are tuples over {0, 1}
with 0 meaning the unit and 1 meaning x.  All coefficient arithmetic here
is over the two-element field.

The arc algebra H_λ = H^r (r = γ(λ)) has basis indexed by
(top matching, bottom matching, labeling); multiplication contracts the
interface matching by iterated merge/split surgeries.  Products stack the
left factor above the right factor, so (c,b)·(b,a) lands in (c,a).
"""

from __future__ import annotations

from .exactalg import GradedSpace, LaurentPoly, graded_dim
from .planar import Edge, Matching, Point, components, enumerate_matchings
from .weights import gamma

# structure constants of A; labels: 0 = unit, 1 = x
DEG = {0: -1, 1: +1}


def frob_merge(l1: int, l2: int) -> int | None:
    """m(l1, l2); None means the product vanishes (x² = 0)."""
    if l1 and l2:
        return None
    return l1 | l2


def frob_split(lab: int) -> list[tuple[int, int]]:
    """Δ as a list of label pairs: Δ(1) = x⊗1 + 1⊗x, Δ(x) = x⊗x."""
    return [(1, 1)] if lab else [(1, 0), (0, 1)]


def frob_trace(lab: int) -> int:
    """Tr(x) = 1, Tr(1) = 0."""
    return lab


def frob_kappa(lab: int) -> int | None:
    """κ(x) = 1, κ(1) = 0; None means zero."""
    return 0 if lab else None


def frob_dot(lab: int) -> int | None:
    """Multiplication by x: 1 ↦ x, x ↦ 0."""
    return None if lab else 1


def tqft_elementary(op: tuple, labels: tuple[int, ...]) -> dict[tuple[int, ...], int]:
    """Apply one elementary cobordism to a labeling tuple.

    op is ("dot", c), ("merge", c1, c2), ("split", c), ("birth",),
    ("death", c) or ("kappa", c) with 0-based circle slots; merge keeps
    the united circle in slot c1, split puts the new circle after slot c,
    birth appends a unit-labeled circle.  Returns {labeling: coefficient}
    over the two-element field.
    """
    kind = op[0]
    for c in op[1:]:
        if not 0 <= c < len(labels):
            raise IndexError(f"no circle in slot {c}")
    out: dict[tuple[int, ...], int] = {}
    if kind == "dot":
        c = op[1]
        lab = frob_dot(labels[c])
        if lab is not None:
            out[labels[:c] + (lab,) + labels[c + 1 :]] = 1
    elif kind == "kappa":
        c = op[1]
        lab = frob_kappa(labels[c])
        if lab is not None:
            out[labels[:c] + (lab,) + labels[c + 1 :]] = 1
    elif kind == "merge":
        c1, c2 = op[1], op[2]
        if c1 == c2:
            raise ValueError("merge needs two distinct circles")
        lab = frob_merge(labels[c1], labels[c2])
        if lab is not None:
            rest = [l for i, l in enumerate(labels) if i != c2]
            rest[c1 if c1 < c2 else c1 - 1] = lab
            out[tuple(rest)] = 1
    elif kind == "split":
        c = op[1]
        for la, lb in frob_split(labels[c]):
            key = labels[:c] + (la, lb) + labels[c + 1 :]
            out[key] = out.get(key, 0) ^ 1
            if not out[key]:
                del out[key]
    elif kind == "birth":
        out[labels + (0,)] = 1
    elif kind == "death":
        c = op[1]
        if frob_trace(labels[c]):
            out[labels[:c] + labels[c + 1 :]] = 1
    else:
        raise ValueError(f"unknown elementary operation {kind!r}")
    return out


# ---------------------------------------------------------------------------
# iterated surgery on labeled closed diagrams
# ---------------------------------------------------------------------------


def _norm_edge(e: Edge) -> Edge:
    p, q = e
    return (p, q) if p <= q else (q, p)


def contraction_order(m: Matching, reverse: bool = False) -> list[tuple[int, int]]:
    """Arcs of a matching in surgery order: innermost first, then leftmost
    (or the outermost-rightmost order when reverse is set, for confluence
    checks)."""
    key = (lambda a: (a[1] - a[0], a[0])) if not reverse else (
        lambda a: (a[0] - a[1], -a[0])
    )
    return sorted((tuple(sorted(p)) for p in m), key=key)


def contract_pairs(
    edges: list[Edge],
    pairs: list[tuple[Edge, Edge]],
    states: dict[tuple[int, ...], int],
):
    """Iterated cup-cap surgery over the two-element field.

    Each step removes the two parallel arcs of a pair and joins their
    endpoints columnwise; labels follow the TQFT (merge when the arcs sat
    on distinct circles, split when on the same one).  states maps
    labelings (indexed by the current canonical circle order) to nonzero
    coefficients.  Returns (final circles, final states).
    """
    edges = [_norm_edge(e) for e in edges]
    circles = components(edges)
    for e1, e2 in pairs:
        e1, e2 = _norm_edge(e1), _norm_edge(e2)
        (p1, q1) = e1
        (p2, q2) = e2
        if p1[1] != p2[1] or q1[1] != q2[1]:
            raise ValueError(f"arcs {e1} and {e2} are not column-aligned")
        edges.remove(e1)
        edges.remove(e2)
        edges.append(_norm_edge((p1, p2)))
        edges.append(_norm_edge((q1, q2)))
        new_circles = components(edges)
        point_to_old = {pt: i for i, c in enumerate(circles) for pt in c}
        c1, c2 = point_to_old[p1], point_to_old[p2]
        # relate new circles to old ones through their (unchanged) points
        plan: list[tuple[str, int]] = []
        for nc in new_circles:
            olds = {point_to_old[pt] for pt in nc}
            if olds <= {c1, c2} and c1 != c2:
                plan.append(("merge", -1))
            elif olds == {c1} and c1 == c2:
                plan.append(("piece", -1))
            else:
                (old,) = olds
                plan.append(("copy", old))
        new_states: dict[tuple[int, ...], int] = {}

        def put(key, coeff):
            v = new_states.get(key, 0) ^ (coeff & 1)
            if v:
                new_states[key] = v
            else:
                new_states.pop(key, None)

        for labeling, coeff in states.items():
            if c1 != c2:
                merged = frob_merge(labeling[c1], labeling[c2])
                if merged is None:
                    continue
                key = tuple(
                    merged if what == "merge" else labeling[old]
                    for what, old in plan
                )
                put(key, coeff)
            else:
                pieces = [i for i, (what, _) in enumerate(plan) if what == "piece"]
                assert len(pieces) == 2
                for la, lb in frob_split(labeling[c1]):
                    out = []
                    first = True
                    for what, old in plan:
                        if what == "piece":
                            out.append(la if first else lb)
                            first = False
                        else:
                            out.append(labeling[old])
                    put(tuple(out), coeff)
        circles, states = new_circles, new_states
    return circles, states


# ---------------------------------------------------------------------------
# arc algebras
# ---------------------------------------------------------------------------


class CapacityError(ValueError):
    """A request exceeded the configured combinatorial bound."""


def algebra_graph(top_m: Matching, bot_m: Matching, positions=None) -> list[Edge]:
    """Closure of the identity tangle: bottom arcs on row 0, verticals,
    top arcs on row 1.  positions (default 0..2r-1) places the columns."""
    n = 2 * len(bot_m)
    pos = tuple(range(n)) if positions is None else tuple(positions)
    edges: list[Edge] = [((0, pos[p]), (1, pos[p])) for p in range(n)]
    edges += [((0, pos[p]), (0, pos[q])) for p, q in bot_m]
    edges += [((1, pos[p]), (1, pos[q])) for p, q in top_m]
    return edges


def _labelings(n: int):
    out = [()]
    for _ in range(n):
        out = [t + (l,) for t in out for l in (0, 1)]
    return out


class ArcAlgebra:
    """H_λ with its graded basis and memoized surgery multiplication.

    Basis labels are (top matching index, bottom matching index, labeling);
    true degrees include the global shift by r = γ(λ).  Immutable after
    construction; the product memo only ever gains fully computed entries.
    """

    def __init__(self, lam, max_gamma: int = 6):
        self.lam = tuple(lam)
        r = gamma(lam)
        if r > max_gamma:
            raise CapacityError(f"γ(λ) = {r} exceeds the bound {max_gamma}")
        self.r = r
        self.matchings = enumerate_matchings(r)
        self.circles: dict[tuple[int, int], tuple] = {}
        cells: dict[int, list] = {}
        for ti in range(len(self.matchings)):
            for bi in range(len(self.matchings)):
                circ = components(
                    algebra_graph(self.matchings[ti], self.matchings[bi])
                )
                self.circles[(ti, bi)] = circ
                for lab in _labelings(len(circ)):
                    deg = sum(DEG[l] for l in lab) + r
                    cells.setdefault(deg, []).append((ti, bi, lab))
        self.space = GradedSpace({d: sorted(ls) for d, ls in cells.items()}, shift=r)
        self._memo: dict[tuple, dict] = {}

    @property
    def dim(self) -> int:
        return self.space.total_dim

    def degree(self, label) -> int:
        ti, bi, lab = label
        return sum(DEG[l] for l in lab) + self.r

    def idempotent(self, mi: int) -> dict:
        lab = (0,) * len(self.circles[(mi, mi)])
        return {(mi, mi, lab): 1}

    def unit(self) -> dict:
        out = {}
        for mi in range(len(self.matchings)):
            out.update(self.idempotent(mi))
        return out

    def multiply_basis(self, xl, yl, reverse_order: bool = False) -> dict:
        """Product of two basis elements, as {basis label: coefficient}."""
        ti, bi, xlab = xl
        ti2, bi2, ylab = yl
        if bi != ti2:
            return {}
        key = (xl, yl, reverse_order)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        mid = self.matchings[bi]
        n = 2 * self.r
        # right factor occupies rows 0-1, left factor rows 2-3
        edges = algebra_graph(self.matchings[bi], self.matchings[bi2])
        edges += [
            (_shift_row(p, 2), _shift_row(q, 2))
            for p, q in algebra_graph(self.matchings[ti], mid)
        ]
        start = components(edges)
        # initial circles are the two factors' circles, right factor first
        labeling = []
        for c in start:
            row, col = c[0]
            if row <= 1:
                labeling.append(ylab[self.circles[(bi, bi2)].index(c)])
            else:
                shifted = tuple((t - 2, x) for t, x in c)
                labeling.append(xlab[self.circles[(ti, bi)].index(shifted)])
        pairs = [
            (((1, p), (1, q)), ((2, p), (2, q)))
            for p, q in contraction_order(mid, reverse_order)
        ]
        final_circles, states = contract_pairs(edges, pairs, {tuple(labeling): 1})
        # final diagram is the (ti, bi2) closure with doubled rows; circles
        # correspond through their row-0 points
        target = self.circles[(ti, bi2)]
        pt_to_tgt = {pt: i for i, c in enumerate(target) for pt in c}
        perm = []
        for c in final_circles:
            anchor = next(pt for pt in c if pt[0] == 0)
            perm.append(pt_to_tgt[anchor])
        assert sorted(perm) == list(range(len(target)))
        out: dict = {}
        for labs, coeff in states.items():
            tgt_lab = [0] * len(target)
            for slot, lab in zip(perm, labs):
                tgt_lab[slot] = lab
            out[(ti, bi2, tuple(tgt_lab))] = coeff
        self._memo[key] = out
        return out

    def multiply(self, x: dict, y: dict) -> dict:
        out: dict = {}
        for xl, cx in x.items():
            for yl, cy in y.items():
                for zl, cz in self.multiply_basis(xl, yl).items():
                    v = out.get(zl, 0) ^ (cx * cy * cz & 1)
                    if v:
                        out[zl] = v
                    else:
                        out.pop(zl, None)
        return out

    def summand_space(self, ti: int, bi: int) -> GradedSpace:
        """The (ti, bi) block as a graded space (shift included)."""
        cells: dict[int, list] = {}
        for lab in _labelings(len(self.circles[(ti, bi)])):
            deg = sum(DEG[l] for l in lab) + self.r
            cells.setdefault(deg, []).append((ti, bi, lab))
        return GradedSpace({d: sorted(ls) for d, ls in cells.items()}, shift=self.r)

    def cartan_entry(self, ti: int, bi: int) -> LaurentPoly:
        return graded_dim(self.summand_space(ti, bi))


def _shift_row(p: Point, by: int) -> Point:
    return (p[0] + by, p[1])


def build_arc_algebra(lam, max_gamma: int = 6) -> ArcAlgebra:
    """The arc algebra H_λ (capacity-checked)."""
    return ArcAlgebra(lam, max_gamma)


def arc_multiply(alg: ArcAlgebra, x: dict, y: dict) -> dict:
    """Product of two elements given as {basis label: coefficient}."""
    return alg.multiply(x, y)

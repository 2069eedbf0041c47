"""Word bimodules over the arc algebras and their generator 2-morphisms.

A word w = (i_1, …, i_m) of signed indices acting on a weight λ is
realized by a graded (H_μ, H_λ)-bimodule.  One-letter words (and the
empty word) get the geometric model directly: one labeled circle diagram
per pair of boundary matchings.  Longer words are built right-associated,
one letter at a time, as gen ⊗_{H} rest, and flattened eagerly to an
honest graded space by quotienting the compatible-pair space by the
balancing relations u·h ⊗ v − u ⊗ h·v; the projection and section of
that quotient are kept on the bimodule.

Elementary 2-morphisms (dot, cup, cap, crossing) are cobordism maps.
They are materialized on the geometric models of words of length ≤ 2 —
transport, saddle, birth, death, dot, and κ all reduce to circle
bookkeeping plus the Frobenius structure maps — and conjugated onto the
flattened bases through the comparison isomorphism χ built from the
sections.  Whiskering extends a 2-morphism by identity letters: on the
left structurally (the flattening is left-associated the same way), on
the right through comparison isomorphisms between B(v ++ z) and the
flattening of B(v) ⊗ B(z).

Everything in this module is over the two-element field.
"""

from __future__ import annotations

from typing import NamedTuple

from .arcalg import (
    DEG,
    ArcAlgebra,
    CapacityError,
    _labelings,
    algebra_graph,
    contract_pairs,
    contraction_order,
    frob_dot,
    frob_kappa,
    frob_merge,
    frob_split,
    frob_trace,
)
from .exactalg import (
    F2,
    GradedMap,
    GradedSpace,
    LaurentPoly,
    graded_dim,
    invert_graded_map,
    map_equal,
    quotient_with_section,
)
from .planar import (
    Zero,
    active_positions,
    closure_edges,
    components,
    enumerate_matchings,
    word_layers,
)
from .weights import Word, cartan_pairing, gamma, word_content

__all__ = [
    "ArcBackend",
    "Bimodule",
    "TwoMorphism",
    "WordGeometry",
    "pair_space",
    "tensor_map",
]


class TwoMorphism(NamedTuple):
    """A homogeneous bimodule map between two word bimodules."""

    src: "Bimodule"
    tgt: "Bimodule"
    map: GradedMap

    @property
    def degree(self) -> int:
        return self.map.offset

    def is_zero(self) -> bool:
        return self.map.is_zero()


# ---------------------------------------------------------------------------
# geometric model: closed diagrams of a word
# ---------------------------------------------------------------------------


class WordGeometry:
    """Closed circle diagrams of a word at λ, one per matching pair.

    Summand (ti, bi) closes the word diagram with top matching ti (over
    the active positions of the top weight) and bottom matching bi.  The
    graded space has labels (ti, bi, labeling) with the bottom-weight
    shift γ(λ), exactly parallel to the arc algebra basis.
    """

    def __init__(self, lam, w: Word, max_gamma: int = 6):
        layers = word_layers(lam, w)
        if layers is Zero:
            raise ValueError(f"word {w} is zero on {lam}")
        self.lam = tuple(lam)
        self.word = tuple(w)
        self.layers = tuple(layers)
        self.mu = self.layers[-1].top_weight if self.layers else self.lam
        self.rows = len(self.layers)
        rb, rt = gamma(self.lam), gamma(self.mu)
        if max(rb, rt) > max_gamma:
            raise CapacityError(f"γ = {max(rb, rt)} exceeds the bound {max_gamma}")
        self.bot_matchings = enumerate_matchings(rb)
        self.top_matchings = enumerate_matchings(rt)
        self.bot_act = active_positions(self.lam)
        self.top_act = active_positions(self.mu)
        self.edges: dict[tuple[int, int], list] = {}
        self.circles: dict[tuple[int, int], tuple] = {}
        cells: dict[int, list] = {}
        for ti, a in enumerate(self.top_matchings):
            for bi, b in enumerate(self.bot_matchings):
                e = closure_edges(self.lam, list(self.layers), b, a)
                circ = components(e)
                self.edges[(ti, bi)] = e
                self.circles[(ti, bi)] = circ
                for lab in _labelings(len(circ)):
                    deg = sum(DEG[l] for l in lab) + rb
                    cells.setdefault(deg, []).append((ti, bi, lab))
        self.space = GradedSpace({d: sorted(ls) for d, ls in cells.items()}, shift=rb)

    def through(self, ti: int, bi: int, point) -> int:
        """Index of the summand circle passing through a point."""
        for k, c in enumerate(self.circles[(ti, bi)]):
            if point in c:
                return k
        raise KeyError(f"no circle through {point} in summand {(ti, bi)}")


# ---------------------------------------------------------------------------
# pair spaces and tensor maps
# ---------------------------------------------------------------------------


def pair_space(xs: GradedSpace, ys: GradedSpace, compat) -> GradedSpace:
    """Graded span of pairs (u, v) with compat(u, v), degree-additive."""
    cells: dict[int, list] = {}
    for dx in xs.degrees:
        for u in xs.labels(dx):
            for dy in ys.degrees:
                for v in ys.labels(dy):
                    if compat(u, v):
                        cells.setdefault(dx + dy, []).append((u, v))
    return GradedSpace(cells, shift=xs.shift + ys.shift)


def tensor_map(
    field, f: GradedMap, g: GradedMap, srcp: GradedSpace, tgtp: GradedSpace
) -> GradedMap:
    """(f ⊗ g) restricted to pair spaces of source and target labels."""
    entries: dict = {}
    for d in srcp.degrees:
        for u, v in srcp.labels(d):
            du, ju = f.src.index(u)
            dv, jv = g.src.index(v)
            fu = f.column(du, ju)
            gv = g.column(dv, jv)
            if not any(fu) or not any(gv):
                continue
            ulabs = f.tgt.labels(du + f.offset)
            vlabs = g.tgt.labels(dv + g.offset)
            for iu, cu in enumerate(fu):
                if not cu:
                    continue
                for iv, cv in enumerate(gv):
                    if not cv:
                        continue
                    key = ((u, v), (ulabs[iu], vlabs[iv]))
                    entries[key] = entries.get(key, 0) + cu * cv
    return GradedMap.from_entries(
        field, srcp, tgtp, f.offset + g.offset, entries
    )


def _relabel_map(field, src: GradedSpace, tgt: GradedSpace, fn) -> GradedMap:
    """Degree-0 map sending each source label to fn(label) in the target."""
    entries = {}
    for d in src.degrees:
        for lab in src.labels(d):
            entries[(lab, fn(lab))] = 1
    return GradedMap.from_entries(field, src, tgt, 0, entries)


# ---------------------------------------------------------------------------
# bimodules
# ---------------------------------------------------------------------------


class Bimodule:
    """A word bimodule: geometric for words of length ≤ 1, flattened else.

    kind is "zero", "id", "leaf", or "flat".  Flat bimodules keep their
    pair-space ambient together with the projection/section of the
    balancing quotient; actions on them are conjugates of the factor
    actions through that data.  shift is the bottom-weight shift γ(λ)
    carried by every summand.
    """

    __slots__ = (
        "backend",
        "kind",
        "word",
        "bot",
        "top",
        "shift",
        "space",
        "geo",
        "gen",
        "rest",
        "ambient",
        "project",
        "section",
        "_acts",
    )

    def __init__(self, backend, kind, word, bot, top, space, **data):
        self.backend = backend
        self.kind = kind
        self.word = tuple(word)
        self.bot = tuple(bot) if bot is not None else None
        self.top = tuple(top) if top is not None else None
        self.shift = gamma(bot) if kind != "zero" else 0
        self.space = space
        self.geo = data.get("geo")
        self.gen = data.get("gen")
        self.rest = data.get("rest")
        self.ambient = data.get("ambient")
        self.project = data.get("project")
        self.section = data.get("section")
        self._acts: dict = {}

    def __repr__(self):
        return (
            f"Bimodule({self.kind}, word={self.word}, bot={self.bot}, "
            f"dim={self.space.total_dim})"
        )

    def is_zero(self) -> bool:
        return self.kind == "zero"

    @property
    def key(self):
        """Structural identity: flats remember how they were glued."""
        if self.kind == "flat":
            return ("p", self.gen.key, self.rest.key)
        return ("w", self.word, self.bot)

    def label_top(self, lab) -> int:
        """Top matching index of a basis label."""
        if self.kind == "flat":
            return self.gen.label_top(lab[0])
        return lab[0]

    def label_bot(self, lab) -> int:
        if self.kind == "flat":
            return self.rest.label_bot(lab[1])
        return lab[1]

    def summand_gdim(self, ti: int, bi: int):
        """Graded dimension of the (ti, bi) summand."""
        cells: dict[int, int] = {}
        for d in self.space.degrees:
            n = sum(
                1
                for lab in self.space.labels(d)
                if self.label_top(lab) == ti and self.label_bot(lab) == bi
            )
            if n:
                cells[d] = n
        return LaurentPoly(cells)

    # -- actions ------------------------------------------------------------

    def act_left(self, h) -> GradedMap:
        """Action of the top-algebra basis element h, as a graded map."""
        return self._act("L", h)

    def act_right(self, h) -> GradedMap:
        return self._act("R", h)

    def _act(self, side: str, h) -> GradedMap:
        hit = self._acts.get((side, h))
        if hit is not None:
            return hit
        out = self._build_act(side, h)
        self._acts[(side, h)] = out
        return out

    def _build_act(self, side: str, h) -> GradedMap:
        if self.kind == "zero":
            return GradedMap.zero(F2, self.space, self.space, 0)
        alg = self.backend.algebra(self.top if side == "L" else self.bot)
        dh = alg.degree(h)
        if self.kind == "id":
            entries: dict = {}
            for d in self.space.degrees:
                for u in self.space.labels(d):
                    prod = (
                        alg.multiply_basis(h, u)
                        if side == "L"
                        else alg.multiply_basis(u, h)
                    )
                    for z, c in prod.items():
                        entries[(u, z)] = entries.get((u, z), 0) + c
            return GradedMap.from_entries(F2, self.space, self.space, dh, entries)
        if self.kind == "leaf":
            entries = _stacked_action(self.geo, alg, h, side)
            return GradedMap.from_entries(F2, self.space, self.space, dh, entries)
        # flat: conjugate the factor action through the quotient data
        if side == "L":
            inner = tensor_map(
                F2,
                self.gen.act_left(h),
                GradedMap.identity(F2, self.rest.space),
                self.ambient,
                self.ambient,
            )
        else:
            inner = tensor_map(
                F2,
                GradedMap.identity(F2, self.gen.space),
                self.rest.act_right(h),
                self.ambient,
                self.ambient,
            )
        return self.project @ inner @ self.section


def _stacked_action(geo: WordGeometry, alg: ArcAlgebra, h, side: str) -> dict:
    """Entries of the left/right action of h on a geometric word bimodule.

    The algebra element's closed diagram is stacked above (left action)
    or below (right action) each summand closure; the interface matching
    is contracted by surgeries and the resulting circles are anchored
    back onto the target summand closure.
    """
    hc, hb, hlab = h
    m = geo.rows
    entries: dict = {}
    for (ti, bi), circ in geo.circles.items():
        if side == "L":
            if hb != ti:
                continue
            tgt_pair = (hc, bi)
            pos = geo.top_act
            shift_alg, shift_word = m + 1, 0
            iface = alg.matchings[hb]
            iface_rows = (m, m + 1)

            def anchor(pt):
                return (min(pt[0], m), pt[1])

        else:
            if hc != bi:
                continue
            tgt_pair = (ti, hb)
            pos = geo.bot_act
            shift_alg, shift_word = 0, 2
            iface = alg.matchings[hc]
            iface_rows = (1, 2)

            def anchor(pt):
                return (max(pt[0] - 2, 0), pt[1])

        graph = algebra_graph(alg.matchings[hc], alg.matchings[hb], positions=pos)
        edges = [
            ((r1 + shift_alg, c1), (r2 + shift_alg, c2)) for (r1, c1), (r2, c2) in graph
        ]
        edges += [
            ((r1 + shift_word, c1), (r2 + shift_word, c2))
            for (r1, c1), (r2, c2) in geo.edges[(ti, bi)]
        ]
        pairs = [
            (
                ((iface_rows[0], pos[p]), (iface_rows[0], pos[q])),
                ((iface_rows[1], pos[p]), (iface_rows[1], pos[q])),
            )
            for p, q in contraction_order(iface)
        ]
        start = components(edges)
        # slot plan: each starting circle is a word circle or an algebra circle
        alg_ref = alg.circles[(hc, hb)]
        pos_inv = {c: k for k, c in enumerate(pos)}
        plan = []
        for c in start:
            r0 = c[0][0]
            in_alg = shift_alg <= r0 <= shift_alg + 1 and all(
                shift_alg <= r <= shift_alg + 1 for r, _ in c
            )
            if in_alg:
                back = tuple(sorted((r - shift_alg, pos_inv[col]) for r, col in c))
                plan.append(("h", alg_ref.index(back)))
            else:
                back = tuple(sorted((r - shift_word, col) for r, col in c))
                plan.append(("u", geo.circles[(ti, bi)].index(back)))
        tgt_circ = geo.circles[tgt_pair]
        tgt_pt = {pt: k for k, c in enumerate(tgt_circ) for pt in c}
        for ulab in _labelings(len(geo.circles[(ti, bi)])):
            init = tuple(
                hlab[k] if what == "h" else ulab[k] for what, k in plan
            )
            final, states = contract_pairs(list(edges), pairs, {init: 1})
            if not states:
                continue
            perm = []
            for c in final:
                hits = {tgt_pt[anchor(pt)] for pt in c}
                assert len(hits) == 1, "surgered circle straddles target circles"
                perm.append(hits.pop())
            assert sorted(perm) == list(range(len(tgt_circ)))
            src_label = (ti, bi, ulab)
            for labs, coeff in states.items():
                out = [0] * len(tgt_circ)
                for slot, l in zip(perm, labs):
                    out[slot] = l
                key = (src_label, (tgt_pair[0], tgt_pair[1], tuple(out)))
                entries[key] = entries.get(key, 0) ^ (coeff & 1)
    return {k: v for k, v in entries.items() if v}


# ---------------------------------------------------------------------------
# elementary cobordism maps between geometric models
# ---------------------------------------------------------------------------


def _anchor_perm(src_circles, tgt_circles, skip=()):
    """Match source circles to target circles through shared points.

    Returns {source index: target index} for all sources not in skip;
    every such circle must meet exactly one target circle.
    """
    tgt_pt = {pt: k for k, c in enumerate(tgt_circles) for pt in c}
    out = {}
    for k, c in enumerate(src_circles):
        if k in skip:
            continue
        hits = {tgt_pt[pt] for pt in c if pt in tgt_pt}
        assert len(hits) == 1, f"circle {k} matches {len(hits)} target circles"
        out[k] = hits.pop()
    return out


def _transport_entries(src: WordGeometry, tgt: WordGeometry) -> dict:
    """Isotopy cobordism: bijective circle matching, labels copied."""
    entries = {}
    for pair, circ in src.circles.items():
        perm = _anchor_perm(circ, tgt.circles[pair])
        assert sorted(perm.values()) == list(range(len(tgt.circles[pair])))
        for lab in _labelings(len(circ)):
            out = [0] * len(circ)
            for k, l in enumerate(lab):
                out[perm[k]] = l
            entries[((pair[0], pair[1], lab), (pair[0], pair[1], tuple(out)))] = 1
    return entries


def _saddle_entries(src: WordGeometry, tgt: WordGeometry, marks) -> dict:
    """One saddle joining the circles through the two marked source points."""
    p1, p2 = marks
    entries: dict = {}
    for pair, circ in src.circles.items():
        c1 = src.through(pair[0], pair[1], p1)
        c2 = src.through(pair[0], pair[1], p2)
        tgt_circ = tgt.circles[pair]
        perm = _anchor_perm(circ, tgt_circ, skip={c1, c2})
        unacc = [t for t in range(len(tgt_circ)) if t not in set(perm.values())]
        for lab in _labelings(len(circ)):
            src_label = (pair[0], pair[1], lab)

            def put(out_lab, c=1):
                key = (src_label, (pair[0], pair[1], tuple(out_lab)))
                v = entries.get(key, 0) ^ (c & 1)
                if v:
                    entries[key] = v
                else:
                    entries.pop(key, None)

            if c1 != c2:
                assert len(unacc) == 1, "merge expected one new target circle"
                merged = frob_merge(lab[c1], lab[c2])
                if merged is None:
                    continue
                out = [0] * len(tgt_circ)
                for k, t in perm.items():
                    out[t] = lab[k]
                out[unacc[0]] = merged
                put(out)
            else:
                assert len(unacc) == 2, "split expected two new target circles"
                for la, lb in frob_split(lab[c1]):
                    out = [0] * len(tgt_circ)
                    for k, t in perm.items():
                        out[t] = lab[k]
                    out[unacc[0]], out[unacc[1]] = la, lb
                    put(out)
    return entries


def _birth_entries(src: WordGeometry, tgt: WordGeometry) -> dict:
    """Unit on the one target circle missing from the source."""
    entries = {}
    for pair, circ in src.circles.items():
        tgt_circ = tgt.circles[pair]
        perm = _anchor_perm(circ, tgt_circ)
        unacc = [t for t in range(len(tgt_circ)) if t not in set(perm.values())]
        assert len(unacc) == 1, "birth expected exactly one new circle"
        for lab in _labelings(len(circ)):
            out = [0] * len(tgt_circ)
            for k, t in perm.items():
                out[t] = lab[k]
            entries[((pair[0], pair[1], lab), (pair[0], pair[1], tuple(out)))] = 1
    return entries


def _death_entries(src: WordGeometry, tgt: WordGeometry) -> dict:
    """Trace on the one source circle with no counterpart in the target."""
    entries = {}
    for pair, circ in src.circles.items():
        tgt_circ = tgt.circles[pair]
        tgt_pts = {pt for c in tgt_circ for pt in c}
        dying = [k for k, c in enumerate(circ) if not (set(c) & tgt_pts)]
        assert len(dying) == 1, "death expected exactly one closed circle"
        perm = _anchor_perm(circ, tgt_circ, skip=set(dying))
        assert sorted(perm.values()) == list(range(len(tgt_circ)))
        for lab in _labelings(len(circ)):
            if not frob_trace(lab[dying[0]]):
                continue
            out = [0] * len(tgt_circ)
            for k, t in perm.items():
                out[t] = lab[k]
            entries[((pair[0], pair[1], lab), (pair[0], pair[1], tuple(out)))] = 1
    return entries


def _inplace_entries(geo: WordGeometry, point, op) -> dict:
    """Dot or κ on the circle through a fixed point, summand by summand."""
    entries = {}
    for pair, circ in geo.circles.items():
        c = geo.through(pair[0], pair[1], point)
        for lab in _labelings(len(circ)):
            new = op(lab[c])
            if new is None:
                continue
            out = lab[:c] + (new,) + lab[c + 1 :]
            entries[((pair[0], pair[1], lab), (pair[0], pair[1], out))] = 1
    return entries


def _layer_marks(geo: WordGeometry):
    """One point on the non-vertical component of each layer."""
    marks = []
    for t, layer in enumerate(geo.layers):
        if layer.kind == "cup":
            marks.append((t + 1, layer.p))
        else:
            marks.append((t, layer.p))
    return tuple(marks)


# ---------------------------------------------------------------------------
# the backend
# ---------------------------------------------------------------------------


class ArcBackend:
    """Shared caches for algebras, word bimodules, and comparison isos.

    All published objects are immutable once cached, so concurrent
    readers are safe; at worst two threads build the same object and one
    result wins the (atomic) cache assignment.
    """

    name = "arc"
    field = F2

    def __init__(self, max_gamma: int = 6):
        self.max_gamma = max_gamma
        self._algebras: dict = {}
        self._geos: dict = {}
        self._bimods: dict = {}
        self._flats: dict = {}
        self._chi: dict = {}
        self._chi_inv: dict = {}
        self._cmp: dict = {}
        self._cmp_inv: dict = {}

    # -- caches -------------------------------------------------------------

    def algebra(self, lam) -> ArcAlgebra:
        lam = tuple(lam)
        hit = self._algebras.get(lam)
        if hit is None:
            hit = ArcAlgebra(lam, self.max_gamma)
            self._algebras[lam] = hit
        return hit

    def geometry(self, w: Word, lam):
        key = (tuple(w), tuple(lam))
        hit = self._geos.get(key)
        if hit is None:
            if word_layers(lam, w) is Zero:
                hit = Zero
            else:
                hit = WordGeometry(lam, w, self.max_gamma)
            self._geos[key] = hit
        return hit

    def _zero_bimodule(self, w: Word, lam) -> Bimodule:
        return Bimodule(self, "zero", w, lam, None, GradedSpace({}))

    def word_bimodule(self, w: Word, lam) -> Bimodule:
        """The bimodule of E_{w_1}⋯E_{w_m} I_λ (eagerly flattened)."""
        w, lam = tuple(w), tuple(lam)
        key = (w, lam)
        hit = self._bimods.get(key)
        if hit is not None:
            return hit
        out = self._build_bimodule(w, lam)
        self._bimods[key] = out
        return out

    bimodule = word_bimodule

    def _build_bimodule(self, w: Word, lam) -> Bimodule:
        if any(v not in (0, 1, 2) for v in lam) or sum(1 for v in lam if v == 1) % 2:
            return self._zero_bimodule(w, lam)
        geo = self.geometry(w, lam)
        if geo is Zero:
            return self._zero_bimodule(w, lam)
        if len(w) == 0:
            alg = self.algebra(lam)
            self._check_id_alignment(geo, alg)
            return Bimodule(self, "id", w, lam, lam, alg.space, geo=geo)
        if len(w) == 1:
            return Bimodule(self, "leaf", w, lam, geo.mu, geo.space, geo=geo)
        rest = self.word_bimodule(w[1:], lam)
        if rest.is_zero():
            return self._zero_bimodule(w, lam)
        leaf = self.word_bimodule(w[:1], rest.top)
        if leaf.is_zero():
            return self._zero_bimodule(w, lam)
        return self.flatten_pair(leaf, rest, word=w)

    @staticmethod
    def _check_id_alignment(geo: WordGeometry, alg: ArcAlgebra):
        """The empty-word closures must list circles exactly like H_λ."""
        act = geo.bot_act
        for pair, circ in geo.circles.items():
            ref = alg.circles[pair]
            assert len(circ) == len(ref)
            for c, cr in zip(circ, ref):
                assert {col for _, col in c} == {act[p] for _, p in cr}

    def flatten_pair(self, X: Bimodule, Y: Bimodule, word=None) -> Bimodule:
        """Flatten X ⊗_{H} Y over the shared middle algebra."""
        key = (X.key, Y.key)
        hit = self._flats.get(key)
        if hit is not None:
            return hit
        word = tuple(word) if word is not None else X.word + Y.word
        if X.is_zero() or Y.is_zero():
            return self._zero_bimodule(word, Y.bot if Y.bot is not None else X.bot)
        if X.bot != Y.top:
            raise ValueError(f"cannot glue {X} over {Y}: weights differ")
        alg = self.algebra(X.bot)
        ambient = pair_space(
            X.space, Y.space, lambda u, v: X.label_bot(u) == Y.label_top(v)
        )
        xs_by_bot: dict[int, list] = {}
        for d in X.space.degrees:
            for j, u in enumerate(X.space.labels(d)):
                xs_by_bot.setdefault(X.label_bot(u), []).append((d, j, u))
        ys_by_top: dict[int, list] = {}
        for d in Y.space.degrees:
            for j, v in enumerate(Y.space.labels(d)):
                ys_by_top.setdefault(Y.label_top(v), []).append((d, j, v))
        rels = []
        seen = set()
        for dh in alg.space.degrees:
            for h in alg.space.labels(dh):
                ti, bi, hlab = h
                if ti == bi and not any(hlab):
                    continue  # idempotents balance identically on compatible pairs
                rx = X.act_right(h)
                ly = Y.act_left(h)
                # balance x·h ⊗ y against x ⊗ h·y over the pairs the block
                # (ti, bi) can see; both images stay inside the compatible
                # ambient because the actions swap exactly those matchings
                for du, ju, u in xs_by_bot.get(ti, ()):
                    ucol = rx.column(du, ju)
                    ulabs = X.space.labels(du + rx.offset)
                    for dv, jv, v in ys_by_top.get(bi, ()):
                        vcol = ly.column(dv, jv)
                        vlabs = Y.space.labels(dv + ly.offset)
                        td = du + dv + dh
                        vec = [0] * ambient.dim(td)
                        for c, ul in zip(ucol, ulabs):
                            if c:
                                _, pos = ambient.index((ul, v))
                                vec[pos] = (vec[pos] + c) % 2
                        for c, vl in zip(vcol, vlabs):
                            if c:
                                _, pos = ambient.index((u, vl))
                                vec[pos] = (vec[pos] + c) % 2
                        if not any(vec):
                            continue
                        fp = (td, bytes(vec))
                        if fp in seen:
                            continue
                        seen.add(fp)
                        rels.append((td, vec))
        quotient, project, section = quotient_with_section(F2, ambient, rels)
        out = Bimodule(
            self,
            "flat",
            word,
            Y.bot,
            X.top,
            quotient,
            gen=X,
            rest=Y,
            ambient=ambient,
            project=project,
            section=section,
        )
        self._flats[key] = out
        return out

    # -- comparison isomorphisms ---------------------------------------------

    def chi(self, w: Word, lam) -> GradedMap:
        """Comparison isomorphism from the flattened space onto geometry."""
        key = (tuple(w), tuple(lam))
        hit = self._chi.get(key)
        if hit is not None:
            return hit
        B = self.word_bimodule(w, lam)
        if B.is_zero():
            out = GradedMap.zero(F2, B.space, B.space, 0)
        elif B.kind in ("id", "leaf"):
            out = GradedMap.identity(F2, B.space)
        else:
            geo = self.geometry(w, lam)
            rest_geo = self.geometry(w[1:], lam)
            leaf_geo = B.gen.geo
            chi_rest = self.chi(w[1:], lam)
            mid = pair_space(
                B.gen.space,
                rest_geo.space,
                lambda u, v: u[1] == v[0],
            )
            step = tensor_map(
                F2, GradedMap.identity(F2, B.gen.space), chi_rest, B.ambient, mid
            )
            stack = self._stack_map(leaf_geo, rest_geo, geo, mid)
            out = stack @ step @ B.section
        self._chi[key] = out
        return out

    def chi_inv(self, w: Word, lam) -> GradedMap:
        key = (tuple(w), tuple(lam))
        hit = self._chi_inv.get(key)
        if hit is None:
            hit = invert_graded_map(self.chi(w, lam))
            self._chi_inv[key] = hit
        return hit

    def _stack_map(
        self,
        leaf_geo: WordGeometry,
        rest_geo: WordGeometry,
        tgt_geo: WordGeometry,
        mid: GradedSpace,
    ) -> GradedMap:
        """Glue leaf-over-rest pairs into whole-word closures by surgery."""
        mr = rest_geo.rows
        act = rest_geo.top_act
        entries: dict = {}
        for d in mid.degrees:
            for u, v in mid.labels(d):
                tu, bu, ulab = u
                tv, bv, vlab = v
                edges = [
                    ((r1 + mr + 1, c1), (r2 + mr + 1, c2))
                    for (r1, c1), (r2, c2) in leaf_geo.edges[(tu, bu)]
                ]
                edges += list(rest_geo.edges[(tv, bv)])
                pairs = [
                    (
                        ((mr, act[p]), (mr, act[q])),
                        ((mr + 1, act[p]), (mr + 1, act[q])),
                    )
                    for p, q in contraction_order(rest_geo.top_matchings[tv])
                ]
                start = components(edges)
                plan = []
                for c in start:
                    if c[0][0] >= mr + 1 and all(r >= mr + 1 for r, _ in c):
                        back = tuple(sorted((r - mr - 1, col) for r, col in c))
                        plan.append(("g", leaf_geo.circles[(tu, bu)].index(back)))
                    else:
                        plan.append(("r", rest_geo.circles[(tv, bv)].index(c)))
                init = tuple(
                    ulab[k] if what == "g" else vlab[k] for what, k in plan
                )
                final, states = contract_pairs(edges, pairs, {init: 1})
                if not states:
                    continue
                tgt_circ = tgt_geo.circles[(tu, bv)]
                tgt_pt = {pt: k for k, c in enumerate(tgt_circ) for pt in c}
                perm = []
                for c in final:
                    hits = {tgt_pt[(r if r <= mr else r - 1, col)] for r, col in c}
                    assert len(hits) == 1
                    perm.append(hits.pop())
                assert sorted(perm) == list(range(len(tgt_circ)))
                for labs, coeff in states.items():
                    out = [0] * len(tgt_circ)
                    for slot, l in zip(perm, labs):
                        out[slot] = l
                    key = ((u, v), (tu, bv, tuple(out)))
                    entries[key] = entries.get(key, 0) ^ (coeff & 1)
        entries = {k: c for k, c in entries.items() if c}
        return GradedMap.from_entries(F2, mid, tgt_geo.space, 0, entries)

    def cmp(self, v: Word, z: Word, lam) -> GradedMap:
        """Iso from B(v ++ z) onto the flattening of B(v) ⊗ B(z)."""
        v, z, lam = tuple(v), tuple(z), tuple(lam)
        key = (v, z, lam)
        hit = self._cmp.get(key)
        if hit is not None:
            return hit
        out = self._build_cmp(v, z, lam)
        self._cmp[key] = out
        return out

    def cmp_inv(self, v: Word, z: Word, lam) -> GradedMap:
        key = (tuple(v), tuple(z), tuple(lam))
        hit = self._cmp_inv.get(key)
        if hit is None:
            c = self.cmp(*key)
            if c.src.is_zero() and c.tgt.is_zero():
                hit = c
            else:
                hit = invert_graded_map(c)
            self._cmp_inv[key] = hit
        return hit

    def _build_cmp(self, v: Word, z: Word, lam) -> GradedMap:
        whole = self.word_bimodule(v + z, lam)
        Bz = self.word_bimodule(z, lam)
        if whole.is_zero() or Bz.is_zero():
            Bv = (
                self.word_bimodule(v, Bz.top)
                if not Bz.is_zero()
                else self._zero_bimodule(v, lam)
            )
            FP = self.flatten_pair(Bv, Bz)
            return GradedMap.zero(F2, whole.space, FP.space, 0)
        Bv = self.word_bimodule(v, Bz.top)
        FP = self.flatten_pair(Bv, Bz)
        if whole.is_zero() or Bv.is_zero():
            return GradedMap.zero(F2, whole.space, FP.space, 0)
        if not z:
            return self._runit_inv(whole, FP)
        if len(v) == 1:
            # B(v ++ z) is literally flatten_pair(leaf, B(z)) here
            assert whole is FP
            return GradedMap.identity(F2, whole.space)
        if not v:
            # unitor inverse: x ↦ class of e_{top(x)} ⊗ x
            alg = self.algebra(Bz.top)
            entries = {}
            for d in Bz.space.degrees:
                for x in Bz.space.labels(d):
                    mi = Bz.label_top(x)
                    e = (mi, mi, (0,) * len(alg.circles[(mi, mi)]))
                    entries[(x, (e, x))] = 1
            emb = GradedMap.from_entries(F2, Bz.space, FP.ambient, 0, entries)
            return FP.project @ emb
        vp = v[1:]
        inner = self.cmp(vp, z, lam)  # B(vp ++ z) -> flat(B(vp) ⊗ B(z))
        leaf = whole.gen
        FP1 = self.flatten_pair(self.word_bimodule(vp, Bz.top), Bz)
        T1 = self.flatten_pair(leaf, FP1)
        step1 = (
            T1.project
            @ tensor_map(
                F2,
                GradedMap.identity(F2, leaf.space),
                inner,
                whole.ambient,
                T1.ambient,
            )
            @ whole.section
        )
        step2 = self._assoc(leaf, self.word_bimodule(vp, Bz.top), Bz)
        return step2 @ step1

    def _assoc(self, X: Bimodule, Y: Bimodule, Z: Bimodule) -> GradedMap:
        """flat(X ⊗ flat(Y ⊗ Z)) → flat(flat(X ⊗ Y) ⊗ Z), via sections."""
        FYZ = self.flatten_pair(Y, Z)
        FXY = self.flatten_pair(X, Y)
        F_X_YZ = self.flatten_pair(X, FYZ)
        F_XY_Z = self.flatten_pair(FXY, Z)
        m1 = pair_space(
            X.space, FYZ.ambient, lambda u, yz: X.label_bot(u) == Y.label_top(yz[0])
        )
        s1 = tensor_map(
            F2, GradedMap.identity(F2, X.space), FYZ.section, F_X_YZ.ambient, m1
        )
        m2 = pair_space(
            FXY.ambient, Z.space, lambda xy, w: Y.label_bot(xy[1]) == Z.label_top(w)
        )
        ra = _relabel_map(F2, m1, m2, lambda lab: ((lab[0], lab[1][0]), lab[1][1]))
        p2 = tensor_map(
            F2, FXY.project, GradedMap.identity(F2, Z.space), m2, F_XY_Z.ambient
        )
        return F_XY_Z.project @ p2 @ ra @ s1 @ F_X_YZ.section

    def _runit_inv(self, X: Bimodule, FP: Bimodule) -> GradedMap:
        """X.space → flat(X ⊗ B_id).space, x ↦ class of x ⊗ e_{bot(x)}."""
        alg = self.algebra(X.bot)
        entries = {}
        for d in X.space.degrees:
            for x in X.space.labels(d):
                bi = X.label_bot(x)
                e = (bi, bi, (0,) * len(alg.circles[(bi, bi)]))
                entries[(x, (x, e))] = 1
        emb = GradedMap.from_entries(F2, X.space, FP.ambient, 0, entries)
        return FP.project @ emb

    def _runit(self, X: Bimodule, FP: Bimodule) -> GradedMap:
        """flat(X ⊗ B_id).space → X.space, class of x ⊗ h ↦ x·h."""
        entries: dict = {}
        for d in FP.ambient.degrees:
            for lab in FP.ambient.labels(d):
                x, h = lab
                dx, jx = X.space.index(x)
                act = X.act_right(h)
                col = act.column(dx, jx)
                tlabs = X.space.labels(dx + act.offset)
                for i, c in enumerate(col):
                    if c:
                        key = (lab, tlabs[i])
                        entries[key] = entries.get(key, 0) ^ (c & 1)
        entries = {k: c for k, c in entries.items() if c}
        glue = GradedMap.from_entries(F2, FP.ambient, X.space, 0, entries)
        return glue @ FP.section

    # -- generator 2-morphisms ------------------------------------------------

    def identity_2mor(self, w: Word, lam) -> TwoMorphism:
        B = self.word_bimodule(w, lam)
        return TwoMorphism(B, B, GradedMap.identity(F2, B.space))

    def zero_2mor(self, src: Bimodule, tgt: Bimodule, degree: int = 0) -> TwoMorphism:
        return TwoMorphism(src, tgt, GradedMap.zero(F2, src.space, tgt.space, degree))

    def gen_y(self, i: int, lam) -> TwoMorphism:
        """The degree-2 dot on E_i I_λ."""
        B = self.word_bimodule((i,), lam)
        if B.is_zero():
            return self.zero_2mor(B, B, 2)
        layer = B.geo.layers[0]
        mark = (1, layer.p) if layer.kind == "cup" else (0, layer.p)
        entries = _inplace_entries(B.geo, mark, frob_dot)
        return TwoMorphism(
            B, B, GradedMap.from_entries(F2, B.space, B.space, 2, entries)
        )

    def gen_cup(self, i: int, lam) -> TwoMorphism:
        """∪_{i;λ} : I_λ → E_{−i} E_i I_λ of degree 1 + (α_i, λ)."""
        src = self.word_bimodule((), lam)
        tgt = self.word_bimodule((-i, i), lam)
        deg = 1 + cartan_pairing(i, lam)
        if tgt.is_zero():
            return self.zero_2mor(src, tgt, deg)
        sgeo, tgeo = src.geo, self.geometry((-i, i), lam)
        kinds = (tgeo.layers[0].kind, tgeo.layers[1].kind)
        m = abs(i)
        if kinds == ("relabel", "relabel"):
            entries = _transport_entries(sgeo, tgeo)
        elif kinds == ("cap", "cup"):
            entries = _saddle_entries(sgeo, tgeo, ((0, m), (0, m + 1)))
        elif kinds == ("cup", "cap"):
            entries = _birth_entries(sgeo, tgeo)
        else:  # pragma: no cover - the case analysis is exhaustive
            raise AssertionError(f"unexpected cup layers {kinds}")
        geo_map = GradedMap.from_entries(F2, sgeo.space, tgeo.space, deg, entries)
        return TwoMorphism(src, tgt, self.chi_inv((-i, i), lam) @ geo_map)

    def gen_cap(self, i: int, lam) -> TwoMorphism:
        """∩_{i;λ} : E_{−i} E_i I_λ → I_λ of degree 1 + (α_i, λ)."""
        src = self.word_bimodule((-i, i), lam)
        tgt = self.word_bimodule((), lam)
        deg = 1 + cartan_pairing(i, lam)
        if src.is_zero():
            return self.zero_2mor(src, tgt, deg)
        sgeo, tgeo = self.geometry((-i, i), lam), tgt.geo
        kinds = (sgeo.layers[0].kind, sgeo.layers[1].kind)
        if kinds == ("relabel", "relabel"):
            entries = _transport_entries(sgeo, tgeo)
        elif kinds == ("cap", "cup"):
            entries = _saddle_entries(sgeo, tgeo, _layer_marks(sgeo))
        elif kinds == ("cup", "cap"):
            entries = _death_entries(sgeo, tgeo)
        else:  # pragma: no cover
            raise AssertionError(f"unexpected cap layers {kinds}")
        geo_map = GradedMap.from_entries(F2, sgeo.space, tgeo.space, deg, entries)
        return TwoMorphism(src, tgt, geo_map @ self.chi((-i, i), lam))

    def gen_psi(self, i: int, j: int, lam) -> TwoMorphism:
        """ψ_{i,j;λ} : E_i E_j I_λ → E_j E_i I_λ for same-sign i, j."""
        if i * j <= 0:
            raise ValueError("the direct crossing needs indices of one sign")
        src = self.word_bimodule((i, j), lam)
        tgt = self.word_bimodule((j, i), lam)
        deg = -2 if i == j else (1 if abs(i - j) == 1 else 0)
        if src.is_zero() or tgt.is_zero():
            return self.zero_2mor(src, tgt, deg)
        sgeo = self.geometry((i, j), lam)
        if i == j:
            entries = _inplace_entries(sgeo, (1, abs(i)), frob_kappa)
            geo_map = GradedMap.from_entries(F2, sgeo.space, sgeo.space, deg, entries)
            chi = self.chi((i, j), lam)
            return TwoMorphism(src, tgt, self.chi_inv((j, i), lam) @ geo_map @ chi)
        tgeo = self.geometry((j, i), lam)
        if abs(i - j) > 1:
            entries = _transport_entries(sgeo, tgeo)
        else:
            entries = _saddle_entries(sgeo, tgeo, _layer_marks(sgeo))
        geo_map = GradedMap.from_entries(F2, sgeo.space, tgeo.space, deg, entries)
        return TwoMorphism(
            src, tgt, self.chi_inv((j, i), lam) @ geo_map @ self.chi((i, j), lam)
        )

    # -- whiskering and composition -------------------------------------------

    def whisker(self, left: Word, theta: TwoMorphism, right: Word) -> TwoMorphism:
        """1_left · θ · 1_right, pushed through the flattening data."""
        left, right = tuple(left), tuple(right)
        out = theta
        if right:
            lam_v = out.src.bot
            net = word_content(right)
            # the new base weight: right pulls λ back under its content
            lam = tuple(
                lam_v[p] + net.get(p, 0) - net.get(p + 1, 0)
                for p in range(len(lam_v))
            )
            v, w = out.src.word, out.tgt.word
            src2 = self.word_bimodule(v + right, lam)
            tgt2 = self.word_bimodule(w + right, lam)
            if src2.is_zero() or tgt2.is_zero():
                out = self.zero_2mor(src2, tgt2, out.degree)
            else:
                R = self.word_bimodule(right, lam)
                FPs = self.flatten_pair(out.src, R)
                FPt = self.flatten_pair(out.tgt, R)
                mid = (
                    FPt.project
                    @ tensor_map(
                        F2,
                        out.map,
                        GradedMap.identity(F2, R.space),
                        FPs.ambient,
                        FPt.ambient,
                    )
                    @ FPs.section
                )
                out = TwoMorphism(
                    src2,
                    tgt2,
                    self.cmp_inv(w, right, lam) @ mid @ self.cmp(v, right, lam),
                )
        for g in reversed(left):
            lam = out.src.bot
            src2 = self.word_bimodule((g,) + out.src.word, lam)
            tgt2 = self.word_bimodule((g,) + out.tgt.word, lam)
            if src2.is_zero() or tgt2.is_zero():
                out = self.zero_2mor(src2, tgt2, out.degree)
                continue
            leaf = self.word_bimodule((g,), out.src.top)
            FPs = self.flatten_pair(leaf, out.src)
            FPt = self.flatten_pair(leaf, out.tgt)
            mid = (
                FPt.project
                @ tensor_map(
                    F2,
                    GradedMap.identity(F2, leaf.space),
                    out.map,
                    FPs.ambient,
                    FPt.ambient,
                )
                @ FPs.section
            )
            # empty-word factors flatten to leaf ⊗ B_id, not the canonical
            # one-letter bimodule; bridge through the right unitor there
            pre = (
                GradedMap.identity(F2, src2.space)
                if FPs is src2
                else self._runit_inv(leaf, FPs)
            )
            post = (
                GradedMap.identity(F2, tgt2.space)
                if FPt is tgt2
                else self._runit(leaf, FPt)
            )
            out = TwoMorphism(src2, tgt2, post @ mid @ pre)
        return out

    def vcompose(self, second: TwoMorphism, first: TwoMorphism) -> TwoMorphism:
        if second.src.key != first.tgt.key:
            raise ValueError("vertical composition: words do not match")
        return TwoMorphism(first.src, second.tgt, second.map @ first.map)

    def check_bimodule_map(self, theta: TwoMorphism) -> bool:
        """Does θ commute with both actions on every basis element?"""
        src, tgt = theta.src, theta.tgt
        if src.is_zero() or tgt.is_zero():
            return theta.map.is_zero()
        if src.top != tgt.top or src.bot != tgt.bot:
            raise ValueError("2-morphism endpoints live over different weights")
        for side, lamside in (("L", src.top), ("R", src.bot)):
            alg = self.algebra(lamside)
            for d in alg.space.degrees:
                for h in alg.space.labels(d):
                    if side == "L":
                        lhs = theta.map @ src.act_left(h)
                        rhs = tgt.act_left(h) @ theta.map
                    else:
                        lhs = theta.map @ src.act_right(h)
                        rhs = tgt.act_right(h) @ theta.map
                    if not map_equal(lhs, rhs):
                        return False
        return True

    def summand_gdims_match_geometry(self, w: Word, lam) -> bool:
        """Independent dimension oracle: flattened vs direct closure."""
        B = self.word_bimodule(w, lam)
        geo = self.geometry(w, lam)
        if B.is_zero():
            return geo is Zero
        for pair in geo.circles:
            direct = {}
            for lab in _labelings(len(geo.circles[pair])):
                d = sum(DEG[l] for l in lab) + gamma(lam)
                direct[d] = direct.get(d, 0) + 1
            from .exactalg import LaurentPoly

            if B.summand_gdim(*pair) != LaurentPoly(direct):
                return False
        return True


def graded_dimension(B: Bimodule):
    """Graded dimension of the whole bimodule."""
    return graded_dim(B.space)

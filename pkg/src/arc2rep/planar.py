"""Crossingless matchings, flat tangles, closures, and generator tangles.

Everything here is purely geometric: matchings on 0-indexed points,
tangles as boundary pairings plus a closed-circle count, and the layered
diagrams of sl(n) words over active positions.  Circle extraction is done
once, by connected components of a degree-two point graph; downstream
modules rewrite edges (surgeries) and re-extract.

Points in layered diagrams are (row, sl_position) with rows counted from
the bottom; active positions are the 1-based coordinates carrying a 1 in
the ambient weight.
"""

from __future__ import annotations

from typing import NamedTuple

from .weights import OutOfRange, apply_root

Matching = tuple[tuple[int, int], ...]
Point = tuple[int, int]
Edge = tuple[Point, Point]


# ---------------------------------------------------------------------------
# crossingless matchings
# ---------------------------------------------------------------------------


def enumerate_matchings(r: int) -> list[Matching]:
    """All noncrossing perfect matchings of {0..2r-1}, deterministic order.

    Point 0 is matched to an odd-offset partner; both sides recurse.  The
    order is by increasing partner of the smallest point, recursively.
    """
    if r < 0:
        raise ValueError("negative point count")
    return [tuple(m) for m in _nc_match(tuple(range(2 * r)))]


def _nc_match(pts: tuple[int, ...]):
    if not pts:
        yield []
        return
    first = pts[0]
    for j in range(1, len(pts), 2):
        inner = pts[1:j]
        outer = pts[j + 1 :]
        for mi in _nc_match(inner):
            for mo in _nc_match(outer):
                yield [(first, pts[j])] + mi + mo


def matching_partner(m: Matching) -> dict[int, int]:
    out = {}
    for a, b in m:
        out[a] = b
        out[b] = a
    return out


# ---------------------------------------------------------------------------
# flat tangles
# ---------------------------------------------------------------------------

BOT, TOP = 0, 1


class FlatTangle(NamedTuple):
    """Planar tangle: boundary pairing over ((side, index)) plus circles."""

    bot: int
    top: int
    pairs: tuple[tuple[Point, Point], ...]
    circles: int = 0


def _norm_pairs(pairs) -> tuple:
    return tuple(sorted(tuple(sorted(p)) for p in pairs))


def identity_tangle(n: int) -> FlatTangle:
    return FlatTangle(n, n, _norm_pairs(((BOT, i), (TOP, i)) for i in range(n)))


def matching_cups(m: Matching) -> FlatTangle:
    """A matching drawn as cups: no bottom points, arcs open upward."""
    n = 2 * len(m)
    return FlatTangle(0, n, _norm_pairs(((TOP, a), (TOP, b)) for a, b in m))


def matching_caps(m: Matching) -> FlatTangle:
    n = 2 * len(m)
    return FlatTangle(n, 0, _norm_pairs(((BOT, a), (BOT, b)) for a, b in m))


def cup_tangle(n: int, j: int) -> FlatTangle:
    """Identity on n strands with a cup inserted at top positions j, j+1."""
    pairs = [((TOP, j), (TOP, j + 1))]
    pairs += [((BOT, i), (TOP, i if i < j else i + 2)) for i in range(n)]
    return FlatTangle(n, n + 2, _norm_pairs(pairs))


def cap_tangle(n: int, j: int) -> FlatTangle:
    """n strands with bottom points j, j+1 joined by a cap."""
    pairs = [((BOT, j), (BOT, j + 1))]
    pairs += [
        ((BOT, i), (TOP, i if i < j else i - 2)) for i in range(n) if i not in (j, j + 1)
    ]
    return FlatTangle(n, n - 2, _norm_pairs(pairs))


def reflect(t: FlatTangle) -> FlatTangle:
    """Reflection across a horizontal axis: top and bottom swap."""
    flip = {BOT: TOP, TOP: BOT}
    return FlatTangle(
        t.top,
        t.bot,
        _norm_pairs(((flip[s1], i1), (flip[s2], i2)) for (s1, i1), (s2, i2) in t.pairs),
        t.circles,
    )


def glue(upper: FlatTangle, lower: FlatTangle) -> FlatTangle:
    """Stack ``upper`` on top of ``lower``, closing interface circles."""
    if lower.top != upper.bot:
        raise ValueError(
            f"boundary mismatch: lower top {lower.top} vs upper bottom {upper.bot}"
        )
    # tag points: ("L", side, i) and ("U", side, i); interface identifies
    # ("L", TOP, k) with ("U", BOT, k)
    partner: dict = {}
    for (s1, i1), (s2, i2) in lower.pairs:
        partner[("L", s1, i1)] = ("L", s2, i2)
        partner[("L", s2, i2)] = ("L", s1, i1)
    for (s1, i1), (s2, i2) in upper.pairs:
        partner[("U", s1, i1)] = ("U", s2, i2)
        partner[("U", s2, i2)] = ("U", s1, i1)

    def across(p):
        tag, s, i = p
        if tag == "L" and s == TOP:
            return ("U", BOT, i)
        if tag == "U" and s == BOT:
            return ("L", TOP, i)
        return None

    boundary = [("L", BOT, i) for i in range(lower.bot)] + [
        ("U", TOP, i) for i in range(upper.top)
    ]
    seen: set = set()
    pairs = []
    for start in boundary:
        if start in seen:
            continue
        seen.add(start)
        cur = partner[start]
        while True:
            seen.add(cur)
            nxt = across(cur)
            if nxt is None:
                break
            seen.add(nxt)
            cur = partner[nxt]
        end = cur

        def ext(p):
            tag, s, i = p
            return (BOT, i) if (tag, s) == ("L", BOT) else (TOP, i)

        pairs.append((ext(start), ext(end)))
        seen.add(end)
    # unvisited interface points close up into circles
    new_circles = 0
    interface = [("L", TOP, k) for k in range(lower.top)]
    visited = set(seen)
    for start in interface:
        if start in visited:
            continue
        new_circles += 1
        cur = start
        while cur not in visited:
            visited.add(cur)
            nxt = partner[cur]
            visited.add(nxt)
            cur = across(nxt)
    return FlatTangle(
        lower.bot,
        upper.top,
        _norm_pairs(pairs),
        lower.circles + upper.circles + new_circles,
    )


class CircleDiagram(NamedTuple):
    """A closed diagram: circles as point tuples plus point-free circles."""

    circles: tuple[tuple[Point, ...], ...]
    free: int

    @property
    def count(self) -> int:
        return len(self.circles) + self.free

    def through(self, p: Point) -> int:
        """Index of the circle passing through point p."""
        for idx, c in enumerate(self.circles):
            if p in c:
                return idx
        raise KeyError(f"no circle through {p}")


def close(a: Matching, t: FlatTangle, b: Matching) -> CircleDiagram:
    """Close a tangle by cups ``b`` below and reflected caps ``a`` above.

    Returns the partition of the tangle's boundary points into circles;
    (BOT, i) are its bottom points, (TOP, j) its top points.
    """
    if 2 * len(b) != t.bot or 2 * len(a) != t.top:
        raise ValueError("matching sizes do not fit the tangle boundary")
    edges = list(t.pairs)
    edges += [((BOT, p), (BOT, q)) for p, q in b]
    edges += [((TOP, p), (TOP, q)) for p, q in a]
    return CircleDiagram(components(edges), t.circles)


# ---------------------------------------------------------------------------
# connected components of a degree-two point graph
# ---------------------------------------------------------------------------


def components(edges: list[Edge]) -> tuple[tuple[Point, ...], ...]:
    """Circles of an edge list: each point must occur on exactly two edge
    endpoints (parallel edges allowed).  Deterministic: circles sorted by
    minimal point, each circle's points sorted."""
    degree: dict[Point, int] = {}
    parent: dict[Point, Point] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p, q in edges:
        for x in (p, q):
            degree[x] = degree.get(x, 0) + 1
            parent.setdefault(x, x)
        rp, rq = find(p), find(q)
        if rp != rq:
            parent[rp] = rq
    bad = [p for p, d in degree.items() if d != 2]
    if bad:
        raise ValueError(f"points without exactly two incidences: {sorted(bad)[:4]}")
    groups: dict[Point, list[Point]] = {}
    for x in parent:
        groups.setdefault(find(x), []).append(x)
    return tuple(sorted(tuple(sorted(g)) for g in groups.values()))


# ---------------------------------------------------------------------------
# decorated generator tangles and layered word diagrams
# ---------------------------------------------------------------------------


class _Zero:
    """Sentinel for the zero functor (weight pushed out of range)."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Zero"

    def __bool__(self):
        return False


Zero = _Zero()


class DecoratedTangle(NamedTuple):
    """One elementary layer of a word diagram, over active positions only.

    kind is "relabel" (p: active position at the bottom, q: where it sits
    at the top), "cap" (arc joining bottom points p, q = p+1), or "cup"
    (arc joining top points p, q = p+1).  Inactive positions (labels 0, 2)
    are placeholders and carry no strands.
    """

    kind: str
    p: int
    q: int
    bot_positions: tuple[int, ...]
    top_positions: tuple[int, ...]
    bot_weight: tuple[int, ...]
    top_weight: tuple[int, ...]


def active_positions(lam) -> tuple[int, ...]:
    """1-based coordinates of the 1-entries."""
    return tuple(i + 1 for i, v in enumerate(lam) if v == 1)


def generator_tangle(i: int, lam) -> DecoratedTangle:
    """The elementary tangle of E_i applied at λ, or Zero."""
    nxt = apply_root(lam, i)
    if nxt is OutOfRange:
        return Zero
    m = abs(i)
    entries = (lam[m - 1], lam[m])
    if i > 0:
        kind, p, q = {
            (1, 2): ("relabel", m, m + 1),
            (0, 1): ("relabel", m + 1, m),
            (1, 1): ("cap", m, m + 1),
            (0, 2): ("cup", m, m + 1),
        }[entries]
    else:
        kind, p, q = {
            (2, 1): ("relabel", m + 1, m),
            (1, 0): ("relabel", m, m + 1),
            (1, 1): ("cap", m, m + 1),
            (2, 0): ("cup", m, m + 1),
        }[entries]
    return DecoratedTangle(
        kind, p, q, active_positions(lam), active_positions(nxt), tuple(lam), tuple(nxt)
    )


def layer_edges(layer: DecoratedTangle, t: int) -> list[Edge]:
    """Edges a layer contributes between row t (bottom) and row t+1 (top)."""
    if layer.kind == "relabel":
        edges = [((t, layer.p), (t + 1, layer.q))]
        verticals = [x for x in layer.bot_positions if x != layer.p]
    elif layer.kind == "cap":
        edges = [((t, layer.p), (t, layer.q))]
        verticals = [x for x in layer.bot_positions if x not in (layer.p, layer.q)]
    elif layer.kind == "cup":
        edges = [((t + 1, layer.p), (t + 1, layer.q))]
        verticals = list(layer.bot_positions)
    else:
        raise ValueError(f"unknown layer kind {layer.kind!r}")
    edges += [((t, x), (t + 1, x)) for x in verticals]
    return edges


def word_layers(lam, w):
    """Layers of the word diagram of E_{w_1}⋯E_{w_m} on λ, bottom-up.

    The rightmost letter acts first, so layers[0] belongs to w[-1].
    Returns Zero when any step leaves the weight set.
    """
    layers = []
    cur = tuple(lam)
    for i in reversed(w):
        g = generator_tangle(i, cur)
        if g is Zero:
            return Zero
        layers.append(g)
        cur = g.top_weight
    return layers


def word_rows(lam, w):
    """Active position tuples of rows 0..m of the word diagram, or Zero."""
    layers = word_layers(lam, w)
    if layers is Zero:
        return Zero
    rows = [active_positions(lam)]
    rows += [g.top_positions for g in layers]
    return rows


def closure_edges(lam, layers, b: Matching, a: Matching) -> list[Edge]:
    """Edge list of the closed word diagram: cups b below row 0, caps a
    above the top row, layer edges in between."""
    bot = active_positions(lam)
    top = layers[-1].top_positions if layers else bot
    if 2 * len(b) != len(bot) or 2 * len(a) != len(top):
        raise ValueError("matching sizes do not fit the rows")
    m = len(layers)
    edges: list[Edge] = []
    for t, layer in enumerate(layers):
        edges += layer_edges(layer, t)
    edges += [((0, bot[p]), (0, bot[q])) for p, q in b]
    edges += [((m, top[p]), (m, top[q])) for p, q in a]
    return edges

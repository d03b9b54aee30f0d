"""Piecewise-linear self-maps of metric trees.

A :class:`PLSelfMap` is determined by the images of the vertices: every edge
``[u, v]`` is carried onto the arc ``[f(u), f(v)]`` at constant speed (or
collapsed to a point when ``f(u) == f(v)``). Cutting each edge where its image
crosses a vertex gives a list of :class:`Piece` objects on which the map is
affine into a single edge; compositions ``f^m`` are built on the same
representation, which makes monotonicity and periodic points exactly
decidable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, NamedTuple, Sequence

from .tree import (Direction, MetricTree, TreeError, TreePoint, arc, as_fraction, on_arc,
                   direction, distance, point_from_dict, room)

DEFAULT_PIECE_BUDGET = 200_000


class ResourceBudgetExceeded(RuntimeError):
    """Symbolic composition produced more pieces than the configured budget."""


class Piece(NamedTuple):
    """``f`` restricted to ``[a, b]`` on ``edge``.

    Either constant (``const`` is the image point) or affine onto
    ``target`` with ``a -> c`` and ``b -> d``.
    """

    edge: int
    a: Fraction
    b: Fraction
    const: TreePoint | None
    target: int | None
    c: Fraction | None
    d: Fraction | None

    def image_offset(self, x: Fraction) -> Fraction:
        return self.c + (x - self.a) * (self.d - self.c) / (self.b - self.a)

    @property
    def slope(self) -> Fraction:
        if self.const is not None:
            return Fraction(0)
        return (self.d - self.c) / (self.b - self.a)


class PLSelfMap:
    """Continuous self-map of a tree, linear at constant speed on every edge."""

    def __init__(self, tree: MetricTree, images: Mapping | Sequence):
        if isinstance(images, Mapping):
            table = [None] * len(tree.vertices)
            for key, p in images.items():
                table[tree.vertex(key).vertex] = p
        else:
            table = list(images)
        if len(table) != len(tree.vertices) or any(p is None for p in table):
            raise TreeError("every vertex needs an image")
        for p in table:
            if p.tree is not tree and p.tree != tree:
                raise TreeError("vertex image lies on a different tree")
        self.tree = tree
        self.images = tuple(table)
        self.pieces = self._edge_pieces()
        self._hash = hash((tree, self.images))

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, PLSelfMap):
            return NotImplemented
        return self.tree == other.tree and self.images == other.images

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"PLSelfMap({', '.join(map(str, self.images))})"

    def __call__(self, p: TreePoint) -> TreePoint:
        return evaluate(self, p)

    def _edge_pieces(self) -> tuple:
        out = []
        for e, (u, v, length) in enumerate(self.tree.edges):
            fu, fv = self.images[u], self.images[v]
            path = arc(fu, fv)
            if path.degenerate:
                out.append((Piece(e, Fraction(0), length, fu, None, None, None),))
                continue
            total = path.length
            pieces, walked = [], Fraction(0)
            for seg in path.segments:
                a = length * walked / total
                walked += seg.length
                b = length * walked / total
                pieces.append(Piece(e, a, b, None, seg.edge, seg.start, seg.end))
            out.append(tuple(pieces))
        return tuple(out)

    def slope(self, edge: int) -> Fraction:
        u, v, length = self.tree.edges[edge]
        return distance(self.images[u], self.images[v]) / length

    # serialization

    def to_dict(self, inline_tree: bool = True) -> dict:
        out = {"vertex_images": {self.tree.vertices[i]: p.to_dict() for i, p in enumerate(self.images)}}
        if inline_tree:
            out["tree"] = self.tree.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict, tree: MetricTree | None = None) -> "PLSelfMap":
        if tree is None:
            if "tree" not in data:
                raise TreeError("map description needs a 'tree' field")
            tree = MetricTree.from_dict(data["tree"])
        try:
            images = {k: point_from_dict(tree, v) for k, v in data["vertex_images"].items()}
        except KeyError as exc:
            raise TreeError(f"malformed map description: missing field {exc}") from exc
        return cls(tree, images)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _find_piece(pieces: Sequence[Piece], x: Fraction) -> Piece:
    lo, hi = 0, len(pieces) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if x > pieces[mid].b:
            lo = mid + 1
        else:
            hi = mid
    return pieces[lo]


def _apply_piece(tree: MetricTree, piece: Piece, x: Fraction) -> TreePoint:
    if piece.const is not None:
        return piece.const
    return tree.point(piece.target, piece.image_offset(x))


def evaluate(f: PLSelfMap, p: TreePoint) -> TreePoint:
    if p.tree is not f.tree and p.tree != f.tree:
        raise TreeError("point is not on the map's tree")
    if p.vertex is not None:
        return f.images[p.vertex]
    return _apply_piece(f.tree, _find_piece(f.pieces[p.edge], p.offset), p.offset)


def iterate(f: PLSelfMap, p: TreePoint, n: int) -> TreePoint:
    for _ in range(n):
        p = evaluate(f, p)
    return p


# ---------------------------------------------------------------------------
# composition


def _merge(pieces: list) -> list:
    """Join neighbouring pieces that are one affine map."""
    out = []
    for pc in pieces:
        if out:
            last = out[-1]
            if last.b == pc.a:
                if last.const is not None and pc.const is not None and last.const == pc.const:
                    out[-1] = last._replace(b=pc.b)
                    continue
                if (last.const is None and pc.const is None and last.target == pc.target
                        and last.d == pc.c and last.slope == pc.slope):
                    out[-1] = last._replace(b=pc.b, d=pc.d)
                    continue
        out.append(pc)
    return out


def compose_pieces(tree: MetricTree, inner: tuple, outer: tuple, budget: int = DEFAULT_PIECE_BUDGET) -> tuple:
    """Pieces of ``outer o inner`` (apply ``inner`` first)."""
    result, count = [], 0
    for edge_pieces in inner:
        new = []
        for P in edge_pieces:
            if P.const is not None:
                q = P.const
                img = evaluate_pieces(tree, outer, q)
                new.append(Piece(P.edge, P.a, P.b, img, None, None, None))
                continue
            lo, hi = min(P.c, P.d), max(P.c, P.d)
            chunks = []
            for Q in outer[P.target]:
                s, t = max(lo, Q.a), min(hi, Q.b)
                if s >= t:
                    continue
                # pull [s, t] back through P
                xs = P.a + (s - P.c) * (P.b - P.a) / (P.d - P.c)
                xt = P.a + (t - P.c) * (P.b - P.a) / (P.d - P.c)
                x0, x1 = (xs, xt) if xs < xt else (xt, xs)
                if Q.const is not None:
                    chunks.append(Piece(P.edge, x0, x1, Q.const, None, None, None))
                else:
                    y0, y1 = P.image_offset(x0), P.image_offset(x1)
                    chunks.append(Piece(P.edge, x0, x1, None, Q.target,
                                        Q.image_offset(y0), Q.image_offset(y1)))
            chunks.sort(key=lambda pc: pc.a)
            new.extend(chunks)
        merged = tuple(_merge(new))
        count += len(merged)
        if count > budget:
            raise ResourceBudgetExceeded(f"composition needs more than {budget} pieces")
        result.append(merged)
    return tuple(result)


def evaluate_pieces(tree: MetricTree, pieces: tuple, p: TreePoint) -> TreePoint:
    if p.vertex is not None:
        e = tree.incident[p.vertex][0]
        x = p.on_edge(e)
    else:
        e, x = p.edge, p.offset
    return _apply_piece(tree, _find_piece(pieces[e], x), x)


@lru_cache(maxsize=256)
def power_pieces(f: PLSelfMap, m: int, budget: int = DEFAULT_PIECE_BUDGET) -> tuple:
    """Pieces of ``f^m`` (m >= 1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1:
        return f.pieces
    return compose_pieces(f.tree, power_pieces(f, m - 1, budget), f.pieces, budget)


# ---------------------------------------------------------------------------
# monotonicity


class Interval(NamedTuple):
    """Closed sub-interval ``[lo, hi]`` of an edge (a point when lo == hi)."""

    edge: int
    lo: Fraction
    hi: Fraction


def _touch(tree: MetricTree, a: Interval, b: Interval) -> bool:
    if a.edge == b.edge:
        return a.lo <= b.hi and b.lo <= a.hi

    def ends(iv):
        u, v, length = tree.edges[iv.edge]
        out = set()
        if iv.lo == 0:
            out.add(u)
        if iv.hi == length:
            out.add(v)
        return out

    return bool(ends(a) & ends(b))


def _components(tree: MetricTree, parts: Sequence[Interval]) -> list:
    parent = list(range(len(parts)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            if _touch(tree, parts[i], parts[j]):
                parent[find(i)] = find(j)
    groups = {}
    for i, part in enumerate(parts):
        groups.setdefault(find(i), []).append(part)
    return list(groups.values())


def preimage(pieces: tuple, tree: MetricTree, y: TreePoint) -> list:
    """The preimage of y as a list of closed edge intervals."""
    parts = []
    for edge_pieces in pieces:
        for P in edge_pieces:
            if P.const is not None:
                if P.const == y:
                    parts.append(Interval(P.edge, P.a, P.b))
                continue
            oy = y.on_edge(P.target)
            if oy is None or not min(P.c, P.d) <= oy <= max(P.c, P.d):
                continue
            x = P.a + (oy - P.c) * (P.b - P.a) / (P.d - P.c)
            parts.append(Interval(P.edge, x, x))
    return sorted(set(parts))


@dataclass(frozen=True)
class MonotonicityVerdict:
    monotone: bool
    witness: TreePoint | None = None
    preimage: tuple = ()
    tested: int = 0

    def __bool__(self):
        return self.monotone


def _test_points(f: PLSelfMap, pieces: tuple) -> list:
    tree = f.tree
    order = sorted(range(len(tree.vertices)), key=lambda v: (-tree.degree(v), v))
    points = [tree.vertex(v) for v in order]
    cuts = {e: {Fraction(0), length} for e, (_, _, length) in enumerate(tree.edges)}
    for edge_pieces in pieces:
        for P in edge_pieces:
            if P.const is not None:
                if P.const.edge is not None:
                    cuts[P.const.edge].add(P.const.offset)
            else:
                cuts[P.target].update((P.c, P.d))
    mids = []
    for e in sorted(cuts):
        marks = sorted(cuts[e])
        points.extend(tree.point(e, x) for x in marks[1:-1])
        mids.extend(tree.point(e, (x + y) / 2) for x, y in zip(marks, marks[1:]))
    return points + mids


def monotonicity(f: PLSelfMap, m: int = 1) -> MonotonicityVerdict:
    """Exact monotonicity test for ``f^m``.

    On each open cell of the image subdivision every piece either covers the
    cell or misses it, so the shape of the preimage is constant there; testing
    every vertex, every cut point and one point per cell is therefore complete.
    """
    pieces = power_pieces(f, m)
    tested = 0
    for y in _test_points(f, pieces):
        tested += 1
        parts = preimage(pieces, f.tree, y)
        if not parts:
            continue
        comps = _components(f.tree, parts)
        if len(comps) > 1:
            return MonotonicityVerdict(False, y, tuple(parts), tested)
    return MonotonicityVerdict(True, None, (), tested)


@lru_cache(maxsize=1024)
def is_monotone(f: PLSelfMap) -> MonotonicityVerdict:
    return monotonicity(f, 1)


def is_bijective(f: PLSelfMap) -> bool:
    """True iff f is a homeomorphism: no collapsed piece and every point has exactly one preimage."""
    if any(P.const is not None for ps in f.pieces for P in ps):
        return False
    for y in _test_points(f, f.pieces):
        comps = _components(f.tree, preimage(f.pieces, f.tree, y))
        if len(comps) != 1 or any(iv.lo != iv.hi for c in comps for iv in c):
            return False
        pts = {f.tree.point(iv.edge, iv.lo) for iv in comps[0]}
        if len(pts) != 1:
            return False
    return True


# ---------------------------------------------------------------------------
# periodic points


@dataclass(frozen=True)
class FixedSet:
    """Fixed points of ``f^m``: isolated points plus pointwise fixed edge intervals."""

    m: int
    points: frozenset
    cells: tuple

    def contains(self, p: TreePoint) -> bool:
        if p in self.points:
            return True
        return any(_in_interval(p, iv) for iv in self.cells)


def _in_interval(p: TreePoint, iv: Interval) -> bool:
    x = p.on_edge(iv.edge)
    return x is not None and iv.lo <= x <= iv.hi


@lru_cache(maxsize=1024)
def fixed_set(f: PLSelfMap, m: int, budget: int = DEFAULT_PIECE_BUDGET) -> FixedSet:
    """Solve ``f^m(x) = x`` cell by cell; candidates are confirmed by direct iteration."""
    tree = f.tree
    pieces = power_pieces(f, m, budget)
    candidates, cells = set(), []
    for edge_pieces in pieces:
        for P in edge_pieces:
            candidates.add(tree.point(P.edge, P.a))
            candidates.add(tree.point(P.edge, P.b))
            if P.const is not None:
                x = P.const.on_edge(P.edge)
                if x is not None and P.a <= x <= P.b:
                    candidates.add(P.const)
                continue
            if P.target != P.edge:
                continue
            k = P.slope
            if k == 1:
                if P.c == P.a:
                    cells.append(Interval(P.edge, P.a, P.b))
                continue
            x = (P.c - k * P.a) / (1 - k)
            if P.a <= x <= P.b:
                candidates.add(tree.point(P.edge, x))
    cells = _merge_cells(cells)
    points = frozenset(p for p in candidates
                       if iterate(f, p, m) == p and not any(_in_interval(p, iv) for iv in cells))
    return FixedSet(m, points, tuple(cells))


def _merge_cells(cells: list) -> list:
    out = []
    for iv in sorted(cells):
        if out and out[-1].edge == iv.edge and iv.lo <= out[-1].hi:
            out[-1] = out[-1]._replace(hi=max(out[-1].hi, iv.hi))
        else:
            out.append(iv)
    return out


def minimal_period(f: PLSelfMap, p: TreePoint, limit: int) -> int | None:
    q = p
    for n in range(1, limit + 1):
        q = evaluate(f, q)
        if q == p:
            return n
    return None


@dataclass(frozen=True)
class PeriodicPoint:
    """A periodic point, or a representative of a pointwise-periodic cell when ``cell`` is set."""

    point: TreePoint
    period: int
    cell: Interval | None = None

    def distance_to(self, p: TreePoint) -> Fraction:
        if self.cell is None:
            return distance(self.point, p)
        tree = p.tree
        lo, hi = tree.point(self.cell.edge, self.cell.lo), tree.point(self.cell.edge, self.cell.hi)
        if _in_interval(p, self.cell):
            return Fraction(0)
        return min(distance(p, lo), distance(p, hi))


def _cell_gaps(iv: Interval, covered: Sequence[Interval]) -> list:
    """Parts of iv not covered by the given intervals on the same edge."""
    pieces = [(iv.lo, iv.hi)]
    for c in covered:
        if c.edge != iv.edge:
            continue
        nxt = []
        for lo, hi in pieces:
            if c.hi <= lo or c.lo >= hi:
                nxt.append((lo, hi))
                continue
            if lo < c.lo:
                nxt.append((lo, c.lo))
            if c.hi < hi:
                nxt.append((c.hi, hi))
        pieces = nxt
    return [Interval(iv.edge, lo, hi) for lo, hi in pieces if lo < hi]


def _cell_representative(f: PLSelfMap, iv: Interval, m: int) -> PeriodicPoint:
    # a pointwise-periodic cell holds finitely many points of smaller period
    span = iv.hi - iv.lo
    for den in range(2, 64):
        for num in range(1, den):
            p = f.tree.point(iv.edge, iv.lo + span * num / den)
            if minimal_period(f, p, m) == m:
                return PeriodicPoint(p, m, iv)
    p = f.tree.point(iv.edge, iv.lo + span / 2)
    return PeriodicPoint(p, minimal_period(f, p, m), iv)


def periodic_points(f: PLSelfMap, max_period: int, budget: int = DEFAULT_PIECE_BUDGET) -> list:
    """Periodic points with period <= max_period.

    Isolated solutions are listed individually. A pointwise-periodic cell of
    ``f^m`` is listed once, with a representative of minimal period m; points
    of smaller period inside it are listed separately.
    """
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    found: dict = {}
    cells: list = []
    for m in range(1, max_period + 1):
        fs = fixed_set(f, m, budget)
        for p in sorted(fs.points):
            if p not in found and not any(_in_interval(p, c.cell) for c in cells):
                found[p] = PeriodicPoint(p, minimal_period(f, p, m))
        earlier = [c.cell for c in cells]
        for iv in fs.cells:
            for gap in _cell_gaps(iv, earlier):
                cells.append(_cell_representative(f, gap, m))
        # points of f^j (j < m) lying inside a new cell are still isolated for their period
        for iv in fs.cells:
            for j in range(1, m):
                for p in fixed_set(f, j, budget).points:
                    if _in_interval(p, iv) and p not in found:
                        found[p] = PeriodicPoint(p, minimal_period(f, p, j))
    return sorted(list(found.values()) + cells, key=lambda pp: (pp.period, pp.point.sort_key()))


def distance_to_periodic(p: TreePoint, table: Sequence[PeriodicPoint]) -> Fraction | None:
    return min((pp.distance_to(p) for pp in table), default=None)


# ---------------------------------------------------------------------------
# one-sided linearization


@dataclass(frozen=True)
class Germ:
    """Local form of a map at ``point`` in a direction.

    For ``0 <= t <= reach`` the point at distance t from the base point in the
    given direction is sent to distance ``slope * t`` from ``image`` in
    ``image_direction`` (or to ``image`` itself when the slope is 0).
    """

    image: TreePoint
    image_direction: Direction | None
    slope: Fraction
    reach: Fraction


def germ(f: PLSelfMap, p: TreePoint, d: Direction) -> Germ:
    tree = f.tree
    e, sign = d
    x = p.on_edge(e)
    if x is None:
        raise TreeError(f"direction {d} does not start at {p}")
    span = room(p, d)
    if span == 0:
        raise TreeError(f"direction {d} points out of the tree at {p}")
    ps = f.pieces[e]
    # the piece on the side of x that the direction enters
    P = None
    for cand in ps:
        if (sign > 0 and cand.a <= x < cand.b) or (sign < 0 and cand.a < x <= cand.b):
            P = cand
            break
    span = min(span, (P.b - x) if sign > 0 else (x - P.a))
    image = _apply_piece(tree, P, x)
    if P.const is not None:
        return Germ(image, None, Fraction(0), span)
    k = abs(P.slope)
    far = _apply_piece(tree, P, P.b if sign > 0 else P.a)
    img_dir = direction(image, far)
    return Germ(image, img_dir, k, span)


def germ_power(f: PLSelfMap, p: TreePoint, d: Direction, r: int) -> Germ:
    """Germ of ``f^r`` at p in direction d (r >= 0)."""
    point, dirn, slope, reach = p, d, Fraction(1), room(p, d)
    for _ in range(r):
        if dirn is None:
            point = evaluate(f, point)
            continue
        g = germ(f, point, dirn)
        reach = min(reach, g.reach / slope)
        slope *= g.slope
        point, dirn = g.image, g.image_direction
        if slope == 0:
            dirn = None
    return Germ(point, dirn, slope, reach)


def arc_image_check(f: PLSelfMap, x: TreePoint, y: TreePoint) -> bool:
    """Exact check that ``f([x, y])`` lies in ``[f(x), f(y)]``.

    f is affine between consecutive breakpoints on the arc, so it is enough
    to test the arc ends and every piece boundary crossed by the arc.
    """
    fx, fy = evaluate(f, x), evaluate(f, y)
    tree = f.tree
    for seg in arc(x, y).segments:
        lo, hi = sorted((seg.start, seg.end))
        marks = {lo, hi} | {v for P in f.pieces[seg.edge] for v in (P.a, P.b) if lo < v < hi}
        for t in marks:
            if not on_arc(evaluate(f, tree.point(seg.edge, t)), fx, fy):
                return False
    return on_arc(fx, fx, fy) and on_arc(fy, fx, fy)

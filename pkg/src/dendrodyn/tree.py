"""Exact geometry of finite metric trees.

A :class:`MetricTree` is a finite weighted tree with rational edge lengths and
the geodesic (arc-length) metric. Points are :class:`TreePoint` values, either
a vertex or an interior point of an edge given by its offset from the edge's
first endpoint. Everything is computed with :class:`fractions.Fraction`, so
equality of points and distances is decidable.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence, Union

Rational = Union[int, Fraction]
# (edge id, +1 | -1): leave a point along an edge towards its v-end (+1) or u-end (-1)
Direction = tuple


class TreeError(ValueError):
    """Malformed tree, or points taken from different trees."""


def as_fraction(value) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings into a Fraction (floats are rejected)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def format_fraction(value: Rational) -> str:
    value = as_fraction(value)
    return f"{value.numerator}/{value.denominator}"


class MetricTree:
    """Finite tree with positive rational edge lengths.

    ``vertices`` is a list of string identifiers and ``edges`` a list of
    ``(u, v, length)`` triples. Edge ids are list positions; an edge point's
    offset is measured from ``u``.
    """

    def __init__(self, vertices: Sequence[str], edges: Sequence[tuple]):
        vertices = [str(v) for v in vertices]
        if not vertices:
            raise TreeError("a tree needs at least one vertex")
        if len(set(vertices)) != len(vertices):
            raise TreeError("duplicate vertex identifiers")
        index = {name: i for i, name in enumerate(vertices)}
        if len(edges) != len(vertices) - 1:
            raise TreeError(
                f"a tree on {len(vertices)} vertices needs {len(vertices) - 1} edges, got {len(edges)}")
        norm = []
        for k, (u, v, length) in enumerate(edges):
            ui, vi = self._lookup(index, u), self._lookup(index, v)
            if ui == vi:
                raise TreeError(f"edge {k} is a loop")
            length = as_fraction(length)
            if length <= 0:
                raise TreeError(f"edge {k} has non-positive length {length}")
            norm.append((ui, vi, length))
        self.vertices = tuple(vertices)
        self.index = index
        self.edges = tuple(norm)
        incident = [[] for _ in vertices]
        for k, (ui, vi, _) in enumerate(norm):
            incident[ui].append(k)
            incident[vi].append(k)
        self.incident = tuple(tuple(x) for x in incident)
        self._build_tables()
        self._hash = hash((self.vertices, self.edges))

    @staticmethod
    def _lookup(index, v) -> int:
        if isinstance(v, int) and not isinstance(v, bool):
            if 0 <= v < len(index):
                return v
            raise TreeError(f"vertex index {v} out of range")
        try:
            return index[str(v)]
        except KeyError:
            raise TreeError(f"unknown vertex {v!r}") from None

    def _build_tables(self):
        n = len(self.vertices)
        dist = [[None] * n for _ in range(n)]
        hop = [[None] * n for _ in range(n)]
        for s in range(n):
            dist[s][s] = Fraction(0)
            queue = deque([s])
            while queue:
                a = queue.popleft()
                for e in self.incident[a]:
                    u, v, length = self.edges[e]
                    b = v if a == u else u
                    if dist[s][b] is None:
                        dist[s][b] = dist[s][a] + length
                        hop[s][b] = e if a == s else hop[s][a]
                        queue.append(b)
            if any(d is None for d in dist[s]):
                raise TreeError("the edges do not connect all vertices")
        self._dist = dist
        # hop[a][b]: first edge on the path a -> b
        self._hop = hop

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, MetricTree):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"MetricTree({len(self.vertices)} vertices)"

    # construction helpers

    @classmethod
    def path(cls, lengths: Sequence[Rational], names: Sequence[str] | None = None) -> "MetricTree":
        """Path graph with the given consecutive edge lengths."""
        names = list(names) if names is not None else [f"p{i}" for i in range(len(lengths) + 1)]
        return cls(names, [(names[i], names[i + 1], lengths[i]) for i in range(len(lengths))])

    @classmethod
    def star(cls, lengths: Sequence[Rational], center: str = "c") -> "MetricTree":
        leaves = [f"l{i}" for i in range(len(lengths))]
        return cls([center] + leaves, [(center, leaf, ln) for leaf, ln in zip(leaves, lengths)])

    def vertex(self, v) -> "TreePoint":
        return TreePoint(self, self._lookup(self.index, v), None, None)

    def point(self, edge: int, offset: Rational) -> "TreePoint":
        """Point on ``edge`` at ``offset`` from its first endpoint, in canonical form."""
        if not 0 <= edge < len(self.edges):
            raise TreeError(f"edge {edge} out of range")
        offset = as_fraction(offset)
        u, v, length = self.edges[edge]
        if offset < 0 or offset > length:
            raise TreeError(f"offset {offset} outside [0, {length}] on edge {edge}")
        if offset == 0:
            return TreePoint(self, u, None, None)
        if offset == length:
            return TreePoint(self, v, None, None)
        return TreePoint(self, None, edge, offset)

    def points(self) -> list:
        return [self.vertex(i) for i in range(len(self.vertices))]

    def degree(self, v: int) -> int:
        return len(self.incident[v])

    def leaves(self) -> list:
        return [i for i in range(len(self.vertices)) if self.degree(i) == 1]

    def vertex_distance(self, a: int, b: int) -> Fraction:
        return self._dist[a][b]

    def total_length(self) -> Fraction:
        return sum((length for _, _, length in self.edges), Fraction(0))

    # serialization

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [{"u": self.vertices[u], "v": self.vertices[v], "len": format_fraction(length)}
                      for u, v, length in self.edges],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetricTree":
        try:
            vertices = data["vertices"]
            edges = [(e["u"], e["v"], as_fraction(e["len"])) for e in data["edges"]]
        except (KeyError, TypeError) as exc:
            raise TreeError(f"malformed tree description: missing field {exc}") from exc
        except ValueError as exc:
            raise TreeError(f"malformed edge length: {exc}") from exc
        return cls(vertices, edges)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "MetricTree":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, slots=True)
class TreePoint:
    """A vertex (``vertex`` set) or an edge-interior point (``edge`` and ``offset`` set)."""

    tree: MetricTree = field(repr=False)
    vertex: int | None
    edge: int | None
    offset: Fraction | None

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None

    def sort_key(self) -> tuple:
        if self.vertex is not None:
            return (0, self.vertex, 0)
        return (1, self.edge, self.offset)

    def __lt__(self, other: "TreePoint") -> bool:
        return self.sort_key() < other.sort_key()

    def ends(self) -> list:
        """``(vertex, distance)`` pairs for the ends of the cell holding this point."""
        if self.vertex is not None:
            return [(self.vertex, Fraction(0))]
        u, v, length = self.tree.edges[self.edge]
        return [(u, self.offset), (v, length - self.offset)]

    def on_edge(self, edge: int) -> Fraction | None:
        """Offset of this point along ``edge``, or None if it does not lie on that closed edge."""
        u, v, length = self.tree.edges[edge]
        if self.vertex is not None:
            if self.vertex == u:
                return Fraction(0)
            if self.vertex == v:
                return length
            return None
        return self.offset if self.edge == edge else None

    def directions(self) -> list:
        if self.vertex is not None:
            edges = self.tree.edges
            return [(e, 1 if edges[e][0] == self.vertex else -1) for e in self.tree.incident[self.vertex]]
        return [(self.edge, 1), (self.edge, -1)]

    def to_dict(self) -> dict:
        if self.vertex is not None:
            return {"vertex": self.tree.vertices[self.vertex]}
        return {"edge": self.edge, "offset": format_fraction(self.offset)}

    def __str__(self):
        if self.vertex is not None:
            return self.tree.vertices[self.vertex]
        return f"e{self.edge}@{self.offset}"


def point_from_dict(tree: MetricTree, data: dict) -> TreePoint:
    if "vertex" in data:
        return tree.vertex(data["vertex"])
    if "edge" in data and "offset" in data:
        return tree.point(int(data["edge"]), as_fraction(data["offset"]))
    raise TreeError(f"a point needs 'vertex' or 'edge'+'offset', got {sorted(data)}")


def _same_host(p: TreePoint, q: TreePoint):
    if p.tree is not q.tree and p.tree != q.tree:
        raise TreeError("points live on different trees")


def distance(p: TreePoint, q: TreePoint) -> Fraction:
    """Geodesic distance: the length of the arc [p, q]."""
    _same_host(p, q)
    if p == q:
        return Fraction(0)
    if p.edge is not None and p.edge == q.edge:
        return abs(p.offset - q.offset)
    dist = p.tree._dist
    best = None
    for a, da in p.ends():
        row = dist[a]
        for b, db in q.ends():
            d = da + row[b] + db
            if best is None or d < best:
                best = d
    return best


class Segment(NamedTuple):
    edge: int
    start: Fraction
    end: Fraction

    @property
    def length(self) -> Fraction:
        return abs(self.end - self.start)


@dataclass(frozen=True)
class Arc:
    """The unique arc between two points, as consecutive edge sub-intervals."""

    start: TreePoint
    end: TreePoint
    segments: tuple

    @property
    def length(self) -> Fraction:
        return sum((s.length for s in self.segments), Fraction(0))

    @property
    def degenerate(self) -> bool:
        return not self.segments


def _vertex_path(tree: MetricTree, a: int, b: int) -> list:
    """Segments walking the vertex path a -> b."""
    out = []
    while a != b:
        e = tree._hop[a][b]
        u, v, length = tree.edges[e]
        if a == u:
            out.append(Segment(e, Fraction(0), length))
            a = v
        else:
            out.append(Segment(e, length, Fraction(0)))
            a = u
    return out


def arc(p: TreePoint, q: TreePoint) -> Arc:
    _same_host(p, q)
    tree = p.tree
    if p == q:
        return Arc(p, q, ())
    if p.edge is not None and p.edge == q.edge:
        return Arc(p, q, (Segment(p.edge, p.offset, q.offset),))
    # an interior point and an endpoint of its own edge
    if p.edge is not None and q.vertex is not None:
        oq = q.on_edge(p.edge)
        if oq is not None:
            return Arc(p, q, (Segment(p.edge, p.offset, oq),))
    if q.edge is not None and p.vertex is not None:
        op = p.on_edge(q.edge)
        if op is not None:
            return Arc(p, q, (Segment(q.edge, op, q.offset),))
    best = None
    for a, da in p.ends():
        for b, db in q.ends():
            d = da + tree._dist[a][b] + db
            if best is None or d < best[0]:
                best = (d, a, b)
    _, a, b = best
    segs = []
    if p.edge is not None:
        u, _, length = tree.edges[p.edge]
        segs.append(Segment(p.edge, p.offset, Fraction(0) if a == u else length))
    segs.extend(_vertex_path(tree, a, b))
    if q.edge is not None:
        u, _, length = tree.edges[q.edge]
        segs.append(Segment(q.edge, Fraction(0) if b == u else length, q.offset))
    return Arc(p, q, tuple(segs))


def on_arc(p: TreePoint, x: TreePoint, y: TreePoint) -> bool:
    """True iff p lies on the arc [x, y]."""
    return distance(x, p) + distance(p, y) == distance(x, y)


def point_on_arc(x: TreePoint, y: TreePoint, s: Rational) -> TreePoint:
    """The point of [x, y] at distance ``s`` from x."""
    s = as_fraction(s)
    path = arc(x, y)
    if s < 0 or s > path.length:
        raise TreeError(f"distance {s} outside arc of length {path.length}")
    if s == 0:
        return x
    for seg in path.segments:
        if s <= seg.length:
            step = s if seg.end > seg.start else -s
            return x.tree.point(seg.edge, seg.start + step)
        s -= seg.length
    return y


def direction(p: TreePoint, q: TreePoint) -> Direction:
    """Direction in which the arc [p, q] leaves p (p != q)."""
    path = arc(p, q)
    if path.degenerate:
        raise TreeError("no direction from a point to itself")
    seg = path.segments[0]
    return (seg.edge, 1 if seg.end > seg.start else -1)


def along(p: TreePoint, d: Direction, t: Rational) -> TreePoint:
    """Move distance ``t`` from p in direction ``d`` without leaving the edge of ``d``."""
    e, sign = d
    base = p.on_edge(e)
    if base is None:
        raise TreeError(f"point {p} is not on edge {e}")
    return p.tree.point(e, base + sign * as_fraction(t))


def room(p: TreePoint, d: Direction) -> Fraction:
    """How far one can move from p in direction ``d`` before reaching a vertex."""
    e, sign = d
    base = p.on_edge(e)
    length = p.tree.edges[e][2]
    return length - base if sign > 0 else base


def median(x: TreePoint, y: TreePoint, z: TreePoint) -> TreePoint:
    """The unique point common to [x,y], [y,z] and [x,z]."""
    dxy, dxz, dyz = distance(x, y), distance(x, z), distance(y, z)
    return point_on_arc(x, y, (dxy + dxz - dyz) / 2)


def _irredundant(points: Iterable[TreePoint]) -> tuple:
    pts = sorted(set(points))
    if len(pts) <= 2:
        return tuple(pts)
    keep = []
    for i, p in enumerate(pts):
        others = pts[:i] + pts[i + 1:]
        inside = any(on_arc(p, a, b) for j, a in enumerate(others) for b in others[j + 1:])
        if not inside:
            keep.append(p)
    return tuple(keep)


@dataclass(frozen=True)
class SubTree:
    """Convex hull of finitely many points, stored by its irredundant endpoint list."""

    endpoints: tuple

    def __post_init__(self):
        if not self.endpoints:
            raise TreeError("empty subtree")

    @property
    def tree(self) -> MetricTree:
        return self.endpoints[0].tree

    @property
    def degenerate(self) -> bool:
        return len(self.endpoints) == 1

    def contains(self, p: TreePoint) -> bool:
        first = self.endpoints[0]
        if len(self.endpoints) == 1:
            return p == first
        return any(on_arc(p, first, e) for e in self.endpoints[1:])

    __contains__ = contains

    def segments(self) -> list:
        """Maximal edge sub-intervals ``(edge, lo, hi)`` covering the subtree (lo <= hi)."""
        spans = {}
        first = self.endpoints[0]
        for e in self.endpoints[1:]:
            for seg in arc(first, e).segments:
                lo, hi = sorted((seg.start, seg.end))
                spans.setdefault(seg.edge, []).append((lo, hi))
        out = []
        for edge in sorted(spans):
            ivs = sorted(spans[edge])
            lo, hi = ivs[0]
            for a, b in ivs[1:]:
                if a <= hi:
                    hi = max(hi, b)
                else:
                    out.append((edge, lo, hi))
                    lo, hi = a, b
            out.append((edge, lo, hi))
        return out

    def length(self) -> Fraction:
        return sum((hi - lo for _, lo, hi in self.segments()), Fraction(0))

    def diameter(self) -> Fraction:
        eps = self.endpoints
        return max((distance(a, b) for a in eps for b in eps), default=Fraction(0))

    def to_list(self) -> list:
        return [p.to_dict() for p in self.endpoints]


def convex_hull(points: Iterable[TreePoint]) -> SubTree:
    """Smallest subtree containing ``points``."""
    points = list(points)
    if not points:
        raise TreeError("convex hull of an empty set")
    for p in points[1:]:
        _same_host(points[0], p)
    return SubTree(_irredundant(points))


def first_point(Y: SubTree, p: TreePoint) -> TreePoint:
    """Nearest point of Y to p; equals p when p is in Y (first point map r_Y)."""
    if not Y.endpoints:
        raise TreeError("empty subtree")
    _same_host(Y.endpoints[0], p)
    first = Y.endpoints[0]
    if len(Y.endpoints) == 1:
        return first
    best, best_d = None, None
    for e in Y.endpoints[1:]:
        g = median(p, first, e)
        d = distance(p, g)
        if best_d is None or d < best_d:
            best, best_d = g, d
    return best


def distance_to_subtree(p: TreePoint, Y: SubTree) -> Fraction:
    return distance(p, first_point(Y, p))


def point_order(t: MetricTree | SubTree, p: TreePoint) -> int:
    """Number of components of ``t`` minus p: 1 at endpoints, 2 at cut points, more at branch points."""
    if isinstance(t, MetricTree):
        if p.tree is not t and p.tree != t:
            raise TreeError("point is not on this tree")
        return t.degree(p.vertex) if p.vertex is not None else 2
    if not t.contains(p):
        raise TreeError(f"point {p} is not in the subtree")
    return len({direction(p, e) for e in t.endpoints if e != p})


def modulus_delta(t: MetricTree, eps: Rational) -> Fraction:
    """A delta in (0, eps) with d(x,y) <= delta => diam [x,y] < eps; geodesic metric makes eps/2 valid."""
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    return eps / 2

"""Hausdorff geometry on finite sets and subtrees, and the induced maps on them.

Two kinds of hyperspace element are supported: :class:`FiniteSet` (a point of
``F_n``) and :class:`SubTree` (a point of ``T_n`` or of the continuum
hyperspace, which on a finite tree consists exactly of the subtrees).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import lcm
from typing import Iterable, Sequence, Union

from .maps import PLSelfMap, evaluate, is_monotone
from .orbits import (DEFAULT_EPS, DEFAULT_HORIZON, DEFAULT_MAX_PERIOD, EXACT, LIMIT_CYCLE, OrbitModel,
                     WindowStats, model_window, orbit_model)
from .tree import (MetricTree, SubTree, TreeError, TreePoint, convex_hull, distance, distance_to_subtree,
                   point_from_dict)


@dataclass(frozen=True)
class FiniteSet:
    """Nonempty finite set of points, kept sorted and duplicate free."""

    points: tuple

    def __post_init__(self):
        if not self.points:
            raise TreeError("empty finite set")

    @classmethod
    def of(cls, points: Iterable[TreePoint]) -> "FiniteSet":
        return cls(tuple(sorted(set(points))))

    @property
    def tree(self) -> MetricTree:
        return self.points[0].tree

    def __len__(self):
        return len(self.points)


HyperElement = Union[FiniteSet, SubTree]


def members(E: HyperElement) -> tuple:
    """The points that determine E: the set itself or the subtree's endpoints."""
    return E.points if isinstance(E, FiniteSet) else E.endpoints


def rebuild(E: HyperElement, points: Iterable[TreePoint]) -> HyperElement:
    """Element of the same kind as E spanned by ``points``."""
    return FiniteSet.of(points) if isinstance(E, FiniteSet) else convex_hull(points)


def size(E: HyperElement) -> int:
    return len(members(E))


# ---------------------------------------------------------------------------
# Hausdorff distance


def _directed_points_to(points: Sequence[TreePoint], B: HyperElement) -> Fraction:
    if isinstance(B, SubTree):
        return max(distance_to_subtree(p, B) for p in points)
    return max(min(distance(p, q) for q in B.points) for p in points)


def _edge_profile(tree: MetricTree, edge: int, p: TreePoint) -> tuple:
    """``d(point at offset t on edge, p)`` as (rising, falling): the min of t + a and b - t, or |t - o|."""
    u, v, length = tree.edges[edge]
    o = p.on_edge(edge)
    if o is not None:
        return ("on", o)
    pu, pv = tree.vertex(u), tree.vertex(v)
    return ("off", distance(pu, p), length + distance(pv, p))


def _profile_value(prof: tuple, t: Fraction) -> Fraction:
    if prof[0] == "on":
        return abs(t - prof[1])
    return min(t + prof[1], prof[2] - t)


def _directed_subtree_to_points(A: SubTree, points: Sequence[TreePoint]) -> Fraction:
    """``sup_{a in A} min_i d(a, p_i)``.

    On each edge interval of A every ``d(., p_i)`` is piecewise linear with
    slopes +-1, so the lower envelope peaks at an interval end or where a
    rising line meets a falling one.
    """
    tree = A.tree
    if A.degenerate:
        return min(distance(A.endpoints[0], p) for p in points)
    best = Fraction(0)
    for edge, lo, hi in A.segments():
        profs = [_edge_profile(tree, edge, p) for p in points]
        rising, falling = [], []
        for prof in profs:
            if prof[0] == "on":
                rising.append(-prof[1])
                falling.append(prof[1])
            else:
                rising.append(prof[1])
                falling.append(prof[2])
        cands = {lo, hi}
        for a in rising:
            for b in falling:
                t = (b - a) / 2
                if lo < t < hi:
                    cands.add(t)
        for t in cands:
            best = max(best, min(_profile_value(prof, t) for prof in profs))
    return best


def _directed(A: HyperElement, B: HyperElement) -> Fraction:
    if isinstance(A, FiniteSet):
        return _directed_points_to(A.points, B)
    if isinstance(B, SubTree):
        # distance to a subtree is convex along arcs, so endpoints of A suffice
        return _directed_points_to(A.endpoints, B)
    return _directed_subtree_to_points(A, B.points)


def hausdorff(A: HyperElement, B: HyperElement) -> Fraction:
    """Exact Hausdorff distance between two elements on the same tree."""
    if A.tree is not B.tree and A.tree != B.tree:
        raise TreeError("elements live on different trees")
    if A == B:
        return Fraction(0)
    return max(_directed(A, B), _directed(B, A))


# ---------------------------------------------------------------------------
# induced maps


def induced_Fn(f: PLSelfMap, A: FiniteSet) -> FiniteSet:
    return FiniteSet.of(evaluate(f, p) for p in A.points)


def induced_Tn(f: PLSelfMap, T: SubTree, check: bool = True) -> SubTree:
    """Image of a subtree; for monotone maps it is the hull of the endpoint images."""
    if check and not is_monotone(f):
        raise ValueError("subtree images are computed from endpoints only for monotone maps")
    return convex_hull(evaluate(f, p) for p in T.endpoints)


def induced(f: PLSelfMap, E: HyperElement) -> HyperElement:
    return induced_Fn(f, E) if isinstance(E, FiniteSet) else induced_Tn(f, E)


# ---------------------------------------------------------------------------
# orbits of elements


class UnresolvedOrbit(RuntimeError):
    """A member orbit could not be resolved to a limit cycle within the horizon."""


class HyperTrack:
    """Orbit of an element, driven by the limit-cycle models of its defining points.

    For a subtree, ``f^n(T)`` is the hull of the images of T's endpoints, and
    hulls of point lists matched within r are within r in the Hausdorff
    metric, so the member residuals bound the element residual.
    """

    def __init__(self, f: PLSelfMap, E: HyperElement, horizon: int = DEFAULT_HORIZON,
                 max_period: int = DEFAULT_MAX_PERIOD):
        if isinstance(E, SubTree) and not is_monotone(f):
            raise ValueError("subtree orbits need a monotone map")
        self.f = f
        self.element = E
        self.models = []
        for p in members(E):
            model = orbit_model(f, p, horizon, max_period)
            if model is None:
                raise UnresolvedOrbit(f"orbit of {p} unresolved within {horizon} steps")
            self.models.append(model)
        self.period = reduce(lcm, (m.m for m in self.models), 1)

    @property
    def exact(self) -> bool:
        return all(m.exact for m in self.models)

    def at(self, n: int) -> HyperElement:
        return rebuild(self.element, (m.point(n) for m in self.models))

    def limit(self, n: int) -> HyperElement:
        return rebuild(self.element, (m.limit(n) for m in self.models))

    def residual_sup(self, n: int) -> Fraction:
        return max(m.residual_sup(n) for m in self.models)

    def companion(self) -> HyperElement:
        return self.limit(0)


@dataclass(frozen=True)
class HyperOmega:
    elements: tuple
    period: int
    kind: str
    minimal: bool


def hyper_omega(f: PLSelfMap, E: HyperElement, eps=DEFAULT_EPS, horizon: int = DEFAULT_HORIZON,
                max_period: int = DEFAULT_MAX_PERIOD) -> HyperOmega:
    """Omega-limit set of E under the induced map.

    It is the periodic orbit of limit elements; minimality is confirmed by
    checking that the induced map permutes that orbit cyclically.
    """
    if not is_monotone(f):
        raise ValueError("needs a monotone map")
    track = HyperTrack(f, E, horizon, max_period)
    cyc = [track.limit(n) for n in range(track.period)]
    per = next(p for p in range(1, len(cyc) + 1)
               if len(cyc) % p == 0 and all(cyc[i] == cyc[(i + p) % len(cyc)] for i in range(len(cyc))))
    cyc = cyc[:per]
    minimal = all(induced(f, cyc[i]) == cyc[(i + 1) % per] for i in range(per))
    kind = EXACT if track.exact else LIMIT_CYCLE
    return HyperOmega(tuple(cyc), per, kind, minimal)


@dataclass(frozen=True)
class CompanionCertificate:
    element: HyperElement
    companion: HyperElement
    eps: Fraction
    horizon: int
    tail_bound: Fraction
    distance_at_horizon: Fraction
    period: int
    returns_exactly: bool
    nearest_periodic: Fraction

    @property
    def ok(self) -> bool:
        return (self.tail_bound < self.eps and self.distance_at_horizon <= self.tail_bound
                and self.returns_exactly and self.nearest_periodic < self.eps)


def asymptotic_companion(f: PLSelfMap, E: HyperElement, eps=DEFAULT_EPS, horizon: int = DEFAULT_HORIZON,
                         max_period: int = DEFAULT_MAX_PERIOD) -> CompanionCertificate:
    """A periodic element asymptotic to E.

    Each defining point x_i is paired with the point y_i of its omega-limit
    set that its orbit shadows; the companion is spanned by the y_i.
    ``tail_bound`` bounds ``d_H(f^n E, f^n B)`` for every n >= horizon.
    """
    eps = Fraction(eps)
    if not is_monotone(f):
        raise ValueError("needs a monotone map")
    track = HyperTrack(f, E, horizon, max_period)
    B = track.companion()
    bound = track.residual_sup(horizon)
    at_h = hausdorff(track.at(horizon), track.limit(horizon))
    P = track.period
    Bp = B
    for _ in range(P):
        Bp = induced(f, Bp)
    returns = Bp == B
    return CompanionCertificate(E, B, eps, horizon, bound, at_h, P, returns, Fraction(0) if returns else hausdorff(Bp, B))


def hyper_pair_window(f: PLSelfMap, A: HyperElement, B: HyperElement, horizon: int = DEFAULT_HORIZON,
                      max_period: int = DEFAULT_MAX_PERIOD) -> WindowStats:
    ta = HyperTrack(f, A, horizon, max_period)
    tb = HyperTrack(f, B, horizon, max_period)
    return model_window(hausdorff, ta, tb, horizon)


def hyper_pair_type(f: PLSelfMap, A: HyperElement, B: HyperElement, eps=DEFAULT_EPS,
                    horizon: int = DEFAULT_HORIZON, max_period: int = DEFAULT_MAX_PERIOD) -> tuple:
    stats = hyper_pair_window(f, A, B, horizon, max_period)
    return stats.verdict(Fraction(eps)), stats


# ---------------------------------------------------------------------------
# serialization


def element_to_dict(E: HyperElement) -> dict:
    if isinstance(E, FiniteSet):
        return {"finite_set": [p.to_dict() for p in E.points]}
    return {"subtree": E.to_list()}


def element_from_dict(tree: MetricTree, data: dict, n: int | None = None) -> HyperElement:
    if "finite_set" in data:
        E = FiniteSet.of(point_from_dict(tree, p) for p in data["finite_set"])
    elif "subtree" in data:
        E = convex_hull(point_from_dict(tree, p) for p in data["subtree"])
    else:
        raise TreeError("element needs a 'finite_set' or 'subtree' field")
    if n is not None and size(E) > n:
        raise TreeError(f"element has {size(E)} points, more than {n}")
    return E

"""Orbits, omega-limit sets, recurrence and pair classification.

For a monotone map the orbit of every point converges to a periodic orbit.
Once an iterate ``y`` satisfies ``f^m(y) in [q, y]`` for some fixed point q of
``f^m``, the arc ``[q, y]`` is ``f^m``-invariant and ``f^m`` acts on it as a
non-decreasing interval map, so ``f^{km}(y)`` slides monotonically to the
fixed point z of ``f^m`` on ``[q, y]`` nearest to y. Close to z every
``f^r`` (r <= m) is affine along the approach direction, which gives a closed
form for the whole tail of the orbit. :class:`OrbitModel` stores that form and
answers exact queries about arbitrarily late iterates without iterating.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Callable, Sequence

from .maps import (PLSelfMap, ResourceBudgetExceeded, evaluate, fixed_set, germ_power,
                   is_monotone, minimal_period, periodic_points, distance_to_periodic)
from .tree import TreePoint, along, convex_hull, direction, distance, first_point, on_arc, SubTree

DEFAULT_MAX_PERIOD = 24
DEFAULT_HORIZON = 10_000
DEFAULT_EPS = Fraction(1, 10**6)


# ---------------------------------------------------------------------------
# plain orbits


@dataclass(frozen=True)
class OrbitRecord:
    """Iterates ``f^0(x), ..., f^N(x)``; ``cycle`` is (pre-period, period) if a repeat was seen."""

    base: TreePoint
    points: tuple
    cycle: tuple | None = None

    def at(self, n: int) -> TreePoint:
        if n < len(self.points):
            return self.points[n]
        if self.cycle is None:
            raise IndexError(f"iterate {n} beyond the recorded horizon")
        pre, per = self.cycle
        return self.points[pre + (n - pre) % per]


def orbit(f: PLSelfMap, x: TreePoint, horizon: int) -> OrbitRecord:
    """Exact iterates up to ``horizon``, stopping at the first repeated state."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    points, seen = [x], {x: 0}
    for n in range(1, horizon + 1):
        y = evaluate(f, points[-1])
        points.append(y)
        if y in seen:
            return OrbitRecord(x, tuple(points), (seen[y], n - seen[y]))
        seen[y] = n
    return OrbitRecord(x, tuple(points), None)


# ---------------------------------------------------------------------------
# limit-cycle models


@dataclass(frozen=True)
class OrbitModel:
    """Exact description of a whole orbit converging to a periodic orbit.

    ``prefix`` holds ``x_0..x_{start}``. For ``n = start + k*m + r`` the iterate
    is ``along(cycle[r], branches[r][0], branches[r][1] * kappa**k * delta)``.
    ``delta == 0`` means the orbit lands exactly on the cycle at ``start``.
    """

    prefix: tuple
    cycle: tuple
    branches: tuple
    kappa: Fraction
    delta: Fraction

    @property
    def start(self) -> int:
        return len(self.prefix) - 1

    @property
    def exact(self) -> bool:
        return self.delta == 0

    @property
    def m(self) -> int:
        return len(self.cycle)

    @cached_property
    def period(self) -> int:
        """Minimal period of the limit cycle."""
        m = self.m
        for p in range(1, m + 1):
            if m % p == 0 and all(self.cycle[i] == self.cycle[(i + p) % m] for i in range(m)):
                return p
        return m

    @cached_property
    def omega(self) -> tuple:
        return tuple(sorted(set(self.cycle)))

    def _split(self, n: int) -> tuple:
        return divmod(n - self.start, self.m)

    def offset(self, n: int) -> Fraction:
        """Distance from the n-th iterate to its limit point (n >= start)."""
        k, r = self._split(n)
        if self.delta == 0:
            return Fraction(0)
        s = self.branches[r][1]
        if s == 0:
            return Fraction(0)
        return s * self.kappa ** k * self.delta

    def point(self, n: int) -> TreePoint:
        if n < 0:
            raise ValueError("negative time")
        if n <= self.start:
            return self.prefix[n]
        k, r = self._split(n)
        t = self.offset(n)
        if t == 0:
            return self.cycle[r]
        return along(self.cycle[r], self.branches[r][0], t)

    def limit(self, n: int) -> TreePoint:
        """The point of the limit cycle that the n-th iterate shadows."""
        return self.cycle[(n - self.start) % self.m]

    def residual(self, n: int) -> Fraction:
        if n <= self.start:
            return distance(self.prefix[n], self.limit(n))
        return self.offset(n)

    @cached_property
    def _prefix_tail_max(self) -> tuple:
        out, best = [], Fraction(0)
        for n in range(self.start, -1, -1):
            best = max(best, distance(self.prefix[n], self.limit(n)))
            out.append(best)
        return tuple(reversed(out))

    def residual_sup(self, n0: int) -> Fraction:
        """Exact ``sup_{n >= n0} d(x_n, limit(n))``."""
        best = Fraction(0)
        if n0 <= self.start:
            best = self._prefix_tail_max[max(n0, 0)]
        if self.delta == 0:
            return best
        for r, (_, s) in enumerate(self.branches):
            if s == 0:
                continue
            k = max(0, -(-(n0 - self.start - r) // self.m))
            best = max(best, s * self.kappa ** k * self.delta)
        return best

    def companion(self) -> TreePoint:
        """The point of the limit cycle whose orbit the orbit of x is asymptotic to."""
        return self.limit(0)


def _schedule(n: int) -> bool:
    if n <= 64:
        return True
    if n <= 1024:
        return n % 8 == 0
    return n % 64 == 0


def _fixed_candidates(f: PLSelfMap, m: int, y: TreePoint) -> list | None:
    try:
        fs = fixed_set(f, m)
    except ResourceBudgetExceeded:
        return None
    tree = f.tree
    out = list(fs.points)
    for iv in fs.cells:
        seg = convex_hull([tree.point(iv.edge, iv.lo), tree.point(iv.edge, iv.hi)])
        out.append(first_point(seg, y))
    return out


def _trap(f: PLSelfMap, m: int, y: TreePoint, fy: TreePoint):
    """Limit z of ``f^{km}(y)`` if a fixed point q of ``f^m`` has ``f^m(y) in [q, y]``."""
    cands = _fixed_candidates(f, m, y)
    if not cands:
        return None
    q = next((q for q in cands if q != y and on_arc(fy, q, y)), None)
    if q is None:
        return None
    on_path = [p for p in cands if p != y and on_arc(p, q, y)]
    return min(on_path, key=lambda p: (distance(p, y), p.sort_key()))


def _build_model(f: PLSelfMap, pts: list, t: int, m: int, z: TreePoint, limit_steps: int):
    """Closed form for the orbit entering the trap at time t."""
    pts = list(pts)
    D = direction(z, pts[t])
    germs = [germ_power(f, z, D, r) for r in range(m + 1)]
    gm = germs[m]
    if gm.image != z or gm.slope >= 1 or (gm.slope > 0 and gm.image_direction != D):
        return None
    reach = min(g.reach for g in germs)
    while distance(pts[t], z) > reach:
        t += m
        while len(pts) <= t:
            if len(pts) > limit_steps:
                return None
            pts.append(evaluate(f, pts[-1]))
    delta = distance(pts[t], z)
    cycle = tuple(g.image for g in germs[:m])
    branches = tuple((g.image_direction, g.slope) for g in germs[:m])
    return OrbitModel(tuple(pts[:t + 1]), cycle, branches, gm.slope, delta)


def _exact_model(pts: list, pre: int, per: int) -> OrbitModel:
    cycle = tuple(pts[pre:pre + per])
    return OrbitModel(tuple(pts[:pre + 1]), cycle, tuple((None, Fraction(0)) for _ in cycle),
                      Fraction(0), Fraction(0))


def _trace(f: PLSelfMap, x: TreePoint, max_steps: int, max_period: int):
    """(model or None, iterates computed)."""
    monotone = bool(is_monotone(f))
    pts, seen = [x], {x: 0}
    n = 0
    while n < max_steps:
        y = evaluate(f, pts[-1])
        pts.append(y)
        n += 1
        if y in seen:
            return _exact_model(pts, seen[y], n - seen[y]), pts
        seen[y] = n
        if not monotone or not _schedule(n):
            continue
        for m in range(1, min(max_period, n) + 1):
            z = _trap(f, m, pts[n - m], y)
            if z is None:
                continue
            model = _build_model(f, pts, n - m, m, z, max_steps)
            if model is not None:
                return model, list(model.prefix)
    return None, pts


def orbit_model(f: PLSelfMap, x: TreePoint, max_steps: int = DEFAULT_HORIZON,
                max_period: int = DEFAULT_MAX_PERIOD) -> OrbitModel | None:
    """Resolve the orbit of x to an exact limit-cycle model, or None within the budget.

    Non-monotone maps are only resolved when the orbit is eventually periodic.
    """
    return _trace(f, x, max_steps, max_period)[0]


# ---------------------------------------------------------------------------
# omega-limit sets

EXACT = "exact_periodic_orbit"
LIMIT_CYCLE = "limit_cycle"
TOLERANCE = "tolerance_approximation"
UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class OmegaSet:
    """Omega-limit set of one orbit.

    ``kind`` is EXACT when the orbit lands on a periodic orbit, LIMIT_CYCLE when
    it converges to one (the points are still exact), TOLERANCE for clusters
    of the tail at radius ``eps`` and UNRESOLVED when nothing was certified.
    """

    points: tuple
    kind: str
    eps: Fraction
    horizon: int
    period: int | None = None
    model: OrbitModel | None = field(default=None, repr=False, compare=False)

    @property
    def resolved(self) -> bool:
        return self.kind in (EXACT, LIMIT_CYCLE)

    def __len__(self):
        return len(self.points)


def _cluster(points: Sequence[TreePoint], eps: Fraction) -> list:
    reps, hits = [], []
    for p in points:
        for i, r in enumerate(reps):
            if distance(p, r) < eps:
                hits[i] += 1
                break
        else:
            reps.append(p)
            hits.append(1)
    return [r for r, h in zip(reps, hits) if h > 1] or reps


def omega_limit(f: PLSelfMap, x: TreePoint, eps=DEFAULT_EPS, horizon: int = DEFAULT_HORIZON,
                max_period: int = DEFAULT_MAX_PERIOD) -> OmegaSet:
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    model, pts = _trace(f, x, horizon, max_period)
    if model is not None:
        kind = EXACT if model.exact else LIMIT_CYCLE
        return OmegaSet(model.omega, kind, eps, horizon, model.period, model)
    if is_monotone(f):
        return OmegaSet((), UNRESOLVED, eps, horizon)
    tail = pts[len(pts) // 2:]
    return OmegaSet(tuple(sorted(_cluster(tail, eps))), TOLERANCE, eps, horizon)


# ---------------------------------------------------------------------------
# recurrence


@dataclass(frozen=True)
class RecurrenceReport:
    """kind is one of Fixed, Periodic, RegularlyRecurrent, Recurrent, Nonrecurrent."""

    kind: str
    period: int | None = None
    eps: Fraction | None = None
    horizon: int | None = None
    exact: bool = False
    method: str = ""

    @property
    def regularly_recurrent(self) -> bool:
        return self.kind in ("Fixed", "Periodic", "RegularlyRecurrent")

    @property
    def recurrent(self) -> bool:
        return self.regularly_recurrent or self.kind == "Recurrent"


def rr_certificate(f: PLSelfMap, x: TreePoint, eps=DEFAULT_EPS, horizon: int = DEFAULT_HORIZON,
                   max_n: int = 64) -> RecurrenceReport | None:
    """Smallest N <= max_n with ``d(x, f^{kN}(x)) < eps`` for every ``kN <= horizon``.

    An exact return ``f^p(x) = x`` settles every multiple of p at once.
    """
    eps = Fraction(eps)
    rec = orbit(f, x, horizon)
    if rec.cycle is not None and rec.cycle[0] == 0 and rec.cycle[1] <= max_n:
        return RecurrenceReport("RegularlyRecurrent", rec.cycle[1], eps, horizon, True, "exact_return")
    pts = [rec.at(n) for n in range(horizon + 1)] if rec.cycle else rec.points
    for N in range(1, max_n + 1):
        if all(distance(x, pts[k]) < eps for k in range(N, horizon + 1, N)):
            return RecurrenceReport("RegularlyRecurrent", N, eps, horizon, False, "window")
    return None


def classify_recurrence(f: PLSelfMap, x: TreePoint, eps=DEFAULT_EPS, horizon: int = DEFAULT_HORIZON,
                        max_n: int = 64, max_period: int = DEFAULT_MAX_PERIOD) -> RecurrenceReport:
    """Strongest recurrence class that can be certified for x."""
    eps = Fraction(eps)
    rec = orbit(f, x, horizon)
    if rec.cycle is not None and rec.cycle[0] == 0:
        per = rec.cycle[1]
        kind = "Fixed" if per == 1 else "Periodic"
        return RecurrenceReport(kind, per, eps, horizon, True, "exact_return")
    if rec.cycle is not None:
        # x is strictly preperiodic and never comes back
        return RecurrenceReport("Nonrecurrent", None, eps, horizon, True, "preperiodic")
    if is_monotone(f):
        model = orbit_model(f, x, horizon, max_period)
        if model is not None and x not in model.omega:
            return RecurrenceReport("Nonrecurrent", None, eps, horizon, True, "limit_cycle")
    rr = rr_certificate(f, x, eps, horizon, max_n)
    if rr is not None:
        return rr
    tail = rec.points[len(rec.points) // 2:]
    if any(distance(x, p) < eps for p in tail):
        return RecurrenceReport("Recurrent", None, eps, horizon, False, "window")
    return RecurrenceReport("Nonrecurrent", None, eps, horizon, False, "window")


# ---------------------------------------------------------------------------
# pairs


@dataclass(frozen=True)
class WindowStats:
    """Bounds on ``d(A_n, B_n)`` over the tail window ``start <= n <= horizon``.

    ``inf_upper``/``sup_lower`` are attained values; ``sup_upper`` bounds every
    tail distance (for model-based stats it bounds all n >= start).
    ``lim_inf``/``lim_sup`` are the exact limits when limit cycles are known.
    """

    start: int
    horizon: int
    inf_upper: Fraction
    inf_lower: Fraction
    sup_lower: Fraction
    sup_upper: Fraction
    lim_inf: Fraction | None = None
    lim_sup: Fraction | None = None
    exact_limits: bool = False

    def verdict(self, eps: Fraction) -> str:
        if self.sup_upper < eps:
            return "Asymptotic"
        if self.inf_upper < eps and self.sup_lower > eps:
            return "LiYorke"
        if self.inf_lower >= eps:
            return "Distal"
        return "Inconclusive"

    def to_dict(self) -> dict:
        fmt = lambda v: None if v is None else f"{v.numerator}/{v.denominator}"
        return {"start": self.start, "horizon": self.horizon,
                "inf_upper": fmt(self.inf_upper), "inf_lower": fmt(self.inf_lower),
                "sup_lower": fmt(self.sup_lower), "sup_upper": fmt(self.sup_upper),
                "lim_inf": fmt(self.lim_inf), "lim_sup": fmt(self.lim_sup),
                "exact_limits": self.exact_limits}


def model_window(metric: Callable, a, b, horizon: int, start: int | None = None) -> WindowStats:
    """Window stats for two tracked objects exposing ``at``, ``limit``, ``period`` and ``residual_sup``."""
    if start is None:
        start = horizon // 2
    P = lcm(a.period, b.period)
    limits = [metric(a.limit(n), b.limit(n)) for n in range(start, start + P)]
    rho = a.residual_sup(start) + b.residual_sup(start)
    lo, hi = min(limits), max(limits)
    times = range(max(start, horizon - P + 1), horizon + 1)
    seen = [metric(a.at(n), b.at(n)) for n in times]
    return WindowStats(start, horizon, min(seen), max(Fraction(0), lo - rho), max(seen), hi + rho,
                       lo, hi, True)


def brute_window(metric: Callable, xs: Sequence, ys: Sequence, start: int) -> WindowStats:
    ds = [metric(x, y) for x, y in zip(xs[start:], ys[start:])]
    lo, hi = min(ds), max(ds)
    return WindowStats(start, len(ds) + start - 1, lo, lo, hi, hi)


class _PointTrack:
    def __init__(self, model: OrbitModel):
        self.model = model
        self.period = model.m

    def at(self, n):
        return self.model.point(n)

    def limit(self, n):
        return self.model.limit(n)

    def residual_sup(self, n):
        return self.model.residual_sup(n)


@dataclass(frozen=True)
class PairReport:
    verdict: str
    stats: WindowStats


def pair_type(f: PLSelfMap, x: TreePoint, y: TreePoint, eps=DEFAULT_EPS, horizon: int = DEFAULT_HORIZON,
              max_period: int = DEFAULT_MAX_PERIOD) -> PairReport:
    """Asymptotic, LiYorke, Distal or Inconclusive, with the window statistics behind the verdict."""
    eps = Fraction(eps)
    mx = orbit_model(f, x, horizon, max_period)
    my = orbit_model(f, y, horizon, max_period) if y != x else mx
    if mx is not None and my is not None:
        stats = model_window(distance, _PointTrack(mx), _PointTrack(my), horizon)
    else:
        ox = orbit(f, x, horizon)
        oy = orbit(f, y, horizon)
        xs = [ox.at(n) for n in range(horizon + 1)] if ox.cycle else list(ox.points)
        ys = [oy.at(n) for n in range(horizon + 1)] if oy.cycle else list(oy.points)
        stats = brute_window(distance, xs, ys, horizon // 2)
    return PairReport(stats.verdict(eps), stats)


# ---------------------------------------------------------------------------
# structure theorem check


@dataclass(frozen=True)
class SampleCheck:
    point: TreePoint
    omega: OmegaSet
    distances: tuple
    certificates: tuple
    violations: tuple


@dataclass(frozen=True)
class StructureReport:
    samples: tuple
    eps: Fraction
    horizon: int

    @property
    def violations(self) -> list:
        return [(s.point, v) for s in self.samples for v in s.violations]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_recurrence_structure(f: PLSelfMap, samples: Sequence[TreePoint], eps=DEFAULT_EPS,
                               horizon: int = DEFAULT_HORIZON, max_n: int = 64,
                               max_period: int = DEFAULT_MAX_PERIOD) -> StructureReport:
    """Every omega-limit point must be periodic (within eps of a solved periodic point) and regularly recurrent."""
    eps = Fraction(eps)
    if not is_monotone(f):
        raise ValueError("recurrence structure check needs a monotone map")
    out = []
    tables: dict = {}
    for x in samples:
        om = omega_limit(f, x, eps, horizon, max_period)
        violations, dists, certs = [], [], []
        if not om.resolved:
            violations.append("unresolved omega-limit")
        else:
            p = om.period
            if p not in tables:
                tables[p] = periodic_points(f, p)
            for z in om.points:
                d = distance_to_periodic(z, tables[p])
                dists.append(d)
                if d is None or d >= eps:
                    violations.append(f"omega point {z} is {d} from the periodic set")
                cert = rr_certificate(f, z, eps, horizon, max_n)
                certs.append(cert)
                if cert is None:
                    violations.append(f"omega point {z} has no regular recurrence certificate")
        out.append(SampleCheck(x, om, tuple(dists), tuple(certs), tuple(violations)))
    return StructureReport(tuple(out), eps, horizon)

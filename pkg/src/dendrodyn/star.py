"""A star dendrite with infinitely many rays and a ray-shifting homeomorphism.

Ray ``n`` (n an integer) is a segment from the root of length ``1/(|n|+1)``
leaving at angle ``pi/(|n|+2)`` for ``n < 0`` and ``pi - pi/(n+2)`` for
``n >= 0``. The map g sends ray n onto ray n+1 linearly, fixing the root.
In the normalized radius ``u = t * (|n|+1)`` it is a pure shift of the ray
index, so ``g^s`` scales radii on ray n by ``(|n|+1)/(|n+s|+1)``.

Subcontinua containing the root are unions of initial segments of rays and
are stored as a map from ray index to reach. The geodesic metric is used
throughout; the planar (chordal) metric is available for cross-checks.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .tree import as_fraction, format_fraction


def ray_bound(n: int) -> Fraction:
    return Fraction(1, abs(n) + 1)


def ray_angle(n: int) -> float:
    return math.pi / (-n + 2) if n < 0 else math.pi - math.pi / (n + 2)


def shift_scale(n: int, s: int) -> Fraction:
    """Factor applied to radii on ray n by ``g^s``."""
    return Fraction(abs(n) + 1, abs(n + s) + 1)


@dataclass(frozen=True, order=True)
class StarPoint:
    """Point at distance ``radius`` from the root on ray ``ray``; the root has ray None."""

    ray: int | None
    radius: Fraction

    def __post_init__(self):
        r = as_fraction(self.radius)
        object.__setattr__(self, "radius", r)
        if r < 0:
            raise ValueError("negative radius")
        if r == 0:
            object.__setattr__(self, "ray", None)
        elif self.ray is None:
            raise ValueError("only the root has no ray")
        elif r > ray_bound(self.ray):
            raise ValueError(f"radius {r} exceeds the length of ray {self.ray}")

    @classmethod
    def at(cls, ray: int, radius) -> "StarPoint":
        return cls(ray, as_fraction(radius))

    @property
    def is_root(self) -> bool:
        return self.ray is None

    def sort_key(self) -> tuple:
        return (0, 0, Fraction(0)) if self.ray is None else (1, self.ray, self.radius)

    def __str__(self):
        return "root" if self.ray is None else f"ray{self.ray}@{format_fraction(self.radius)}"


ROOT = StarPoint(None, Fraction(0))


def g_power(p: StarPoint, s: int) -> StarPoint:
    """``g^s(p)`` for any integer s (negative s applies the inverse)."""
    if p.ray is None:
        return p
    return StarPoint(p.ray + s, p.radius * shift_scale(p.ray, s))


def g_apply(p: StarPoint) -> StarPoint:
    return g_power(p, 1)


def g_inverse(p: StarPoint) -> StarPoint:
    return g_power(p, -1)


def star_distance(p: StarPoint, q: StarPoint) -> Fraction:
    """Geodesic distance: along a shared ray, otherwise through the root."""
    if p.ray == q.ray:
        return abs(p.radius - q.radius)
    return p.radius + q.radius


def chordal_distance(p: StarPoint, q: StarPoint) -> float:
    """Euclidean distance in the planar picture of the star."""
    zp = 0j if p.ray is None else float(p.radius) * complex(math.cos(ray_angle(p.ray)), math.sin(ray_angle(p.ray)))
    zq = 0j if q.ray is None else float(q.radius) * complex(math.cos(ray_angle(q.ray)), math.sin(ray_angle(q.ray)))
    return abs(zp - zq)


# ---------------------------------------------------------------------------
# subcontinua through the root


@dataclass(frozen=True)
class StarSubtree:
    """Union of the segments ``[root, reach(n)]`` on finitely many rays."""

    reach: tuple  # sorted (ray, reach) pairs with positive reach

    @classmethod
    def of(cls, reach: Mapping[int, Fraction] | Iterable) -> "StarSubtree":
        items = reach.items() if isinstance(reach, Mapping) else reach
        table = {}
        for n, r in items:
            r = as_fraction(r)
            if r < 0 or r > ray_bound(n):
                raise ValueError(f"reach {r} invalid on ray {n}")
            if r > 0:
                table[int(n)] = r
        return cls(tuple(sorted(table.items())))

    @property
    def table(self) -> dict:
        return dict(self.reach)

    def rays(self) -> list:
        return [n for n, _ in self.reach]

    def reach_on(self, n: int) -> Fraction:
        return self.table.get(n, Fraction(0))

    def contains(self, p: StarPoint) -> bool:
        return p.ray is None or p.radius <= self.reach_on(p.ray)

    def tips(self) -> list:
        return [StarPoint(n, r) for n, r in self.reach] or [ROOT]

    def to_dict(self) -> dict:
        return {"reach": {str(n): format_fraction(r) for n, r in self.reach}}


ROOT_TREE = StarSubtree(())


def g_subtree(T: StarSubtree, s: int = 1) -> StarSubtree:
    return StarSubtree(tuple((n + s, r * shift_scale(n, s)) for n, r in T.reach))


def star_hausdorff(A: StarSubtree, B: StarSubtree) -> Fraction:
    """Exact geodesic Hausdorff distance.

    Both sets contain the root, so a point at radius t on ray n is at
    distance ``max(0, t - reach_B(n))`` from B; the supremum is the largest
    reach difference over all rays.
    """
    a, b = A.table, B.table
    return max((abs(a.get(n, Fraction(0)) - b.get(n, Fraction(0))) for n in a.keys() | b.keys()),
               default=Fraction(0))


def _point_to_segment(z: complex, w: complex) -> float:
    """Euclidean distance from z to the segment [0, w]."""
    if w == 0:
        return abs(z)
    t = max(0.0, min(1.0, (z * w.conjugate()).real / abs(w) ** 2))
    return abs(z - t * w)


def chordal_hausdorff(A: StarSubtree, B: StarSubtree, samples: int = 64) -> float:
    """Planar Hausdorff distance estimated on ``samples`` points per ray segment."""
    def segs(T):
        return [float(r) * complex(math.cos(ray_angle(n)), math.sin(ray_angle(n))) for n, r in T.reach]

    sa, sb = segs(A), segs(B)

    def directed(src, dst):
        best = 0.0
        for w in src:
            for i in range(1, samples + 1):
                z = w * i / samples
                best = max(best, min([abs(z)] + [_point_to_segment(z, v) for v in dst]))
        return best

    return max(directed(sa, sb), directed(sb, sa))


# ---------------------------------------------------------------------------
# the family S_lambda


def van_der_corput(n: int, base: int = 2) -> Fraction:
    """n-th term (n >= 1) of the van der Corput sequence: 1/2, 1/4, 3/4, 1/8, ..."""
    if n < 1:
        raise ValueError("index starts at 1")
    q, denom = Fraction(0), 1
    while n:
        n, digit = divmod(n, base)
        denom *= base
        q += Fraction(digit, denom)
    return q


def h(lam: Fraction, t: Fraction) -> Fraction:
    """Affine map of [0, 1] onto [lam/2, lam]."""
    return lam * t / 2 + lam / 2


def a_lambda(lam: Fraction, n: int) -> Fraction:
    return h(lam, van_der_corput(n))


@dataclass(frozen=True)
class StarParams:
    lam: Fraction
    n_rays: int = 20

    def __post_init__(self):
        lam = as_fraction(self.lam)
        object.__setattr__(self, "lam", lam)
        if not 0 < lam <= 1:
            raise ValueError("lambda must lie in (0, 1]")
        if self.n_rays < 1:
            raise ValueError("need at least one ray")


def build_S_lambda(params: StarParams) -> StarSubtree:
    """Rays ``-2^n`` (n = 1..n_rays) with reach ``a_lambda(n) / (2^n + 1)``."""
    lam = params.lam
    return StarSubtree.of({-(2 ** n): a_lambda(lam, n) / (2 ** n + 1) for n in range(1, params.n_rays + 1)})


def truncation_error(params: StarParams) -> Fraction:
    """Radius bound of the first omitted ray: every omitted ray is at least this short."""
    return Fraction(1, 2 ** (params.n_rays + 1) + 1)


def shifted_truncation_slack(params: StarParams, s: int) -> Fraction:
    """Largest reach of an omitted ray of S_lambda after applying ``g^s`` (needs s < 2^(N+1))."""
    first = 2 ** (params.n_rays + 1)
    if s >= first:
        raise ValueError("shift reaches the omitted rays")
    return params.lam / (first - s + 1)


@dataclass(frozen=True)
class AttractionCheck:
    lam: Fraction
    n: int
    shift: int
    computed: Fraction
    slack: Fraction
    bound: Fraction

    @property
    def certified(self) -> Fraction:
        return self.computed + self.slack

    @property
    def ok(self) -> bool:
        return self.certified <= self.bound


def zero_attraction(params: StarParams, n: int, slack: Fraction | None = None) -> AttractionCheck:
    """Distance from ``g^{2^n + 2^(n-1)}(S_lambda)`` to the root, against ``1/(2^(n-1)+1)``.

    ``slack`` defaults to the truncation error of the omitted rays.
    """
    s = 2 ** n + 2 ** (n - 1)
    image = g_subtree(build_S_lambda(params), s)
    computed = star_hausdorff(image, ROOT_TREE)
    if slack is None:
        slack = truncation_error(params)
    return AttractionCheck(params.lam, n, s, computed, slack, Fraction(1, 2 ** (n - 1) + 1))


# ---------------------------------------------------------------------------
# omega-chaos certificate


def K(alpha) -> StarSubtree:
    """The segment of length alpha on ray 0."""
    return StarSubtree.of({0: as_fraction(alpha)})


@dataclass(frozen=True)
class Witness:
    m: int
    distance: Fraction
    bound: Fraction
    slack: Fraction

    @property
    def ok(self) -> bool:
        return max(self.distance, self.slack) <= self.bound

    def to_dict(self) -> dict:
        return {"m": self.m, "iterate": 2 ** self.m, "distance": format_fraction(self.distance),
                "bound": format_fraction(self.bound), "slack": format_fraction(self.slack), "ok": self.ok}


@dataclass(frozen=True)
class AlphaReport:
    alpha: Fraction
    band: str | None
    witnesses: tuple
    separation: Fraction | None
    non_periodic: Fraction | None
    horizon: int

    @property
    def ok(self) -> bool:
        return (self.band is not None and bool(self.witnesses) and all(w.ok for w in self.witnesses)
                and self.separation is not None and self.separation > 0
                and self.non_periodic is not None and self.non_periodic > 0)

    def to_dict(self) -> dict:
        fmt = lambda v: None if v is None else format_fraction(v)
        return {"alpha": format_fraction(self.alpha), "band": self.band,
                "witnesses": [w.to_dict() for w in self.witnesses],
                "separation_lower_bound": fmt(self.separation),
                "non_periodicity": fmt(self.non_periodic), "horizon": self.horizon, "ok": self.ok}


def _ray0_reach(params: StarParams, s: int) -> Fraction:
    # ray -2^m reaches ray 0 exactly when s = 2^m
    if s >= 1 and s & (s - 1) == 0:
        m = s.bit_length() - 1
        if 1 <= m <= params.n_rays:
            return a_lambda(params.lam, m)
    return Fraction(0)


def _witnesses(params: StarParams, alpha: Fraction, tol: Fraction) -> list:
    """Indices m with ``max{1/(2^(m-1)+1), |a(m) - alpha|} <= tol``, each checked exactly."""
    S = build_S_lambda(params)
    Ka = K(alpha)
    out = []
    for m in range(1, params.n_rays + 1):
        bound = max(Fraction(1, 2 ** (m - 1) + 1), abs(a_lambda(params.lam, m) - alpha))
        if bound > tol:
            continue
        d = star_hausdorff(Ka, g_subtree(S, 2 ** m))
        out.append(Witness(m, d, bound, shifted_truncation_slack(params, 2 ** m)))
    return out


def _separation(other: StarParams, alpha: Fraction, horizon: int) -> Fraction:
    """Lower bound on ``d_H(K_alpha, g^s(S_other))`` over ``0 <= s <= horizon``.

    Only the ray-0 part of the image can come near K_alpha, and omitted rays
    reach ray 0 only after ``2^(N+1)`` steps.
    """
    if horizon >= 2 ** (other.n_rays + 1):
        raise ValueError("horizon reaches the omitted rays")
    return min(abs(alpha - _ray0_reach(other, s)) for s in range(horizon + 1))


def _non_periodicity(alpha: Fraction, horizon: int) -> Fraction:
    """``min_{1<=s<=horizon} d_H(K_alpha, g^s K_alpha)``."""
    Ka = K(alpha)
    return min(star_hausdorff(Ka, g_subtree(Ka, s)) for s in range(1, horizon + 1))


def band_of(lam: Fraction, lam_prime: Fraction, alpha: Fraction) -> str | None:
    """Which omega-limit set K_alpha is certified to belong to.

    "upper": in the limit set of S_lam' but not of S_lam, for
    ``max(lam, lam'/2) <= alpha <= lam'`` with ``alpha > lam``.
    "lower": in the limit set of S_lam but not of S_lam', for
    ``lam/2 < alpha <= lam`` with ``alpha < lam'/2``.
    """
    if lam < alpha <= lam_prime and alpha >= lam_prime / 2:
        return "upper"
    if lam / 2 < alpha <= lam and alpha < lam_prime / 2:
        return "lower"
    return None


@dataclass(frozen=True)
class OmegaChaosCertificate:
    lam: Fraction
    lam_prime: Fraction
    tolerance: Fraction
    depth: int
    horizon: int
    shared_root: tuple
    alphas: tuple

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.shared_root) and all(a.ok for a in self.alphas)

    def to_dict(self) -> dict:
        return {"kind": "omega_chaos", "lambda": format_fraction(self.lam),
                "lambda_prime": format_fraction(self.lam_prime),
                "tolerance": format_fraction(self.tolerance), "depth": self.depth, "horizon": self.horizon,
                "shared_root": [{"lambda": format_fraction(c.lam), "n": c.n,
                                 "distance": format_fraction(c.certified),
                                 "bound": format_fraction(c.bound), "ok": c.ok} for c in self.shared_root],
                "witnesses": [a.to_dict() for a in self.alphas], "ok": self.ok}


def omega_chaos_certificate(lam, lam_prime, alphas: Iterable, tolerance=Fraction(1, 16), depth: int = 20,
                            horizon: int = 2 ** 12) -> OmegaChaosCertificate:
    lam, lam_prime, tolerance = as_fraction(lam), as_fraction(lam_prime), as_fraction(tolerance)
    if not 0 < lam < lam_prime <= 1:
        raise ValueError("need 0 < lambda < lambda' <= 1")
    P, Pp = StarParams(lam, depth), StarParams(lam_prime, depth)
    shared = tuple(zero_attraction(params, n) for params in (P, Pp) for n in range(2, depth // 2 + 1))
    reports = []
    for alpha in alphas:
        alpha = as_fraction(alpha)
        band = band_of(lam, lam_prime, alpha)
        if band is None:
            reports.append(AlphaReport(alpha, None, (), None, None, horizon))
            continue
        own, other = (Pp, P) if band == "upper" else (P, Pp)
        reports.append(AlphaReport(alpha, band, tuple(_witnesses(own, alpha, tolerance)),
                                   _separation(other, alpha, horizon), _non_periodicity(alpha, horizon),
                                   horizon))
    return OmegaChaosCertificate(lam, lam_prime, tolerance, depth, horizon, shared, tuple(reports))


# ---------------------------------------------------------------------------
# separated families


class BudgetExceeded(RuntimeError):
    """The requested enumeration is larger than the configured budget."""


def T_sigma(sigma: tuple, k: int) -> StarSubtree:
    """Ray ``-j`` carries reach ``sigma_j / (k (j+1))`` for j = 1..n."""
    return StarSubtree.of({-j: Fraction(s, k * (j + 1)) for j, s in enumerate(sigma, start=1)})


@dataclass(frozen=True)
class EntropyCertificate:
    k: int
    n: int
    count: int
    pairs_checked: int
    min_separation: Fraction | None
    eps: Fraction

    @property
    def ok(self) -> bool:
        return self.count == self.k ** self.n and (self.min_separation is None or self.min_separation >= self.eps)

    @property
    def rate(self) -> float:
        return math.log(self.count) / self.n

    def to_dict(self) -> dict:
        return {"kind": "entropy", "k": self.k, "n": self.n, "count": self.count,
                "pairs_checked": self.pairs_checked,
                "min_separation": None if self.min_separation is None else format_fraction(self.min_separation),
                "eps": format_fraction(self.eps), "rate_lower_bound": self.rate, "ok": self.ok}


DEFAULT_PAIR_BUDGET = 10 ** 5


def entropy_certificate(k: int, n: int, budget: int = DEFAULT_PAIR_BUDGET) -> EntropyCertificate:
    """Check that the k^n subtrees T_sigma are pairwise 1/k apart at some time j in 1..n.

    After j steps ray -j has become ray 0 with its reach multiplied by j+1,
    so two families that differ in coordinate j differ by at least 1/k there.
    """
    if k < 1 or n < 1:
        raise ValueError("need k >= 1 and n >= 1")
    count = k ** n
    pairs = count * (count - 1) // 2
    if pairs > budget:
        raise BudgetExceeded(f"{pairs} pairs exceed the budget of {budget}")
    eps = Fraction(1, k)
    family = [T_sigma(sigma, k) for sigma in itertools.product(range(1, k + 1), repeat=n)]
    # g^j of each member, as plain dicts for fast lookups
    images = [[g_subtree(T, j).table for j in range(1, n + 1)] for T in family]
    worst = None
    for a, b in itertools.combinations(range(count), 2):
        best = max(_dh_tables(images[a][j], images[b][j]) for j in range(n))
        if worst is None or best < worst:
            worst = best
    return EntropyCertificate(k, n, count, pairs, worst, eps)


def _dh_tables(a: dict, b: dict) -> Fraction:
    zero = Fraction(0)
    return max((abs(a.get(r, zero) - b.get(r, zero)) for r in a.keys() | b.keys()), default=zero)

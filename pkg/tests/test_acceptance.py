"""Acceptance criteria, each run at its stated size and tolerance.

Every test records one PASS/FAIL line that is echoed in the terminal summary.
"""
import math
import random
import time
from fractions import Fraction

import pytest

from acceptance_log import record
from dendrodyn.corpus import corpus, random_point, random_subtree, rng_for
from dendrodyn.hyperspace import FiniteSet, asymptotic_companion, hausdorff, hyper_pair_window
from dendrodyn.odometer import Base, add_one, cycle_structure, d_alpha, is_single_cycle, iterate, rr_certificate
from dendrodyn.orbits import check_recurrence_structure, omega_limit
from dendrodyn.star import (BudgetExceeded, StarParams, StarPoint, entropy_certificate, g_apply,
                            omega_chaos_certificate, ray_bound, star_distance, zero_attraction)
from dendrodyn.entropy import sep_lower_bound
from dendrodyn.tree import along, convex_hull, distance, room

from oracles import hausdorff_oracle

EPS = Fraction(1, 10 ** 6)
HORIZON = 10_000


def test_entropy_lower_bound():
    start = time.perf_counter()
    done, refused, bad = [], [], []
    for k in (2, 3, 4):
        for n in range(1, 9):
            if (k ** n) * (k ** n - 1) // 2 > 10 ** 5:
                with pytest.raises(BudgetExceeded):
                    entropy_certificate(k, n)
                refused.append((k, n))
                continue
            cert = entropy_certificate(k, n)
            done.append((k, n))
            if not (cert.count == k ** n and cert.min_separation >= Fraction(1, k)):
                bad.append((k, n, cert.count, cert.min_separation))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 30
    record(1, ok, f"{len(done)} (k,n) certified with count k^n, {len(refused)} over the 10^5-pair budget "
                  f"refused, {elapsed:.1f}s")
    assert not bad
    assert elapsed < 30


def test_zero_attraction():
    start = time.perf_counter()
    slack = Fraction(1, 2 ** 20 + 1)
    failures = []
    for lam in (Fraction(1), Fraction(1, 2), Fraction(1, 3)):
        for n in range(2, 13):
            check = zero_attraction(StarParams(lam, 20), n, slack)
            if not check.ok:
                failures.append((lam, n, check.certified, check.bound))
    elapsed = time.perf_counter() - start
    record(2, not failures and elapsed < 5, f"33 cases, {len(failures)} above 1/(2^(n-1)+1), {elapsed:.2f}s")
    assert not failures
    assert elapsed < 5


def test_omega_chaos_witnesses():
    start = time.perf_counter()
    alphas = [Fraction(1, 2) + Fraction(i, 20) for i in range(1, 11)]
    cert = omega_chaos_certificate(Fraction(1, 2), Fraction(1), alphas, tolerance=Fraction(1, 16),
                                   depth=20, horizon=2 ** 12)
    elapsed = time.perf_counter() - start
    exact = all(w.distance <= w.bound for a in cert.alphas for w in a.witnesses)
    found = all(a.witnesses for a in cert.alphas)
    record(3, cert.ok and exact and found and elapsed < 60,
           f"{len(alphas)} alphas, {sum(len(a.witnesses) for a in cert.alphas)} witnesses, "
           f"non-periodic to 2^12, {elapsed:.2f}s")
    assert found and exact and cert.ok
    assert all(a.band == "upper" for a in cert.alphas)
    assert elapsed < 60


def test_interval_rigidity(reflection, unit):
    om = omega_limit(reflection, unit.point(0, Fraction(3, 10)))
    exact = set(om.points) == {unit.point(0, Fraction(3, 10)), unit.point(0, Fraction(7, 10))}
    maps = corpus(seed=4, n_maps=100, n_vertices=6, path=True)
    rng = rng_for(44)
    resolved, unresolved, too_big = 0, 0, []
    for f in maps:
        for _ in range(5):
            x = random_point(rng, f.tree)
            o = omega_limit(f, x)
            if not o.resolved:
                unresolved += 1
                continue
            resolved += 1
            if len(o.points) > 2:
                too_big.append((f, x, o.points))
    record(4, exact and not too_big,
           f"reflection exact={exact}; {resolved} resolved limits on 100 path maps, {len(too_big)} larger than 2, "
           f"{unresolved} unresolved")
    assert exact
    assert not too_big


def test_recurrence_structure():
    maps = corpus(seed=5, n_maps=5, n_vertices=10)
    rng = rng_for(55)
    violations = []
    for f in maps:
        pts = [random_point(rng, f.tree) for _ in range(20)]
        rep = check_recurrence_structure(f, pts, EPS, HORIZON, max_n=64)
        violations.extend(rep.violations)
    record(5, not violations, f"5 maps x 20 samples, {len(violations)} violations")
    assert not violations


def _element(rng, tree, kind):
    if kind == "finite":
        return FiniteSet.of(random_point(rng, tree) for _ in range(rng.randint(1, 3)))
    return random_subtree(rng, tree, 3)


def test_no_li_yorke_pairs():
    maps = corpus(seed=6, n_maps=10, n_vertices=8)
    rng = rng_for(66)
    exceptions, proximal = [], 0
    for kind in ("finite", "subtree"):
        for i in range(1000):
            f = maps[i % len(maps)]
            A, B = _element(rng, f.tree, kind), _element(rng, f.tree, kind)
            stats = hyper_pair_window(f, A, B, HORIZON)
            if stats.inf_upper < EPS:
                proximal += 1
                if not stats.sup_upper < EPS:
                    exceptions.append((kind, A, B, stats))
    record(6, not exceptions, f"2000 pairs, {proximal} proximal, {len(exceptions)} proximal but not asymptotic")
    assert not exceptions


def test_asymptotic_companions():
    maps = corpus(seed=7, n_maps=10, n_vertices=8)
    rng = rng_for(77)
    failures = []
    for kind in ("finite", "subtree"):
        for i in range(100):
            f = maps[i % len(maps)]
            E = _element(rng, f.tree, kind)
            cert = asymptotic_companion(f, E, EPS, HORIZON)
            if not cert.ok:
                failures.append((kind, E, cert))
    record(7, not failures, f"200 elements, {len(failures)} companion failures")
    assert not failures


def test_odometer_regular_recurrence():
    start = time.perf_counter()
    b = Base.uniform(2, 16)
    length, distinct = cycle_structure(b)
    # the integer shortcut used by the certificate must agree with add_one along the whole cycle
    agree, walk = True, (0,) * 16
    for n in range(1, 2 ** 16 + 1):
        walk = add_one(b, walk)
        if n % 4099 == 0:
            agree &= walk == iterate(b, (0,) * 16, n)
    rng = random.Random(8)
    bad = []
    for _ in range(100):
        x = tuple(rng.randrange(2) for _ in range(16))
        for M in range(17):
            cert = rr_certificate(b, x, M)
            direct = d_alpha(b, x, iterate(b, x, 2 ** M))
            if not cert.ok or direct > Fraction(1, 2 ** M):
                bad.append((x, M))
    elapsed = time.perf_counter() - start
    ok = length == distinct == 2 ** 16 and is_single_cycle(b) and agree and not bad and elapsed < 5
    record(8, ok, f"cycle length {length}, {len(bad)} failed certificates, {elapsed:.2f}s")
    assert length == distinct == 2 ** 16
    assert agree and not bad
    assert elapsed < 5


def _perturb(rng, p, delta):
    d = rng.choice(p.directions())
    r = room(p, d)
    t = min(r, delta * Fraction(rng.randint(0, 16), 16))
    return along(p, d, t) if t > 0 else p


def test_hull_continuity():
    maps = corpus(seed=9, n_maps=10, n_vertices=8)
    rng = rng_for(99)
    failures = []
    for i in range(10_000):
        tree = maps[i % len(maps)].tree
        delta = Fraction(rng.randint(1, 64), 64)
        A = [random_point(rng, tree) for _ in range(rng.randint(1, 6))]
        B = [_perturb(rng, p, delta) for p in A]
        assert all(distance(a, b) <= delta for a, b in zip(A, B))
        if hausdorff(convex_hull(A), convex_hull(B)) > delta:
            failures.append((A, B, delta))
    record(9, not failures, f"10^4 trials, {len(failures)} exceed delta")
    assert not failures


def test_subtree_hausdorff_oracle():
    rng = rng_for(1010)
    maps = corpus(seed=10, n_maps=20, n_vertices=7)
    worst, failures = 0.0, []
    for i in range(100):
        tree = maps[i % len(maps)].tree
        A, B = random_subtree(rng, tree, 3), random_subtree(rng, tree, 3)
        exact = hausdorff(A, B)
        approx = hausdorff_oracle(tree, A, B, spacing=1e-3)
        gap = abs(float(exact) - approx)
        worst = max(worst, gap)
        if gap > 1e-3:
            failures.append((A, B, exact, approx))
    record(10, not failures, f"100 pairs, largest gap {worst:.2e} against spacing 1e-3")
    assert not failures


def test_base_map_entropy_evidence():
    # pool: rays -50..50 (as far as 50 steps can carry a point to ray 0 and beyond), radius uniform
    rng = random.Random(11)
    pool = set()
    while len(pool) < 1000:
        r = rng.randint(-50, 50)
        pool.add(StarPoint(r, Fraction(rng.randint(1, 1000), 1000) * ray_bound(r)))
    res = sep_lower_bound(g_apply, star_distance, pool, 50, Fraction(1, 10), key=StarPoint.sort_key)
    rate = math.log(res.count) / 50
    record(11, rate < 0.05, f"greedy count {res.count} on 1000 points, rate {rate:.4f} (threshold 0.05)")
    assert rate < 0.05

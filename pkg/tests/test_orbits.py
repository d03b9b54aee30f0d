from fractions import Fraction

import pytest
from hypothesis import given

from dendrodyn.corpus import corpus, random_point, rng_for
from dendrodyn.maps import fixed_set, iterate, periodic_points
from dendrodyn.orbits import (EXACT, LIMIT_CYCLE, brute_window, check_recurrence_structure, classify_recurrence,
                              omega_limit, orbit, orbit_model, pair_type, rr_certificate)
from dendrodyn.tree import distance

from strategies import monotone_maps, seeds

EPS = Fraction(1, 10 ** 6)


def test_orbit_examples(reflection, contraction, unit):
    half = unit.point(0, Fraction(1, 2))
    assert orbit(reflection, half, 10).cycle == (0, 1)
    rec = orbit(reflection, unit.point(0, Fraction(3, 10)), 10)
    assert rec.cycle == (0, 2)
    assert rec.at(7) == unit.point(0, Fraction(7, 10))
    rec = orbit(contraction, unit.vertex(1), 200)
    assert rec.cycle is None
    offs = [p.on_edge(0) for p in rec.points]
    assert all(a > b for a, b in zip(offs, offs[1:]))


def test_omega_examples(reflection, contraction, unit):
    om = omega_limit(reflection, unit.point(0, Fraction(3, 10)))
    assert om.kind == EXACT
    assert set(om.points) == {unit.point(0, Fraction(3, 10)), unit.point(0, Fraction(7, 10))}
    om = omega_limit(contraction, unit.vertex(1))
    assert om.kind == LIMIT_CYCLE and om.points == (unit.vertex(0),)
    assert set(om.points) == set(fixed_set(contraction, 1).points)


def test_rotation_limit_cycle(rotation):
    t = rotation.tree
    om = omega_limit(rotation, t.vertex("d2"))
    assert om.resolved and om.period == 3
    assert set(om.points) == {t.vertex("a1"), t.vertex("b1"), t.vertex("d1")}


def test_classification_examples(reflection, contraction, unit):
    assert classify_recurrence(reflection, unit.point(0, Fraction(1, 2))).kind == "Fixed"
    rep = classify_recurrence(reflection, unit.point(0, Fraction(3, 10)))
    assert (rep.kind, rep.period, rep.exact) == ("Periodic", 2, True)
    rep = classify_recurrence(contraction, unit.vertex(1))
    assert rep.kind == "Nonrecurrent"
    assert rr_certificate(contraction, unit.vertex(1), EPS, 500) is None


def test_pair_examples(reflection, contraction, unit):
    x = unit.point(0, Fraction(3, 10))
    assert pair_type(reflection, x, x).verdict == "Asymptotic"
    assert pair_type(contraction, unit.vertex(1), unit.point(0, Fraction(1, 3))).verdict == "Asymptotic"
    rep = pair_type(reflection, x, unit.point(0, Fraction(2, 5)))
    assert rep.verdict == "Distal"
    assert rep.stats.inf_lower == rep.stats.sup_upper == Fraction(1, 10)


def test_model_matches_iteration():
    rng = rng_for(31)
    checked = 0
    for f in corpus(seed=31, n_maps=6, n_vertices=10):
        for _ in range(10):
            x = random_point(rng, f.tree)
            model = orbit_model(f, x)
            assert model is not None
            y = x
            for n in range(400):
                assert model.point(n) == y
                y = f(y)
            checked += 1
    assert checked == 60


def test_residual_sup_bounds_tail():
    rng = rng_for(32)
    for f in corpus(seed=32, n_maps=4, n_vertices=8):
        for _ in range(5):
            model = orbit_model(f, random_point(rng, f.tree))
            for n0 in (0, 5, 40):
                bound = model.residual_sup(n0)
                worst = max(distance(model.point(n), model.limit(n)) for n in range(n0, n0 + 300))
                assert worst <= bound


def test_model_window_agrees_with_brute_window():
    rng = rng_for(33)
    for f in corpus(seed=33, n_maps=4, n_vertices=8):
        for _ in range(5):
            x, y = random_point(rng, f.tree), random_point(rng, f.tree)
            stats = pair_type(f, x, y, EPS, 400).stats
            xs = _orbit_list(f, x, 400)
            ys = _orbit_list(f, y, 400)
            brute = brute_window(distance, xs, ys, 200)
            assert stats.sup_upper >= brute.sup_lower
            assert stats.inf_lower <= brute.inf_upper
            assert stats.inf_upper >= brute.inf_upper
            assert stats.sup_lower <= brute.sup_lower


def _orbit_list(f, x, n):
    out = [x]
    for _ in range(n):
        out.append(f(out[-1]))
    return out


def test_omega_points_are_solved_periodic_points():
    rng = rng_for(34)
    for f in corpus(seed=34, n_maps=5, n_vertices=10):
        for _ in range(8):
            om = omega_limit(f, random_point(rng, f.tree))
            assert om.resolved
            table = periodic_points(f, om.period)
            for z in om.points:
                assert iterate(f, z, om.period) == z
                assert min(pp.distance_to(z) for pp in table) == 0


def test_structure_check_refuses_non_monotone(tent):
    with pytest.raises(ValueError):
        check_recurrence_structure(tent, [tent.tree.vertex(0)])


def test_structure_check_samples(reflection, contraction, unit):
    pts = [unit.point(0, Fraction(k, 10)) for k in range(11)]
    assert check_recurrence_structure(reflection, pts).ok
    assert check_recurrence_structure(contraction, pts).ok


def test_asymptotic_rigidity_on_corpus():
    """No distinct asymptotic pair has one point regularly recurrent and the other recurrent."""
    rng = rng_for(35)
    for f in corpus(seed=35, n_maps=5, n_vertices=8):
        samples = [random_point(rng, f.tree) for _ in range(6)]
        om_pts = [z for x in samples for z in omega_limit(f, x).points]
        pts = samples + om_pts
        kinds = {p: classify_recurrence(f, p, EPS, 2000) for p in pts}
        for i, x in enumerate(pts):
            for y in pts[i + 1:]:
                if x == y:
                    continue
                rx, ry = kinds[x], kinds[y]
                if (rx.regularly_recurrent and ry.recurrent) or (ry.regularly_recurrent and rx.recurrent):
                    assert pair_type(f, x, y, EPS, 2000).verdict != "Asymptotic"


@given(monotone_maps(max_vertices=6, path=True), seeds)
def test_interval_omega_sets_have_at_most_two_points(f, seed):
    x = random_point(rng_for(seed), f.tree)
    om = omega_limit(f, x)
    assert om.resolved
    assert 1 <= len(om.points) <= 2


@given(monotone_maps(), seeds)
def test_omega_is_invariant(f, seed):
    om = omega_limit(f, random_point(rng_for(seed), f.tree))
    assert om.resolved
    assert {f(z) for z in om.points} == set(om.points)

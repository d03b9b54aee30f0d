import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dendrodyn.odometer import (Base, add_one, cycle_structure, d_alpha, from_dict, is_single_cycle, iterate,
                                loads, rr_certificate, to_dict)


def test_add_one_examples():
    assert add_one(Base.uniform(2, 3), (0, 0, 0)) == (1, 0, 0)
    assert add_one(Base((2, 3)), (1, 2)) == (0, 0)
    assert add_one(Base.uniform(2, 3), (1, 1, 0)) == (0, 0, 1)


def test_metric_examples():
    b = Base.uniform(3, 3)
    assert d_alpha(b, (0, 1, 2), (0, 1, 2)) == 0
    assert d_alpha(b, (0, 0, 0), (1, 0, 0)) == Fraction(1, 2)
    assert d_alpha(Base((3, 3)), (0, 1), (0, 2)) == Fraction(1, 4)


def test_small_certificate_by_enumeration():
    b = Base.uniform(2, 2)
    walk = [(0, 0)]
    for _ in range(3):
        walk.append(add_one(b, walk[-1]))
    assert len(set(walk)) == 4 and add_one(b, walk[-1]) == (0, 0)
    cert = rr_certificate(b, (0, 0), 1)
    assert cert.ok and cert.period == 2
    assert all(d_alpha(b, (0, 0), walk[k]) <= Fraction(1, 2) for k in (0, 2))


def test_depth_ten_full_cycle():
    b = Base.uniform(2, 10)
    rng = random.Random(10)
    for _ in range(20):
        x = tuple(rng.randrange(2) for _ in range(10))
        y = x
        for _ in range(1024):
            y = add_one(b, y)
        assert y == x
        assert rr_certificate(b, x, 10).max_distance == 0


def test_depth_zero_certificate_is_trivial():
    b = Base((2, 3, 5))
    cert = rr_certificate(b, (1, 2, 3), 0)
    assert cert.ok and cert.bound == 1 and cert.period == 1


def test_non_prime_base_is_flagged():
    cert = rr_certificate(Base((2, 4, 3)), (0, 0, 0), 2)
    assert cert.ok and not cert.prime_base
    assert rr_certificate(Base((2, 3, 5)), (0, 0, 0), 2).prime_base


def test_validation():
    with pytest.raises(ValueError):
        Base((1, 2))
    with pytest.raises(ValueError):
        Base(())
    b = Base((2, 3))
    with pytest.raises(ValueError):
        add_one(b, (0, 3))
    with pytest.raises(ValueError):
        add_one(b, (0,))
    with pytest.raises(ValueError):
        rr_certificate(b, (0, 0), 3)


def test_certificate_against_direct_enumeration():
    b = Base((2, 3, 2, 5))
    states = list(itertools.product(*(range(j) for j in b.digits)))
    states = [tuple(s) for s in states]
    for x in states[::7]:
        for M in range(b.depth + 1):
            P = b.period(M)
            worst, y = Fraction(0), x
            for k in range(1, b.size // P + 1):
                for _ in range(P):
                    y = add_one(b, y)
                worst = max(worst, d_alpha(b, x, y))
            assert rr_certificate(b, x, M).max_distance == worst


@given(st.lists(st.integers(2, 5), min_size=1, max_size=5))
def test_single_cycle(digits):
    b = Base(tuple(digits))
    assert is_single_cycle(b)
    assert cycle_structure(b) == (b.size, b.size)


@given(st.lists(st.integers(2, 5), min_size=1, max_size=6), st.data())
def test_period_fixes_leading_digits(digits, data):
    b = Base(tuple(digits))
    x = tuple(data.draw(st.integers(0, j - 1)) for j in digits)
    M = data.draw(st.integers(0, b.depth))
    y = iterate(b, x, b.period(M))
    assert y[:M] == x[:M]
    assert d_alpha(b, x, y) <= Fraction(1, 2 ** M)
    n = data.draw(st.integers(0, 3 * b.size))
    z = x
    for _ in range(n % (b.size + 3)):
        z = add_one(b, z)
    assert z == iterate(b, x, n % (b.size + 3))


def test_serialization():
    b = Base((2, 3))
    assert from_dict(to_dict(b, (1, 2))) == (b, (1, 2))
    assert loads('{"base": [2, 3], "point": [0, 1]}') == (b, (0, 1))

from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from dendrodyn.maps import PLSelfMap
from dendrodyn.tree import MetricTree

from acceptance_log import ACCEPTANCE

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'} - {detail}")


@pytest.fixture
def ytree():
    return MetricTree(["a", "b", "c", "d"], [("c", "a", 1), ("c", "b", 1), ("c", "d", 1)])


@pytest.fixture
def unit():
    return MetricTree.path([1])


def interval_map(tree, *images):
    """Map on a path tree given by the offsets (along edge 0) of the vertex images."""
    pts = [tree.point(0, Fraction(v)) for v in images]
    return PLSelfMap(tree, pts)


@pytest.fixture
def reflection(unit):
    return interval_map(unit, 1, 0)


@pytest.fixture
def identity(unit):
    return interval_map(unit, 0, 1)


@pytest.fixture
def contraction(unit):
    return interval_map(unit, 0, Fraction(1, 2))


@pytest.fixture
def tent():
    t = MetricTree.path([Fraction(1, 2), Fraction(1, 2)])
    return PLSelfMap(t, [t.vertex(0), t.vertex(2), t.vertex(0)])


@pytest.fixture
def rotation():
    """Three two-edge arms rotated into each other; the outer half of one arm is pulled back inward."""
    names = ["c", "a1", "a2", "b1", "b2", "d1", "d2"]
    t = MetricTree(names, [("c", "a1", 1), ("a1", "a2", 1), ("c", "b1", 1), ("b1", "b2", 1),
                           ("c", "d1", 1), ("d1", "d2", 1)])
    v = t.vertex
    return PLSelfMap(t, {"c": v("c"), "a1": v("b1"), "a2": v("b2"), "b1": v("d1"), "b2": v("d2"),
                         "d1": v("a1"), "d2": t.point(1, Fraction(1, 2))})

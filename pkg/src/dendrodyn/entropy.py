"""Separated sets and entropy-growth tables for arbitrary maps.

A system is given by a step function and a metric. Two points are
separated when their orbits are more than ``eps`` apart at one of the
tested times. The default is times ``0..n-1`` with strict inequality;
both choices can be changed for families whose separation is stated
differently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

GREEDY = "GreedyLowerBound"
EXACT_FAMILY = "ExactFamily"


@dataclass(frozen=True)
class SepResult:
    n: int
    eps: Fraction
    count: int
    witnesses: tuple | None
    method: str

    @property
    def rate(self) -> float:
        return math.log(self.count) / self.n


def _trajectory(step: Callable, x, length: int) -> list:
    out = [x]
    for _ in range(length - 1):
        out.append(step(out[-1]))
    return out


def _times(n: int, times: Sequence[int] | None) -> list:
    return list(range(n)) if times is None else list(times)


def separated(a: Sequence, b: Sequence, metric: Callable, eps, times: Iterable[int], strict: bool = True) -> bool:
    """True if the trajectories a and b are more than eps apart (at least eps if not strict) at some time."""
    for j in times:
        d = metric(a[j], b[j])
        if d > eps or (not strict and d >= eps):
            return True
    return False


def sep_lower_bound(step: Callable, metric: Callable, pool: Iterable, n: int, eps, *,
                    key: Callable | None = None, times: Sequence[int] | None = None,
                    strict: bool = True, keep_witnesses: bool = True) -> SepResult:
    """Greedy (n, f, eps)-separated subset of ``pool``.

    The pool is scanned in sorted order (by ``key``) and a point is kept when
    it is separated from everything kept so far, so the count is a lower bound
    for the maximal separated cardinality.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    pool = sorted(set(pool), key=key)
    if not pool:
        raise ValueError("empty pool")
    ts = _times(n, times)
    length = max(ts) + 1
    kept, trajs = [], []
    for x in pool:
        tx = _trajectory(step, x, length)
        if all(separated(tx, ty, metric, eps, ts, strict) for ty in trajs):
            kept.append(x)
            trajs.append(tx)
    return SepResult(n, eps, len(kept), tuple(kept) if keep_witnesses else None, GREEDY)


def verify_separated(step: Callable, metric: Callable, witnesses: Sequence, n: int, eps, *,
                     times: Sequence[int] | None = None, strict: bool = True) -> bool:
    """Independent pairwise re-check of a witness family."""
    eps = Fraction(eps)
    ts = _times(n, times)
    trajs = [_trajectory(step, x, max(ts) + 1) for x in witnesses]
    return all(separated(trajs[i], trajs[j], metric, eps, ts, strict)
               for i in range(len(trajs)) for j in range(i + 1, len(trajs)))


@dataclass(frozen=True)
class CurveRow:
    n: int
    eps: Fraction
    count: int
    rate: float


def entropy_curve(step: Callable, metric: Callable, pool: Sequence, n_max: int, eps_list: Iterable, *,
                  key: Callable | None = None, strict: bool = True) -> list:
    """Rows (n, eps, count, (1/n) log count) for n = 1..n_max and every eps."""
    rows = []
    for eps in sorted(Fraction(e) for e in eps_list):
        for n in range(1, n_max + 1):
            res = sep_lower_bound(step, metric, pool, n, eps, key=key, strict=strict, keep_witnesses=False)
            rows.append(CurveRow(n, eps, res.count, res.rate))
    return rows


def curve_csv(rows: Iterable[CurveRow]) -> str:
    lines = ["n,eps,count,rate"]
    for r in rows:
        lines.append(f"{r.n},{r.eps.numerator}/{r.eps.denominator},{r.count},{r.rate:.12g}")
    return "\n".join(lines) + "\n"

"""Adding machines truncated to finitely many digits.

A point is a digit tuple ``(x_1, ..., x_N)`` with ``0 <= x_i < j_i``. The map
adds one to the first digit and carries to the right; a carry out of the
last digit is dropped, which makes the truncated map a single cycle through
all ``j_1 * ... * j_N`` states.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import prod

import numpy as np


@dataclass(frozen=True)
class Base:
    digits: tuple

    def __post_init__(self):
        if not self.digits:
            raise ValueError("base needs at least one digit")
        if any(not isinstance(j, int) or j < 2 for j in self.digits):
            raise ValueError("every digit bound must be an integer >= 2")

    @classmethod
    def uniform(cls, j: int, depth: int) -> "Base":
        return cls((j,) * depth)

    @property
    def depth(self) -> int:
        return len(self.digits)

    @property
    def size(self) -> int:
        return prod(self.digits)

    def period(self, M: int) -> int:
        """Number of steps after which the first M digits come back: ``j_1 * ... * j_M``."""
        return prod(self.digits[:M])

    @property
    def prime(self) -> bool:
        return all(_is_prime(j) for j in self.digits)

    def check(self, x: tuple) -> tuple:
        x = tuple(x)
        if len(x) != self.depth:
            raise ValueError(f"point has {len(x)} digits, base has {self.depth}")
        for xi, j in zip(x, self.digits):
            if not 0 <= xi < j:
                raise ValueError(f"digit {xi} out of range for bound {j}")
        return x

    # mixed-radix integer encoding, first digit least significant

    def encode(self, x: tuple) -> int:
        value, scale = 0, 1
        for xi, j in zip(x, self.digits):
            value += xi * scale
            scale *= j
        return value

    def decode(self, value: int) -> tuple:
        out = []
        for j in self.digits:
            value, r = divmod(value, j)
            out.append(r)
        return tuple(out)


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % p for p in range(2, int(n ** 0.5) + 1))


def add_one(b: Base, x: tuple) -> tuple:
    out = list(b.check(x))
    for i, j in enumerate(b.digits):
        if out[i] + 1 < j:
            out[i] += 1
            return tuple(out)
        out[i] = 0
    return tuple(out)


def iterate(b: Base, x: tuple, n: int) -> tuple:
    """``f^n(x)``; on the truncated space this is addition of n in the mixed radix."""
    return b.decode((b.encode(b.check(x)) + n) % b.size)


def d_alpha(b: Base, x: tuple, y: tuple) -> Fraction:
    """Truncated metric: sum of ``2^-i`` over the positions i where x and y differ."""
    x, y = b.check(x), b.check(y)
    return sum((Fraction(1, 2 ** (i + 1)) for i, (a, c) in enumerate(zip(x, y)) if a != c), Fraction(0))


@lru_cache(maxsize=32)
def cycle_structure(b: Base) -> tuple:
    """Walk add_one from zero; returns (length of the first return, number of distinct states seen)."""
    start = (0,) * b.depth
    x, steps, seen = start, 0, set()
    while True:
        seen.add(x)
        x = add_one(b, x)
        steps += 1
        if x == start or steps > b.size:
            break
    return steps, len(seen)


def is_single_cycle(b: Base) -> bool:
    length, distinct = cycle_structure(b)
    return length == distinct == b.size


@dataclass(frozen=True)
class RRCertificate:
    base: tuple
    point: tuple
    depth: int
    period: int
    checked: int
    bound: Fraction
    max_distance: Fraction
    single_cycle: bool
    prime_base: bool

    @property
    def ok(self) -> bool:
        return self.max_distance <= self.bound and self.single_cycle

    def to_dict(self) -> dict:
        return {"base": list(self.base), "point": list(self.point), "depth": self.depth,
                "period": self.period, "checked": self.checked,
                "bound": f"{self.bound.numerator}/{self.bound.denominator}",
                "max_distance": f"{self.max_distance.numerator}/{self.max_distance.denominator}",
                "single_cycle": self.single_cycle, "prime_base": self.prime_base, "ok": self.ok}


def _max_distance_numpy(b: Base, v: int, P: int, count: int) -> Fraction:
    # 2^N * d_alpha is an integer, so the maximum is computed exactly in int64
    N = b.depth
    vals = (v + np.arange(1, count + 1, dtype=np.int64) * P) % b.size
    x = b.decode(v)
    scaled = np.zeros(len(vals), dtype=np.int64)
    for i, j in enumerate(b.digits):
        digit = vals % j
        vals //= j
        scaled += (digit != x[i]).astype(np.int64) << (N - i - 1)
    return Fraction(int(scaled.max()) if len(scaled) else 0, 2 ** N)


def rr_certificate(b: Base, x: tuple, M: int) -> RRCertificate:
    """Check ``d_alpha(x, f^{k P_M}(x)) <= 2^-M`` for every k up to one full cycle.

    ``P_M = j_1 * ... * j_M``; ``M = 0`` is trivially certified with bound 1.
    """
    x = b.check(x)
    if not 0 <= M <= b.depth:
        raise ValueError("depth must satisfy 0 <= M <= N")
    P = b.period(M)
    count = b.size // P
    bound = Fraction(1, 2 ** M)
    v = b.encode(x)
    if b.depth <= 62 and b.size < 2 ** 62:
        worst = _max_distance_numpy(b, v, P, count)
    else:
        worst = max((d_alpha(b, x, b.decode((v + k * P) % b.size)) for k in range(1, count + 1)),
                    default=Fraction(0))
    return RRCertificate(b.digits, x, M, P, count, bound, worst, is_single_cycle(b), b.prime)


def to_dict(b: Base, x: tuple) -> dict:
    return {"base": list(b.digits), "point": list(x)}


def from_dict(data: dict) -> tuple:
    b = Base(tuple(int(j) for j in data["base"]))
    return b, b.check(tuple(int(v) for v in data["point"]))


def loads(text: str) -> tuple:
    return from_dict(json.loads(text))

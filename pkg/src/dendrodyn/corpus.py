"""Seeded random trees, monotone maps, points and subtrees."""
from __future__ import annotations

import random
from collections import deque
from fractions import Fraction

from .maps import PLSelfMap, is_monotone
from .tree import MetricTree, TreePoint, convex_hull, direction, point_on_arc, distance

LENGTHS = (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3, 4), Fraction(5, 4))


def rng_for(seed) -> random.Random:
    return random.Random(seed)


def random_fraction(rng: random.Random, max_den: int = 32) -> Fraction:
    """Rational in [0, 1] with a small denominator."""
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(0, den), den)


def random_tree(rng: random.Random, n_vertices: int = 10, path: bool = False) -> MetricTree:
    if n_vertices < 2:
        raise ValueError("need at least two vertices")
    names = [f"v{i}" for i in range(n_vertices)]
    edges = []
    for i in range(1, n_vertices):
        parent = i - 1 if path else rng.randrange(i)
        edges.append((names[parent], names[i], rng.choice(LENGTHS)))
    return MetricTree(names, edges)


def random_point(rng: random.Random, tree: MetricTree, max_den: int = 32) -> TreePoint:
    if rng.random() < 0.1:
        return tree.vertex(rng.randrange(len(tree.vertices)))
    e = rng.randrange(len(tree.edges))
    return tree.point(e, tree.edges[e][2] * random_fraction(rng, max_den))


def random_subtree(rng: random.Random, tree: MetricTree, max_points: int = 3):
    return convex_hull(random_point(rng, tree) for _ in range(rng.randint(1, max_points)))


def _side_vertices(tree: MetricTree, q: TreePoint, d) -> list:
    """Vertices reached from q by leaving in direction d."""
    e, sign = d
    u, v, _ = tree.edges[e]
    first = v if sign > 0 else u
    out, seen, queue = [], {first}, deque([first])
    blocked = {e}
    while queue:
        a = queue.popleft()
        out.append(a)
        for f in tree.incident[a]:
            if f in blocked:
                continue
            fu, fv, _ = tree.edges[f]
            b = fv if fu == a else fu
            if b not in seen:
                seen.add(b)
                queue.append(b)
    return out


def _candidate_map(rng: random.Random, tree: MetricTree, collapse: float) -> PLSelfMap:
    # Images are built outward from a root. A vertex either collapses onto its
    # parent's image or leaves it in a direction not yet used by its collapsed
    # component, so distinct branches never fold onto each other.
    root = rng.randrange(len(tree.vertices))
    images = [None] * len(tree.vertices)
    images[root] = random_point(rng, tree, 8)
    comp = {root: root}
    used = {root: set()}
    queue, seen = deque([root]), {root}
    while queue:
        p = queue.popleft()
        for e in tree.incident[p]:
            u, v, _ = tree.edges[e]
            c = v if u == p else u
            if c in seen:
                continue
            seen.add(c)
            queue.append(c)
            q = images[p]
            free = [d for d in q.directions() if d not in used[comp[p]]]
            if not free or rng.random() < collapse:
                images[c] = q
                comp[c] = comp[p]
                continue
            d = rng.choice(sorted(free))
            used[comp[p]].add(d)
            w = tree.vertex(rng.choice(_side_vertices(tree, q, d)))
            if rng.random() < 0.5:
                target = w
            else:
                target = point_on_arc(q, w, distance(q, w) * Fraction(rng.randint(1, 7), 8))
            images[c] = target
            comp[c] = c
            used[c] = {direction(target, q)}
    return PLSelfMap(tree, images)


def random_monotone_map(rng: random.Random, tree: MetricTree, collapse: float = 0.3,
                        max_tries: int = 1000) -> PLSelfMap:
    """Rejection-sample candidate maps until the exact monotonicity test accepts one."""
    for _ in range(max_tries):
        f = _candidate_map(rng, tree, collapse)
        if is_monotone(f):
            return f
    raise RuntimeError("no monotone map found")


def corpus(seed: int, n_maps: int = 5, n_vertices: int = 10, path: bool = False) -> list:
    rng = rng_for(seed)
    return [random_monotone_map(rng, random_tree(rng, n_vertices, path)) for _ in range(n_maps)]

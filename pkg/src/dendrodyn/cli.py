"""Command line front end.

Every subcommand writes one JSON document (or a CSV table) to stdout or
``--out``; output depends only on the inputs and ``--seed``. The exit status is
0 when every requested certificate passes, 1 when one fails and 2 for bad
input.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from importlib import resources

import jsonschema

from . import odometer as odo
from .corpus import corpus as make_corpus, random_point, random_subtree, rng_for
from .entropy import entropy_curve
from .hyperspace import (FiniteSet, UnresolvedOrbit, asymptotic_companion, element_to_dict, hyper_omega,
                         hyper_pair_window)
from .maps import PLSelfMap, arc_image_check, is_monotone, monotonicity, periodic_points
from .orbits import check_recurrence_structure, classify_recurrence, omega_limit
from .star import (BudgetExceeded, StarPoint, entropy_certificate, g_apply, omega_chaos_certificate, ray_bound,
                   star_distance)
from .tree import MetricTree, TreeError, arc, as_fraction, convex_hull, distance, format_fraction, point_order


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def threads() -> int:
    raw = os.environ.get("DENDRODYN_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"DENDRODYN_THREADS must be an integer, got {raw!r}")


def pmap(fn, items: list) -> list:
    """Order-preserving map, spread over worker processes when allowed."""
    workers = min(threads(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def fraction_arg(text: str) -> Fraction:
    try:
        value = as_fraction(text)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"expected a rational like 1/10, got {text!r}") from exc
    return value


def positive_fraction(text: str) -> Fraction:
    value = fraction_arg(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}")


def load_tree(path: str) -> MetricTree:
    data = load_json(path)
    try:
        return MetricTree.from_dict(data)
    except (TreeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}")


def load_map(path: str) -> PLSelfMap:
    data = load_json(path)
    try:
        tree = None
        if isinstance(data.get("tree"), str):
            base = os.path.dirname(path)
            tree = load_tree(os.path.join(base, data["tree"]))
        return PLSelfMap.from_dict(data, tree)
    except InputError:
        raise
    except (TreeError, KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"{path}: {exc}")


def parse_point(tree: MetricTree, text: str):
    """``name`` for a vertex or ``edge:offset`` (e.g. ``2:1/3``) for an edge point."""
    try:
        if ":" in text:
            e, off = text.split(":", 1)
            return tree.point(int(e), as_fraction(off))
        return tree.vertex(text)
    except (TreeError, ValueError, IndexError) as exc:
        raise InputError(f"bad point {text!r}: {exc}")


def fmt(v) -> str | None:
    return None if v is None else format_fraction(v)


SCHEMAS = {
    "geom": "geom.json", "map check": "map_check.json", "omega": "omega.json", "hyper": "hyper.json",
    "odometer": "odometer.json", "star chaos": "omega_chaos.json", "star entropy": "entropy_certificate.json",
    "entropy": "entropy_curve.json", "corpus": "corpus.json", "error": "error.json",
}


def load_schema(name: str) -> dict:
    return json.loads(resources.files("dendrodyn").joinpath("schemas", SCHEMAS[name]).read_text())


def emit(args, report: dict, schema: str, csv_text: str | None = None) -> int:
    jsonschema.validate(report, load_schema(schema))
    if getattr(args, "format", "json") == "csv" and csv_text is not None:
        text = csv_text
    else:
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report.get("ok", True) else 1


def csv_rows(header: list, rows: list) -> str:
    def cell(v):
        s = "" if v is None else str(v)
        return f'"{s}"' if any(c in s for c in ',"\n') and not s.startswith('"') else s
    return "\n".join([",".join(header)] + [",".join(cell(v) for v in r) for r in rows]) + "\n"


def sample_points(args, tree: MetricTree) -> list:
    if getattr(args, "point", None):
        return [parse_point(tree, p) for p in args.point]
    rng = rng_for(args.seed)
    return [random_point(rng, tree) for _ in range(args.samples)]


# ---------------------------------------------------------------------------
# subcommands


def cmd_geom(args) -> int:
    tree = load_tree(args.tree)
    pts = [parse_point(tree, p) for p in args.point] if args.point else [tree.vertex(v) for v in range(len(tree.vertices))]
    hull = convex_hull(pts)
    report = {
        "command": "geom",
        "points": [p.to_dict() for p in pts],
        "distances": [[fmt(distance(p, q)) for q in pts] for p in pts],
        "arcs": [[fmt(arc(p, q).length) for q in pts] for p in pts],
        "hull": hull.to_list(),
        "hull_length": fmt(hull.length()),
        "orders": [point_order(tree, p) for p in pts],
        "total_length": fmt(tree.total_length()),
        "leaves": [tree.vertices[v] for v in tree.leaves()],
        "ok": True,
    }
    header = ["point"] + [str(p) for p in pts]
    rows = [[str(p)] + [fmt(distance(p, q)) for q in pts] for p in pts]
    return emit(args, report, "geom", csv_rows(header, rows))


def cmd_map_check(args) -> int:
    f = load_map(args.map)
    verdict = monotonicity(f)
    report = {
        "command": "map check",
        "monotone": verdict.monotone,
        "witness": verdict.witness.to_dict() if verdict.witness is not None else None,
        "preimage": [{"edge": iv.edge, "lo": fmt(iv.lo), "hi": fmt(iv.hi)} for iv in verdict.preimage],
        "ok": verdict.monotone or not args.require_monotone,
    }
    if args.max_period:
        report["periodic_points"] = [
            {"point": pp.point.to_dict(), "period": pp.period,
             "cell": None if pp.cell is None else {"edge": pp.cell.edge, "lo": fmt(pp.cell.lo), "hi": fmt(pp.cell.hi)}}
            for pp in periodic_points(f, args.max_period)]
    text = "monotone" if verdict.monotone else f"non-monotone, witness y={verdict.witness}"
    csv_text = csv_rows(["monotone", "witness", "summary"],
                        [[verdict.monotone, "" if verdict.witness is None else str(verdict.witness), text]])
    return emit(args, report, "map check", csv_text)


def _omega_sample(job):
    f, x, eps, horizon = job
    om = omega_limit(f, x, eps, horizon)
    rec = classify_recurrence(f, x, eps, horizon)
    return {
        "point": x.to_dict(), "kind": om.kind, "omega": [p.to_dict() for p in om.points], "period": om.period,
        "recurrence": {"kind": rec.kind, "period": rec.period, "exact": rec.exact, "method": rec.method},
    }


def cmd_omega(args) -> int:
    f = load_map(args.map)
    pts = sample_points(args, f.tree)
    samples = pmap(_omega_sample, [(f, x, args.eps, args.horizon) for x in pts])
    ok = all(s["kind"] != "unresolved" for s in samples)
    report = {"command": "omega", "eps": fmt(args.eps), "horizon": args.horizon, "samples": samples, "ok": ok}
    rows = [[json.dumps(s["point"], sort_keys=True), s["kind"], s["period"],
             json.dumps(s["omega"], sort_keys=True), s["recurrence"]["kind"]] for s in samples]
    return emit(args, report, "omega", csv_rows(["point", "kind", "period", "omega", "recurrence"], rows))


def _random_element(rng, tree, kind: str, n: int):
    if kind == "finite":
        return FiniteSet.of(random_point(rng, tree) for _ in range(rng.randint(1, n)))
    return random_subtree(rng, tree, n)


def _hyper_job(job):
    mode, f, A, B, eps, horizon = job
    try:
        if mode == "companion":
            cert = asymptotic_companion(f, A, eps, horizon)
            return {"element": element_to_dict(A), "companion": element_to_dict(cert.companion),
                    "tail_bound": fmt(cert.tail_bound), "period": cert.period, "ok": cert.ok}
        if mode == "orbit":
            om = hyper_omega(f, A, eps, horizon)
            return {"element": element_to_dict(A), "period": om.period,
                    "cycle": [element_to_dict(E) for E in om.elements], "verdict": om.kind, "ok": om.minimal}
        stats = hyper_pair_window(f, A, B, horizon)
        verdict = stats.verdict(eps)
        # a proximal pair that is not asymptotic would be a Li-Yorke pair
        ok = not (stats.inf_upper < eps and stats.sup_upper >= eps)
        return {"element": element_to_dict(A), "other": element_to_dict(B), "verdict": verdict,
                "stats": stats.to_dict(), "ok": ok}
    except UnresolvedOrbit as exc:
        return {"element": element_to_dict(A), "verdict": "unresolved", "detail": str(exc), "ok": False}


def cmd_hyper(args) -> int:
    f = load_map(args.map)
    if not is_monotone(f):
        raise InputError(f"{args.map}: the induced-map checks need a monotone map")
    rng = rng_for(args.seed)
    jobs = []
    for _ in range(args.samples):
        A = _random_element(rng, f.tree, args.kind, args.n)
        B = _random_element(rng, f.tree, args.kind, args.n) if args.mode == "pairs" else None
        jobs.append((args.mode, f, A, B, args.eps, args.horizon))
    results = pmap(_hyper_job, jobs)
    report = {"command": "hyper", "mode": args.mode, "kind": args.kind, "eps": fmt(args.eps),
              "horizon": args.horizon, "results": results, "ok": all(r["ok"] for r in results)}
    rows = [[i, r.get("verdict", ""), r.get("period", ""), r["ok"]] for i, r in enumerate(results)]
    return emit(args, report, "hyper", csv_rows(["index", "verdict", "period", "ok"], rows))


def cmd_odometer(args) -> int:
    if args.input:
        b, x = odo.from_dict(load_json(args.input))
        points = [x]
    else:
        try:
            b = odo.Base(tuple(int(j) for j in args.base.split(",")))
        except ValueError as exc:
            raise InputError(f"--base: {exc}")
        if args.point:
            points = [b.check(tuple(int(v) for v in args.point.split(",")))]
        else:
            rng = random.Random(args.seed)
            points = [tuple(rng.randrange(j) for j in b.digits) for _ in range(args.samples)]
    depth = b.depth if args.depth is None else args.depth
    if not 0 <= depth <= b.depth:
        raise InputError(f"--depth must be between 0 and {b.depth}")
    certs = [odo.rr_certificate(b, x, M).to_dict() for x in points for M in range(depth + 1)]
    length, _ = odo.cycle_structure(b)
    report = {"command": "odometer", "base": list(b.digits), "cycle_length": length,
              "single_cycle": odo.is_single_cycle(b), "prime_base": b.prime, "certificates": certs,
              "ok": all(c["ok"] for c in certs)}
    rows = [["".join(map(str, c["point"])), c["depth"], c["period"], c["bound"], c["max_distance"], c["ok"]]
            for c in certs]
    return emit(args, report, "odometer",
                csv_rows(["point", "depth", "period", "bound", "max_distance", "ok"], rows))


def cmd_star_chaos(args) -> int:
    if args.alpha:
        alphas = args.alpha
    else:
        lo, hi = args.lam, args.lam_prime
        alphas = [lo + (hi - lo) * i / args.samples for i in range(1, args.samples + 1)]
    cert = omega_chaos_certificate(args.lam, args.lam_prime, alphas, args.tol, args.depth, args.horizon)
    report = cert.to_dict()
    rows = [[a["alpha"], a["band"], len(a["witnesses"]), a["separation_lower_bound"], a["ok"]]
            for a in report["witnesses"]]
    return emit(args, report, "star chaos", csv_rows(["alpha", "band", "witnesses", "separation", "ok"], rows))


def cmd_star_entropy(args) -> int:
    try:
        cert = entropy_certificate(args.k, args.n, args.budget)
    except BudgetExceeded as exc:
        return emit(args, {"kind": "entropy", "k": args.k, "n": args.n, "count": 0, "pairs_checked": 0,
                           "min_separation": None, "ok": False, "detail": str(exc)}, "star entropy")
    report = cert.to_dict()
    csv_text = csv_rows(["k", "n", "count", "pairs_checked", "min_separation"],
                        [[cert.k, cert.n, cert.count, cert.pairs_checked, report["min_separation"]]])
    return emit(args, report, "star entropy", csv_text)


def star_pool(seed: int, size: int, span: int) -> list:
    """Seeded points on rays -span..span with normalized radius in (0, 1]."""
    rng = random.Random(seed)
    pool = set()
    while len(pool) < size:
        r = rng.randint(-span, span)
        pool.add(StarPoint(r, Fraction(rng.randint(1, 1000), 1000) * ray_bound(r)))
    return sorted(pool, key=StarPoint.sort_key)


def cmd_entropy(args) -> int:
    eps_list = [as_fraction(e) for e in args.eps_list.split(",")]
    if args.map:
        f = load_map(args.map)
        rng = rng_for(args.seed)
        pool = [random_point(rng, f.tree) for _ in range(args.pool)]
        step, metric, key, system = f, distance, lambda p: p.sort_key(), "map"
    else:
        pool = star_pool(args.seed, args.pool, args.span)
        step, metric, key, system = g_apply, star_distance, StarPoint.sort_key, "star"
    rows = entropy_curve(step, metric, pool, args.n_max, eps_list, key=key)
    antitone = all(a.count >= b.count for a in rows for b in rows if a.n == b.n and a.eps < b.eps)
    report = {"command": "entropy", "system": system, "pool_size": len(set(pool)),
              "rows": [{"n": r.n, "eps": fmt(r.eps), "count": r.count, "rate": r.rate} for r in rows],
              "antitone_in_eps": antitone, "ok": antitone}
    csv_text = csv_rows(["n", "eps", "count", "rate"], [[r.n, fmt(r.eps), r.count, f"{r.rate:.12g}"] for r in rows])
    return emit(args, report, "entropy", csv_text)


def _corpus_job(job):
    index, f, seed, samples, eps, horizon = job
    rng = rng_for(seed * 100_003 + index)
    pts = [random_point(rng, f.tree) for _ in range(samples)]
    structure = check_recurrence_structure(f, pts, eps, horizon)
    violations = [f"{p}: {v}" for p, v in structure.violations]
    square = bool(monotonicity(f, 2))
    if not square:
        violations.append("f o f is not monotone")
    arcs_ok = all(arc_image_check(f, random_point(rng, f.tree), random_point(rng, f.tree)) for _ in range(samples))
    if not arcs_ok:
        violations.append("arc image escapes the arc between the endpoint images")
    ends_ok = True
    for _ in range(samples):
        T = random_subtree(rng, f.tree, 3)
        image = convex_hull(f(p) for p in T.endpoints)
        ends_ok &= set(image.endpoints) <= {f(p) for p in T.endpoints}
    if not ends_ok:
        violations.append("image endpoint not hit by an endpoint")
    checks = {"samples": samples, "resolved": sum(s.omega.resolved for s in structure.samples),
              "square_monotone": square, "arc_images": arcs_ok, "endpoint_images": ends_ok}
    return {"map": f.to_dict(), "checks": checks, "violations": violations}


def cmd_corpus(args) -> int:
    maps = make_corpus(args.seed, args.maps, args.vertices, args.path)
    results = pmap(_corpus_job, [(i, f, args.seed, args.samples, args.eps, args.horizon) for i, f in enumerate(maps)])
    count = sum(len(r["violations"]) for r in results)
    report = {"command": "corpus", "seed": args.seed, "maps": results, "violations": count, "ok": count == 0}
    rows = [[i, r["checks"]["resolved"], len(r["violations"])] for i, r in enumerate(results)]
    return emit(args, report, "corpus", csv_rows(["map", "resolved", "violations"], rows))


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0)

    dyn = argparse.ArgumentParser(add_help=False)
    dyn.add_argument("--eps", type=positive_fraction, default=Fraction(1, 10 ** 6))
    dyn.add_argument("--horizon", type=positive_int, default=10_000)

    p = argparse.ArgumentParser(prog="dendrodyn", description="Exact dynamics on finite metric trees.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("geom", parents=[common], help="distances, arcs and hulls on a tree")
    g.add_argument("--tree", required=True)
    g.add_argument("--point", action="append", help="vertex name or edge:offset (repeatable)")
    g.set_defaults(func=cmd_geom)

    m = sub.add_parser("map", help="map utilities")
    msub = m.add_subparsers(dest="map_command", required=True)
    mc = msub.add_parser("check", parents=[common], help="decide monotonicity")
    mc.add_argument("--map", required=True)
    mc.add_argument("--max-period", type=int, default=0, help="also list periodic points up to this period")
    mc.add_argument("--require-monotone", action="store_true", help="exit 1 if the map is not monotone")
    mc.set_defaults(func=cmd_map_check)

    o = sub.add_parser("omega", parents=[common, dyn], help="omega-limit sets and recurrence")
    o.add_argument("--map", required=True)
    o.add_argument("--point", action="append")
    o.add_argument("--samples", type=positive_int, default=20)
    o.set_defaults(func=cmd_omega)

    h = sub.add_parser("hyper", parents=[common, dyn], help="induced maps on finite sets and subtrees")
    h.add_argument("--map", required=True)
    h.add_argument("--mode", choices=("orbit", "companion", "pairs"), default="companion")
    h.add_argument("--kind", choices=("finite", "subtree"), default="finite")
    h.add_argument("--n", type=positive_int, default=3)
    h.add_argument("--samples", type=positive_int, default=20)
    h.set_defaults(func=cmd_hyper)

    d = sub.add_parser("odometer", parents=[common], help="regular recurrence of adding machines")
    d.add_argument("--base", default="2,2,2,2", help="comma-separated digit bounds")
    d.add_argument("--point", help="comma-separated digits (default: random samples)")
    d.add_argument("--input", help="JSON file with base and point")
    d.add_argument("--depth", type=int)
    d.add_argument("--samples", type=positive_int, default=1)
    d.set_defaults(func=cmd_odometer)

    s = sub.add_parser("star", help="certificates on the star dendrite")
    ssub = s.add_subparsers(dest="star_command", required=True)
    sc = ssub.add_parser("chaos", parents=[common], help="omega-chaos witnesses")
    sc.add_argument("--lambda", dest="lam", type=positive_fraction, default=Fraction(1, 2))
    sc.add_argument("--lambda-prime", dest="lam_prime", type=positive_fraction, default=Fraction(1))
    sc.add_argument("--alpha", type=positive_fraction, action="append")
    sc.add_argument("--samples", type=positive_int, default=10)
    sc.add_argument("--tol", type=positive_fraction, default=Fraction(1, 16))
    sc.add_argument("--depth", type=positive_int, default=20)
    sc.add_argument("--horizon", type=positive_int, default=2 ** 12)
    sc.set_defaults(func=cmd_star_chaos)
    se = ssub.add_parser("entropy", parents=[common], help="separated subtree families")
    se.add_argument("--k", type=positive_int, required=True)
    se.add_argument("--n", type=positive_int, required=True)
    se.add_argument("--budget", type=positive_int, default=10 ** 5)
    se.set_defaults(func=cmd_star_entropy)

    e = sub.add_parser("entropy", parents=[common], help="greedy separated-set growth tables")
    e.add_argument("--map", help="map file; without it the star homeomorphism is used")
    e.add_argument("--pool", type=positive_int, default=200)
    e.add_argument("--span", type=positive_int, default=50, help="ray range of the star pool")
    e.add_argument("--n-max", type=positive_int, default=10)
    e.add_argument("--eps-list", default="1/10")
    e.set_defaults(func=cmd_entropy)

    c = sub.add_parser("corpus", parents=[common, dyn], help="random monotone maps and the invariant suite")
    c.add_argument("--maps", type=positive_int, default=5)
    c.add_argument("--vertices", type=positive_int, default=10)
    c.add_argument("--samples", type=positive_int, default=20)
    c.add_argument("--path", action="store_true", help="use path graphs")
    c.set_defaults(func=cmd_corpus)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(json.dumps({"error": "input", "detail": str(exc)}, sort_keys=True), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

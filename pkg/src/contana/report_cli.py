"""Command-line front door: analysis reports, curves and the demo suite.

Reports are deterministic given the seed: every number they contain can be
recomputed from the embedded settings, floats are serialized with full
round-trip precision, and files are written atomically.

Exit codes: 0 success, 1 property violated, 2 parse error, 3 unachievable
certificate, 4 internal error, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import traceback
from dataclasses import dataclass

from . import catalog, suite_checks
from .convexity import (
    NotPiecewiseConvex,
    PiecewiseConvexPartition,
    check_gsigma_monotone,
    detect_partition,
    g_sigma,
    refine_to_monotone,
)
from .continuity import (
    IntervalCollection,
    ac_certificate,
    gluing_bound_check,
    modulus_on_grid,
    verify_certificate,
    worst_ac_sum_oracle,
)
from .errors import (
    BudgetError,
    ContanaError,
    DomainError,
    GeometryError,
    KindError,
    ParseError,
    Unachievable,
)
from .function_model import (
    CANTOR_DEPTH,
    IntervalSpec,
    clip_window,
    parse_function,
    parse_interval,
    sample,
)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_PARSE = 2
EXIT_UNACHIEVABLE = 3
EXIT_INTERNAL = 4
EXIT_IO = 5

SCHEMA_VERSION = 1

#: fraction of the sampled value range below which the finest tabulated
#: increment counts as "uniformly continuous at this resolution"
UC_THRESHOLD = 0.05


@dataclass(frozen=True)
class AnalysisSettings:
    epsilon: float = 0.1
    grid_m: int = 4001
    eta: float | None = None
    seed: int = 0
    max_pieces: int = 64
    trials: int = 2000
    gsigma_samples: int = 257
    modulus_points: int = 33


# ---------------------------------------------------------------------------
# Analysis pipeline
# ---------------------------------------------------------------------------

def analyze(fn_text: str, interval_text: str,
            settings: AnalysisSettings = AnalysisSettings()) -> dict:
    """Full pipeline: clip, detect, refine, certify, verify; returns a report."""
    window = parse_interval(interval_text)
    f = parse_function(fn_text, window)
    effective = window.intersect(f.domain)
    if effective is None:
        raise ParseError(f"window {window} is disjoint from domain {f.domain}")
    clipped = clip_window(effective)

    m = settings.grid_m
    resolutions = [m, 2 * (m - 1) + 1, 4 * (m - 1) + 1]
    detections = []
    for r in resolutions:
        grid = sample(f, clipped, r)
        detections.append(detect_partition(grid, eta=settings.eta,
                                           max_pieces=settings.max_pieces))
    counts = [d.sign_change_count for d in detections]
    all_partitioned = all(isinstance(d, PiecewiseConvexPartition)
                          for d in detections)
    stable = all_partitioned and all(b <= a + 2 for a, b in
                                     zip(counts, counts[1:]))

    report = {
        "schema": SCHEMA_VERSION,
        "tool": "contana",
        "function": fn_text.strip(),
        "window": str(clipped),
        "settings": {
            "epsilon": settings.epsilon,
            "grid": settings.grid_m,
            "eta": settings.eta,
            "seed": settings.seed,
            "max_pieces": settings.max_pieces,
            "trials": settings.trials,
            "cantor_depth": CANTOR_DEPTH,
            "detection_resolutions": resolutions,
            "gsigma_samples": settings.gsigma_samples,
            "modulus_points": settings.modulus_points,
            "uc_threshold": UC_THRESHOLD,
        },
        "detection": {
            "resolutions": resolutions,
            "sign_change_counts": counts,
            "stable": stable,
        },
        "partition": None,
        "pieces": [],
        "gsigma": [],
        "modulus": [],
        "certificate": None,
        "certificate_error": None,
        "worst_sums": [],
        "verification": None,
    }

    base_grid = sample(f, clipped, m)
    values = [float(v) for v in base_grid.values]
    value_range = max(values) - min(values)
    span = float(base_grid.span)
    h = span / (m - 1)
    ladder = _geom_ladder(2.0 * h, span, settings.modulus_points)
    curve = modulus_on_grid(base_grid, ladder)
    report["modulus"] = [[d, w] for d, w in curve.samples]
    # uniformly continuous at this resolution: the finest tabulated
    # increment is either small outright or still clearly decaying
    omega_min = curve.omegas[0]
    omega_mid = curve.omegas[len(curve.omegas) // 2]
    uc_at_resolution = (omega_min <= UC_THRESHOLD * max(value_range, 1e-300)
                        or omega_min <= 0.35 * omega_mid)

    pieces = []
    certificate = None
    verification = None
    if stable:
        result = detections[-1]
        report["partition"] = list(result.partition.points)
        for shape in result.shapes:
            pieces.extend(refine_to_monotone(f, shape))
        report["pieces"] = [
            {"interval": [p.interval.lo, p.interval.hi],
             "shape": p.shape.value,
             "monotonicity": p.monotonicity.value,
             "tolerance": p.tolerance}
            for p in pieces
        ]
        for i, piece in enumerate(pieces):
            plen = piece.interval.hi - piece.interval.lo
            sigma = plen / 4.0
            rep = check_gsigma_monotone(f, piece, sigma,
                                        m=settings.gsigma_samples)
            scale = max(1.0, max(rep.curve.values, default=1.0))
            report["gsigma"].append({
                "piece": i,
                "sigma": sigma,
                "direction": rep.direction.value,
                "max_violation": rep.max_violation,
                "ok": rep.max_violation <= 1e-9 * scale,
            })
        try:
            certificate = ac_certificate(f, result.partition, pieces,
                                         settings.epsilon)
            report["certificate"] = {
                "epsilon": certificate.epsilon,
                "delta1": certificate.delta1,
                "per_piece_budget": certificate.per_piece_budget,
                "partition": list(certificate.partition.points),
            }
        except Unachievable as exc:
            report["certificate_error"] = str(exc)
    if certificate is not None:
        verification = verify_certificate(f, certificate,
                                          trials=settings.trials,
                                          seed=settings.seed)
        report["verification"] = {
            "passed": verification.passed,
            "worst_sum": verification.worst_sum,
            "trials": settings.trials,
            "worst_collection": [[float(x), float(y)] for x, y in
                                 verification.worst_collection.pairs],
        }
        budgets = [certificate.delta1]
    else:
        budgets = [span / 20.0]
    oracle_grid = sample(f, clipped, 2001)
    for budget in budgets:
        if budget > oracle_grid.spacing:
            rep = worst_ac_sum_oracle(f, oracle_grid, budget)
            report["worst_sums"].append({
                "delta": float(rep.delta),
                "best_sum": rep.best_sum,
                "method": rep.method,
                "grid_spacing": rep.grid_spacing,
                "witness_intervals": len(rep.witness),
                "witness_total_length": float(rep.witness.total_length),
            })

    report["verdicts"] = {
        "piecewise_convex": stable,
        "uniformly_continuous_at_resolution": uc_at_resolution,
        "certificate_verified": (verification.passed
                                 if verification is not None else "n/a"),
    }
    return report


def _geom_ladder(lo: float, hi: float, n: int) -> list:
    if not lo < hi:
        return [hi]
    ratio = (hi / lo) ** (1.0 / (n - 1))
    out = [lo * ratio ** i for i in range(n - 1)]
    out.append(hi)
    dedup = []
    for d in out:
        if not dedup or d > dedup[-1]:
            dedup.append(d)
    return dedup


def _gsigma_table(f, lo: float, hi: float, sigma: float, m: int = 201):
    top = hi - sigma
    while top + sigma > hi:
        top = math.nextafter(top, -math.inf)
    step = (top - lo) / (m - 1)
    xs = [lo + i * step for i in range(m - 1)]
    xs.append(top)
    return [(x, g_sigma(f, x, sigma)) for x in xs]


# ---------------------------------------------------------------------------
# Serialization helpers
# ---------------------------------------------------------------------------

def _dump_json(payload: dict) -> bytes:
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode()


def _dump_csv(header: str, rows) -> bytes:
    lines = [header]
    for row in rows:
        lines.append(",".join(repr(float(cell)) for cell in row))
    return ("\n".join(lines) + "\n").encode()


def _atomic_write(path: str, data: bytes) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".contana-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    settings = AnalysisSettings(epsilon=args.epsilon, grid_m=args.grid,
                                eta=args.eta, seed=args.seed)
    code = EXIT_OK
    try:
        report = analyze(args.fn, args.interval, settings)
    except Unachievable as exc:
        report = {"schema": SCHEMA_VERSION, "function": args.fn,
                  "certificate": None, "certificate_error": str(exc)}
        code = EXIT_UNACHIEVABLE
    if report.get("certificate_error") and code == EXIT_OK:
        code = EXIT_UNACHIEVABLE
    payload = _dump_json(report)
    if args.json:
        _atomic_write(args.json, payload)
    else:
        sys.stdout.write(payload.decode())
    return code


def cmd_modulus(args) -> int:
    window = parse_interval(args.interval)
    f = parse_function(args.fn, window)
    deltas = _parse_floats(args.deltas)
    grid = sample(f, clip_window(_effective(f, window)), args.grid)
    curve = modulus_on_grid(grid, deltas)
    sys.stdout.write("delta,omega\n")
    for d, w in curve.samples:
        sys.stdout.write(f"{float(d)!r},{w!r}\n")
    return EXIT_OK


def cmd_worst_sum(args) -> int:
    window = parse_interval(args.interval)
    f = parse_function(args.fn, window)
    grid = sample(f, clip_window(_effective(f, window)), args.grid)
    rep = worst_ac_sum_oracle(f, grid, args.delta, args.max_intervals)
    payload = {
        "delta": float(rep.delta),
        "best_sum": rep.best_sum,
        "method": rep.method,
        "grid_spacing": rep.grid_spacing,
        "witness": [[float(x), float(y)] for x, y in rep.witness.pairs],
        "witness_total_length": float(rep.witness.total_length),
    }
    sys.stdout.write(_dump_json(payload).decode())
    return EXIT_OK


def cmd_check_lemma1(args) -> int:
    window = parse_interval(args.interval)
    f = parse_function(args.fn, window)
    pieces = _pipeline_pieces(f, window, args.grid)
    violated = False
    for piece in pieces:
        plen = piece.interval.hi - piece.interval.lo
        if plen <= args.sigma:
            sys.stdout.write(
                f"piece {piece.interval}: skipped (length <= sigma)\n")
            continue
        rep = check_gsigma_monotone(f, piece, args.sigma)
        scale = max(1.0, max(rep.curve.values, default=1.0))
        ok = rep.max_violation <= 1e-9 * scale
        violated = violated or not ok
        sys.stdout.write(
            f"piece {piece.interval} [{piece.monotonicity.value} "
            f"{piece.shape.value}]: direction={rep.direction.value} "
            f"max_violation={rep.max_violation!r} "
            f"{'OK' if ok else 'VIOLATED'}\n")
    return EXIT_VIOLATED if violated else EXIT_OK


def cmd_check_glue(args) -> int:
    window = parse_interval(args.interval)
    f = parse_function(args.fn, window)
    pairs = _parse_pairs_arg(args.pairs)
    try:
        c = IntervalCollection(tuple(pairs))
    except GeometryError as exc:
        raise ParseError(str(exc)) from exc
    if not (window.closure_contains(c.pairs[0][0])
            and window.closure_contains(c.pairs[-1][1])):
        raise ParseError(f"pairs must lie inside the window {window}")
    pieces = _pipeline_pieces(f, window, args.grid)
    lo_needed = c.pairs[0][0]
    hi_needed = c.pairs[-1][1]
    enclosing = None
    for piece in pieces:
        if piece.interval.lo <= lo_needed and hi_needed <= piece.interval.hi:
            enclosing = piece
            break
    if enclosing is None:
        raise ParseError("the pairs do not fit inside a single monotone piece")
    chk = gluing_bound_check(f, enclosing, c)
    sys.stdout.write(
        f"piece {enclosing.interval}: lhs={chk.lhs!r} rhs={chk.rhs!r} "
        f"direction={chk.direction_used.value} "
        f"{'HOLDS' if chk.holds else 'VIOLATED'}\n")
    return EXIT_OK if chk.holds else EXIT_VIOLATED


def cmd_certify(args) -> int:
    window = parse_interval(args.interval)
    f = parse_function(args.fn, window)
    clipped = clip_window(_effective(f, window))
    grid = sample(f, clipped, args.grid)
    result = detect_partition(grid)
    if isinstance(result, NotPiecewiseConvex):
        sys.stdout.write(_dump_json({
            "certificate": None,
            "reason": "not piecewise convex at this resolution",
            "sign_change_count": result.sign_change_count,
        }).decode())
        return EXIT_VIOLATED
    pieces = []
    for shape in result.shapes:
        pieces.extend(refine_to_monotone(f, shape))
    cert = ac_certificate(f, result.partition, pieces, args.epsilon)
    sys.stdout.write(_dump_json({
        "epsilon": cert.epsilon,
        "delta1": cert.delta1,
        "per_piece_budget": cert.per_piece_budget,
        "partition": list(cert.partition.points),
        "pieces": [{"interval": [p.interval.lo, p.interval.hi],
                    "shape": p.shape.value,
                    "monotonicity": p.monotonicity.value}
                   for p in cert.monotone_pieces],
    }).decode())
    return EXIT_OK


_SUITE_ENTRIES = (
    ("sqrt", "sqrt", "[0,1]", 0.1),
    ("affine", "affine:3,1", "[0,5]", 0.1),
    ("xsquared", "poly:0,0,1", "[0,10]", 0.4),
    ("xcubed", "poly:0,0,0,1", "[-1,1]", 0.1),
    ("zigzag", "pwl:0:0,0.3:0.6,0.7:0.2,1:0.5", "[0,1]", 0.1),
    ("x2sininv", "x2sininv", "[0,1]", 0.1),
    ("cantor", "cantor", "[0,1]", 0.5),
)


def cmd_suite(args) -> int:
    out_dir = args.out
    outputs = []  # (filename, bytes)

    for name, fn_text, interval_text, epsilon in _SUITE_ENTRIES:
        settings = AnalysisSettings(epsilon=epsilon, seed=args.seed)
        report = analyze(fn_text, interval_text, settings)
        outputs.append((f"{name}.json", _dump_json(report)))
        outputs.append((f"modulus_{name}.csv",
                        _dump_csv("delta,omega", report["modulus"])))
        window = parse_interval(report["window"])
        f = parse_function(fn_text, window)
        sigma = (window.hi - window.lo) / 2.0
        outputs.append((f"gsigma_{name}.csv",
                        _dump_csv("x,g_sigma",
                                  _gsigma_table(f, window.lo, window.hi,
                                                sigma))))
        rows = [(w["delta"], w["best_sum"], w["witness_intervals"],
                 w["witness_total_length"]) for w in report["worst_sums"]]
        outputs.append((f"worstsum_{name}.csv",
                        _dump_csv("delta,best_sum,intervals,total_length",
                                  rows)))

    sine = catalog.sine_table()
    sine_window = IntervalSpec(0.0, 2.0 * math.pi)
    sine_grid = sample(sine, sine_window, 4001)
    sine_curve = modulus_on_grid(
        sine_grid, _geom_ladder(2.0 * float(sine_grid.spacing),
                                float(sine_grid.span), 33))
    outputs.append(("modulus_sine.csv",
                    _dump_csv("delta,omega", sine_curve.samples)))
    outputs.append(("gsigma_sine.csv",
                    _dump_csv("x,g_sigma",
                              _gsigma_table(sine, 0.0, 2.0 * math.pi,
                                            math.pi))))

    results, all_passed = suite_checks.run_all(trials=args.trials)
    criteria_payload = {
        "schema": SCHEMA_VERSION,
        "seed": args.seed,
        "trials": args.trials,
        "all_passed": all_passed,
        "criteria": [{"id": r.ident, "name": r.name, "passed": r.passed,
                      "details": r.details} for r in results],
    }
    outputs.append(("criteria.json", _dump_json(criteria_payload)))

    written = []
    try:
        os.makedirs(out_dir, exist_ok=True)
        for filename, data in outputs:
            path = os.path.join(out_dir, filename)
            _atomic_write(path, data)
            written.append(path)
    except OSError as exc:
        for path in written:
            try:
                os.unlink(path)
            except OSError:
                pass
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_IO

    for r in results:
        sys.stdout.write(
            f"criterion {r.ident} ({r.name}): "
            f"{'PASS' if r.passed else 'FAIL'}\n")
    sys.stdout.write(f"suite: {'PASS' if all_passed else 'FAIL'} "
                     f"({len(outputs)} files in {out_dir})\n")
    return EXIT_OK if all_passed else EXIT_VIOLATED


# ---------------------------------------------------------------------------
# Plumbing
# ---------------------------------------------------------------------------

def _effective(f, window: IntervalSpec) -> IntervalSpec:
    eff = window.intersect(f.domain)
    if eff is None:
        raise ParseError(f"window {window} is disjoint from domain {f.domain}")
    return eff


def _pipeline_pieces(f, window: IntervalSpec, m: int):
    clipped = clip_window(_effective(f, window))
    result = detect_partition(sample(f, clipped, m))
    if isinstance(result, NotPiecewiseConvex):
        raise ParseError(
            f"function is not piecewise convex at resolution {m} "
            f"({result.sign_change_count} sign changes)")
    pieces = []
    for shape in result.shapes:
        pieces.extend(refine_to_monotone(f, shape))
    return pieces


def _parse_floats(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip() != ""]
    except ValueError as exc:
        raise ParseError(f"bad number list {text!r}") from exc


def _parse_pairs_arg(text: str) -> list:
    pairs = []
    for item in text.split(","):
        bits = item.split(":")
        if len(bits) != 2:
            raise ParseError(f"bad pair {item!r}, expected x:y")
        try:
            pairs.append((float(bits[0]), float(bits[1])))
        except ValueError as exc:
            raise ParseError(f"bad pair {item!r}") from exc
    return pairs


def build_parser(default_seed: int) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contana",
        description="Continuity analysis: convexity partitions, modulus "
                    "curves, worst-sum search and certificates.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--fn", required=True, help="function spec string")
        p.add_argument("--interval", required=True, help="interval, e.g. [0,1]")

    p = sub.add_parser("analyze", help="full pipeline with JSON report")
    add_common(p)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--grid", type=int, default=4001)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--json", default=None, help="write the report here")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("modulus", help="tabulate the modulus of continuity")
    add_common(p)
    p.add_argument("--deltas", required=True)
    p.add_argument("--grid", type=int, default=4001)
    p.set_defaults(func=cmd_modulus)

    p = sub.add_parser("worst-sum", help="search the worst increment sum")
    add_common(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--grid", type=int, default=2001)
    p.add_argument("--max-intervals", type=int, default=32)
    p.set_defaults(func=cmd_worst_sum)

    p = sub.add_parser("check-lemma1",
                       help="certify increment-curve directions per piece")
    add_common(p)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--grid", type=int, default=4001)
    p.set_defaults(func=cmd_check_lemma1)

    p = sub.add_parser("check-glue", help="check the gluing bound on pairs")
    add_common(p)
    p.add_argument("--pairs", required=True, help="x1:y1,x2:y2,...")
    p.add_argument("--grid", type=int, default=4001)
    p.set_defaults(func=cmd_check_glue)

    p = sub.add_parser("certify", help="synthesize a certificate")
    add_common(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--grid", type=int, default=4001)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("suite", help="run the demonstration suite")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--trials", type=int, default=10000)
    p.set_defaults(func=cmd_suite)

    return parser


def main(argv=None) -> int:
    try:
        default_seed = int(os.environ.get("CONTANA_SEED", "0"))
    except ValueError:
        default_seed = 0
    parser = build_parser(default_seed)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, KindError, DomainError, BudgetError) as exc:
        # bad function/interval/delta arguments, not an internal failure
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except Unachievable as exc:
        sys.stderr.write(f"unachievable: {exc}\n")
        return EXIT_UNACHIEVABLE
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_IO
    except ContanaError as exc:
        sys.stderr.write(f"internal error: {exc}\n")
        return EXIT_INTERNAL
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

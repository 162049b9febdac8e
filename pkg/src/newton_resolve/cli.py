"""Command-line entry point: analyze, charts, resolve, verify, report."""

import argparse
import csv
import json
import math
import os
import re
import sys

from .fan import chart_atlas, check_atlas_distance, check_factorization, unit_certificate
from .geometry import central_face, face_polynomial, newton_distance, newton_polyhedron, predict_growth
from .harness import (
    CapExceeded,
    HenselBlowup,
    count_series,
    cross_check_identity,
    exp_sum_series,
    fit_growth,
    monomial_count_oracle,
    oscillatory_integral,
    sublevel_sweep,
    thread_count,
)
from .poly import PolynomialSyntaxError, format_polynomial, parse_polynomial
from .resolution import ResolutionConfig, ResolutionError, resolve, sibling_disjointness

BATTERY = [
    ("x1^2+x2^3", 2),
    ("x1*x2", 2),
    ("x1^2*x2^2", 2),
    ("x1^2*x2+x1*x2^3", 2),
    ("x1^2-2*x1*x2+x2^2", 2),
    ("x1^3", 2),
    ("x2^2-x1^3", 2),
    ("x1*x2*(x1+x2)", 2),
    ("x1^2+x2^2+x3^3", 3),
    ("x1*x2*x3", 3),
]

REAL_SWEEP = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
COMPLEX_SWEEP = [1e-2, 3e-3, 1e-3, 3e-4]


class UsageError(Exception):
    pass


def _nvars(text, n):
    if n is not None:
        return n
    idx = [int(m) for m in re.findall(r"x(\d+)", text)]
    if not idx:
        raise UsageError("cannot infer the number of variables; pass -n")
    return max(idx)


def _poly(args):
    return parse_polynomial(args.polynomial, _nvars(args.polynomial, args.nvars))


def _levels(text):
    if text is None:
        return None
    m = re.fullmatch(r"\s*(\d+)\s*(?:(?::|\.\.)\s*(\d+))?\s*", text)
    if not m:
        raise UsageError(f"bad --levels {text!r}; use L or a:b")
    if m.group(2) is None:
        return list(range(1, int(m.group(1)) + 1))
    a, b = int(m.group(1)), int(m.group(2))
    if a < 1 or b < a:
        raise UsageError(f"bad --levels {text!r}")
    return list(range(a, b + 1))


def _floats(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad number list {text!r}")
    if not vals:
        raise UsageError("empty number list")
    return vals


# commands


def analyze_report(f, field="real", p=None):
    N = newton_polyhedron(f)
    d = newton_distance(N)
    central, k = central_face(N)
    pred = predict_growth(f, field, p)
    faces = []
    for F, info in zip(N.compact_faces, pred.face_orders):
        faces.append({
            "vertices": [list(v) for v in F.vertex_set],
            "dim": F.dim,
            "face_polynomial": format_polynomial(face_polynomial(f, F, N)),
            "o": info["o"],
            "certainty": info["certainty"],
            "in_central_face": info["in_central_face"],
        })
    return {
        "polynomial": format_polynomial(f),
        "nvars": f.nvars,
        "polyhedron": N.to_json(),
        "d": str(d),
        "k": k,
        "central_face": {"vertices": [list(v) for v in central.vertex_set], "dim": central.dim, "compact": central.compact},
        "faces": faces,
        "case": pred.case,
        "s": None if pred.s is None else str(pred.s),
        "prediction": pred.to_json(),
    }


def cmd_analyze(args):
    f = _poly(args)
    return analyze_report(f, args.field, args.prime), 0


def charts_report(f, samples=1000, radius=0.05, seed=0):
    N = newton_polyhedron(f)
    d = newton_distance(N)
    atlas = chart_atlas(f, N)
    dist = check_atlas_distance(f, atlas, N)
    charts = []
    ok = dist["ok"]
    for i, chart in enumerate(atlas):
        entry = chart.to_json()
        entry["distance"] = dist["charts"][i]
        entry["factorization"] = check_factorization(f, chart)
        entry["unit_certificate"] = unit_certificate(chart, samples, radius, seed=seed + i)
        ok = ok and entry["factorization"]["ok"] and entry["unit_certificate"]["ok"]
        charts.append(entry)
    return {
        "polynomial": format_polynomial(f),
        "nvars": f.nvars,
        "d": str(d),
        "k": dist["k"],
        "chart_count": len(atlas),
        "charts": charts,
        "max_equality_attained": dist["max_equality_attained"],
        "equality_outside_central_face": dist["equality_outside_central_face"],
        "ok": ok,
    }


def cmd_charts(args):
    rep = charts_report(_poly(args), seed=args.seed)
    return rep, 0 if rep["ok"] else 1


def cmd_resolve(args):
    f = _poly(args)
    cfg = ResolutionConfig(truncation=args.truncation, max_depth=args.depth, seed=args.seed, samples=args.samples)
    res = resolve(f, cfg)
    leaves = res.leaves()
    passed = sum(1 for leaf in leaves if leaf.certificate["ok"])
    disjoint = sibling_disjointness(res, seed=args.seed)
    rep = res.to_json()
    rep["summary"] = {
        "leaves": len(leaves),
        "certified": passed,
        "partial_nodes": len(res.partial_nodes()),
        "implicit_checks_ok": all(c["vanishes_to_order"] for c in res.implicit_checks),
        "sibling_disjointness": disjoint,
    }
    ok = rep["complete"] and passed == len(leaves) and rep["order_decreases"] and rep["summary"]["implicit_checks_ok"]
    rep["summary"]["ok"] = ok and disjoint["ok"]
    return rep, 0 if rep["summary"]["ok"] else 1


def _targets(pred):
    """Slope/log-power targets and whether only the upper envelope is checked."""
    if pred.case == "c":
        return float(pred.upper_decay), pred.log_power_upper, True
    log = pred.log_power if pred.case == "a" else None
    return float(pred.decay), log, False


def padic_report(f, p, levels, strategy="hensel", cap=10**6, l_min=2, tol_slope=0.05, pin_log=False, sums=False, span=10.0):
    pred = predict_growth(f, "padic", p)
    series = count_series(f, p, levels, strategy, cap)
    decay, log_power, upper = _targets(pred)
    pinned = log_power if (pin_log or log_power == 0) and log_power is not None else None
    fit = fit_growth(series, -decay, log_power, pinned_log=pinned, l_min=l_min, tol_slope=tol_slope, span=span, upper_only=upper)
    rep = {
        "polynomial": format_polynomial(f),
        "prime": p,
        "prediction": pred.to_json(),
        "counts": series.to_json(),
        "fit": fit.to_json(),
    }
    ok = fit.verdict != "FAIL"
    if f.is_monomial() and f.items()[0][1] == 1:
        gamma = f.items()[0][0]
        exact = all(v == monomial_count_oracle(gamma, p, l) for l, v in zip(series.levels, series.values))
        rep["monomial_oracle_match"] = exact
        ok = ok and exact
    if sums:
        lv = [l for l in series.levels if p ** (l * f.nvars) <= cap]
        if lv:
            es = exp_sum_series(f, p, lv, "brute", cap)
            consts = [abs(v) * p ** (decay * l) for l, v in zip(es.levels, es.values)]
            rep["exp_sums"] = es.to_json()
            rep["exp_sum_envelope"] = {"C_min": float(f"{max(consts):.12g}"), "bound": span, "ok": max(consts) <= span}
            ok = ok and max(consts) <= span
            checks = [cross_check_identity(f, p, l, cap=cap) for l in lv if l <= 3]
            rep["cross_checks"] = checks
            ok = ok and all(c["ok"] for c in checks)
    rep["verdict"] = "PASS" if ok else "FAIL"
    return rep, ok


def cmd_verify_padic(args):
    f = _poly(args)
    levels = _levels(args.levels) or list(range(1, 8))
    rep, ok = padic_report(f, args.prime, levels, args.strategy, args.cap, args.l_min, args.tol_slope, args.pin_log, args.sums, args.span)
    return rep, 0 if ok else 1


def volume_report(f, field, eps_list, samples, seed, radius=0.5, threads=None, tol_slope=0.05, span=10.0):
    pred = predict_growth(f, field)
    table = sublevel_sweep(f, field, eps_list, samples, seed, radius, threads)
    decay, log_power, upper = _targets(pred)
    rep = {"polynomial": format_polynomial(f), "field": field, "prediction": pred.to_json(), "volumes": table.to_json()}
    if len(eps_list) >= 4:
        fit = fit_growth(table, decay, log_power, pinned_log=log_power, tol_slope=tol_slope, span=span, upper_only=upper)
        free = fit_growth(table, None, model="exponent-with-log")
        rep["fit"] = fit.to_json()
        rep["free_fit"] = {"slope": free.to_json()["slope"], "log_power": free.to_json()["log_power"]}
        ok = fit.verdict != "FAIL"
        rep["verdict"] = fit.verdict
    else:
        rep["verdict"] = "N/A"
        ok = True
    return rep, ok


def cmd_verify_volume(args, field):
    f = _poly(args)
    if args.eps is not None:
        eps = _floats(args.eps)
    else:
        eps = REAL_SWEEP if field == "real" else COMPLEX_SWEEP
    rep, ok = volume_report(f, field, eps, args.samples, args.seed, args.radius, args.threads, args.tol_slope, args.span)
    return rep, 0 if ok else 1


def cmd_verify_osc(args):
    f = _poly(args)
    lams = _floats(args.lambdas)
    rows = oscillatory_integral(f, lams, args.res_factor)
    pred = predict_growth(f, "real")
    rep = {"polynomial": format_polynomial(f), "prediction": pred.to_json(), "integrals": rows, "heuristic": True}
    usable = [r for r in rows if r["abs"] > 0 and "note" not in r]
    if len(usable) >= 4 and pred.case == "a":
        xs = [math.log(r["lambda"]) for r in usable]
        ys = [math.log(r["abs"]) for r in usable]
        n = len(xs)
        mx, my = sum(xs) / n, sum(ys) / n
        slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)
        rep["fit"] = {"slope": float(f"{slope:.12g}"), "target_slope": -float(pred.decay), "note": "heuristic decay fit, log factor ignored"}
        ok = abs(slope + float(pred.decay)) <= args.tol_slope
        rep["verdict"] = "PASS" if ok else "FAIL"
    else:
        rep["verdict"] = "N/A"
        ok = True
    return rep, 0 if ok else 1


def _write_csv(path, rows):
    if not rows:
        return
    keys = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)


def cmd_report(args):
    """Battery (or single polynomial) tables as JSON and CSV."""
    out = args.out or "report"
    os.makedirs(out, exist_ok=True)
    if args.polynomial:
        items = [(args.polynomial, _nvars(args.polynomial, args.nvars))]
    else:
        items = BATTERY
    geometry_rows = []
    chart_rows = []
    count_rows = []
    full = []
    ok = True
    for text, n in items:
        f = parse_polynomial(text, n)
        an = analyze_report(f, "real")
        ch = charts_report(f, seed=args.seed)
        ok = ok and ch["ok"]
        geometry_rows.append({"polynomial": text, "nvars": n, "d": an["d"], "k": an["k"], "case": an["case"], "s": an["s"] or "", "charts": ch["chart_count"], "charts_ok": ch["ok"]})
        for i, c in enumerate(ch["charts"]):
            chart_rows.append({
                "polynomial": text, "chart": i, "face_dim": c["face_dim"], "M": json.dumps(c["M"]),
                "a": json.dumps(c["a"]), "e": json.dumps(c["e"]), "ratios": " ".join(c["ratios"]),
                "equalities": c["distance"]["equality_count"], "unit_ok": c["unit_certificate"]["ok"],
            })
        entry = {"analysis": an, "charts": ch}
        levels = _levels(args.levels) or list(range(1, 7))
        try:
            series = count_series(f, args.prime, levels)
            for r in series.rows():
                count_rows.append(dict(polynomial=text, **r))
            entry["counts"] = series.to_json()
        except (HenselBlowup, CapExceeded, ValueError) as exc:
            entry["counts"] = {"error": str(exc)}
        full.append(entry)
    with open(os.path.join(out, "report.json"), "w") as fh:
        json.dump({"items": full, "ok": ok}, fh, indent=2)
        fh.write("\n")
    _write_csv(os.path.join(out, "geometry.csv"), geometry_rows)
    _write_csv(os.path.join(out, "charts.csv"), chart_rows)
    _write_csv(os.path.join(out, "counts.csv"), count_rows)
    summary = {"out": out, "files": ["report.json", "geometry.csv", "charts.csv", "counts.csv"], "geometry": geometry_rows, "ok": ok}
    return summary, 0 if ok else 1


# parser


def build_parser():
    parser = argparse.ArgumentParser(prog="newton-resolve", description="Newton polyhedra, toric charts, resolution trees and growth checks for polynomials.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, poly_required=True):
        if poly_required:
            p.add_argument("polynomial", help='polynomial such as "x1^2+x2^3"')
        else:
            p.add_argument("polynomial", nargs="?", help="polynomial (default: the built-in battery)")
        p.add_argument("-n", "--nvars", type=int, help="number of variables (default: largest index used)")
        p.add_argument("--seed", type=int, default=0, help="seed for sampling (default 0)")
        p.add_argument("--out", help="write the JSON report to this path (report: output directory)")
        p.add_argument("--threads", type=int, help="worker cap (default: NEWTON_RESOLVE_THREADS or 1)")

    p = sub.add_parser("analyze", help="Newton polyhedron, d, k, face orders and growth prediction")
    common(p)
    p.add_argument("--field", choices=["real", "complex", "padic"], default="real")
    p.add_argument("--prime", type=int, help="prime for --field padic")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("charts", help="toric chart atlas with exponent and factorization checks")
    common(p)
    p.set_defaults(func=cmd_charts)

    p = sub.add_parser("resolve", help="chart tree with leaf certificates")
    common(p)
    p.add_argument("--truncation", type=int, help="series truncation order (default max(2 deg, 12))")
    p.add_argument("--depth", type=int, default=8, help="maximum tree depth (default 8)")
    p.add_argument("--samples", type=int, default=1000, help="certificate samples per leaf (default 1000)")
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("verify", help="numerical experiments against the predicted exponents")
    vsub = p.add_subparsers(dest="experiment", required=True)

    def tol(q, default=0.05):
        q.add_argument("--tol-slope", type=float, default=default, help=f"slope tolerance (default {default})")
        q.add_argument("--span", type=float, default=10.0, help="allowed envelope spread (default 10)")

    q = vsub.add_parser("padic", help="counts mod p^l (and optional exponential sums)")
    common(q)
    q.add_argument("--prime", type=int, default=3)
    q.add_argument("--levels", help="L for 1..L, or a:b (default 7)")
    q.add_argument("--cap", type=int, default=10**6, help="brute-force size cap p^(l n) (default 10^6)")
    q.add_argument("--strategy", choices=["hensel", "brute"], default="hensel")
    q.add_argument("--l-min", type=int, default=2, help="smallest level used in the fit (default 2)")
    q.add_argument("--pin-log", action="store_true", help="pin the log power to its predicted value")
    q.add_argument("--sums", action="store_true", help="also compute exponential sums and the orthogonality cross-check")
    tol(q)
    q.set_defaults(func=cmd_verify_padic)

    for name in ("real", "complex"):
        q = vsub.add_parser(name, help=f"{name} sublevel-set volumes by Monte Carlo")
        common(q)
        q.add_argument("--eps", help="comma-separated eps values (default: a sweep)")
        q.add_argument("--eps-sweep", action="store_true", help="use the default eps sweep")
        q.add_argument("--samples", type=int, default=10**6)
        q.add_argument("--radius", type=float, default=0.5)
        tol(q, 0.05 if name == "real" else 0.1)
        q.set_defaults(func=(lambda a, fld=name: cmd_verify_volume(a, fld)))

    q = vsub.add_parser("osc", help="real oscillatory integrals with a cosine bump (heuristic fit)")
    common(q)
    q.add_argument("--lambdas", default="10,20,50,100,200,500")
    q.add_argument("--res-factor", type=float, default=8.0)
    tol(q, 0.1)
    q.set_defaults(func=cmd_verify_osc)

    p = sub.add_parser("report", help="JSON and CSV tables for the battery or one polynomial")
    common(p, poly_required=False)
    p.add_argument("--prime", type=int, default=3)
    p.add_argument("--levels", help="count levels (default 6)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "threads", None) is not None:
            thread_count(args.threads)
        if getattr(args, "prime", None) is not None and args.command == "analyze" and args.field != "padic":
            args.prime = None
        rep, code = args.func(args)
    except (ResolutionError, HenselBlowup, CapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (UsageError, PolynomialSyntaxError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(rep, indent=2) + "\n"
    if args.out and args.command != "report":
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

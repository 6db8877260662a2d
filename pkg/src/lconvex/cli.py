"""Command-line front end: coefficients, simulation, cross-checks, hulls, floating bodies."""

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import expansions, floating, lhull, montecarlo
from .body import SmoothBody
from .caps import expectation_integral
from .errors import LConvexError

EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_MODULE = 3


class InputError(Exception):
    pass


def _load_body(path, label):
    if path is None:
        return None
    try:
        if path.startswith("disc:"):
            return SmoothBody.disc(float(path[5:]))
        spec = json.loads(Path(path).read_text())
        if not isinstance(spec, dict) or "a0" not in spec:
            raise InputError(f"{label}: body JSON needs an object with key 'a0'")
        return SmoothBody.from_dict(spec)
    except (OSError, ValueError, TypeError, KeyError, LConvexError) as exc:
        raise InputError(f"{label}: {exc}") from None


def _floats(text):
    if text is None:
        return None
    try:
        return [float(eval_fraction(x)) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(str(exc)) from None


def eval_fraction(x):
    x = x.strip()
    if "/" in x:
        a, b = x.split("/")
        return float(a) / float(b)
    return float(x)


def _ints(text):
    return [int(round(v)) for v in _floats(text)]


def _bodies(args):
    L = _load_body(args.L, "--L")
    K = _load_body(args.K, "--K")
    if L is None:
        raise InputError("--L is required")
    regime = args.regime or ("KL" if K is not None else "LL")
    if regime == "LL":
        K = L
    elif K is None:
        raise InputError("--K is required in the KL regime")
    return K, L, regime


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------- commands

def cmd_coeffs(args):
    K, L, regime = _bodies(args)
    report = expansions.coefficients(K, L, regime)
    _emit(report.to_json(indent=2, sort_keys=True) + "\n", args.out)
    return 0


def cmd_simulate(args):
    K, L, _ = _bodies(args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(montecarlo.CSV_FIELDS)
    for n in _ints(args.n):
        f0, missed = montecarlo.simulate(K, L, n, args.trials, args.seed)
        w.writerow([n, args.trials, repr(f0.mean), repr(f0.stderr), repr(missed.mean),
                    repr(missed.stderr), args.seed])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_verify(args):
    K, L, regime = _bodies(args)
    report = expansions.coefficients(K, L, regime)
    rows, ok = [], True
    for n in _ints(args.n):
        mc = montecarlo.simulate_f0(K, L, n, args.trials, args.seed)
        series = expansions.series_eval(report, n)
        row = {"n": n, "mc_mean": mc.mean, "mc_stderr": mc.stderr, "series": series, "checks": {}}
        if not args.skip_integral:
            ei = expectation_integral(K, L, n, regime=regime, epsrel=args.tol_quad)
            row["integral"] = ei.value
            row["integral_error"] = ei.total_error
            row["checks"]["mc_vs_integral"] = abs(mc.mean - ei.value) <= args.tol_sigma * mc.stderr
        row["checks"]["mc_vs_series"] = abs(mc.mean - series) <= args.tol_sigma * mc.stderr
        row["pass"] = all(row["checks"].values())
        ok &= row["pass"]
        rows.append(row)
    out = {"regime": regime, "coefficients": report.coefficients, "sigmas": args.tol_sigma,
           "trials": args.trials, "seed": args.seed, "rows": rows, "pass": ok}
    _emit(_dumps(out), args.out)
    return 0 if ok else EXIT_FAIL


def _points(args, K):
    if args.points:
        text = Path(args.points).read_text()
        try:
            pts = np.asarray(json.loads(text), dtype=float)
        except ValueError:
            pts = np.loadtxt(io.StringIO(text), delimiter=",", ndmin=2)
        return pts.reshape(-1, 2)
    n = _ints(args.n)[0]
    return montecarlo.sample_uniform(K, n, rng=montecarlo.trial_rng(args.seed, 0))


def cmd_hull(args):
    L = _load_body(args.L, "--L")
    if L is None:
        raise InputError("--L is required")
    K = _load_body(args.K, "--K") or L
    pts = _points(args, K)
    P = lhull.lhull(pts, L)
    _emit(_dumps(P.to_dict()), args.out)
    if args.svg:
        Path(args.svg).write_text(lhull.to_svg(P, pts))
    return 0


def cmd_floating(args):
    K, L, _ = _bodies(args)
    grid = _floats(args.delta_grid) or list(np.geomspace(1e-6, 1e-4, 6) * K.area)
    results = [floating.floating_body(K, L, d, args.u_nodes) for d in grid]
    if args.out:
        floating.write_csv(args.out, results)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["delta", "wet_area", "error_est"])
        for r in results:
            w.writerow([repr(r.delta), repr(r.wet_area), repr(r.error_est)])
        sys.stdout.write(buf.getvalue())
    if len(grid) >= 2:
        fit = floating.fit_exponent([r.delta for r in results], [r.wet_area for r in results],
                                    floating.reference_wet_constant(K, L))
        sys.stderr.write(_dumps({"exponent_fit": fit.as_dict(), "exploratory": True}))
    if args.svg:
        Path(args.svg).write_text(floating.to_svg(K, results[-1]))
    return 0


def cmd_lemma3(args):
    betas = _floats(args.beta)
    ns = _ints(args.n) if args.n else [100, 1000, 10000, 100000]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["beta", "n", "moment", "gamma1", "gamma2_displayed", "gamma2_corrected",
                "residual_displayed", "residual_corrected"])
    for b in betas:
        g1, g2 = expansions.displayed_gammas(b)
        g2c = expansions.gamma2_exact(b)
        for n in ns:
            m = float(expansions.beta_moment(b, n))
            w.writerow([repr(b), n, repr(m), repr(g1), repr(g2), repr(g2c),
                        repr(expansions.moment_residual(b, n, "displayed")),
                        repr(expansions.moment_residual(b, n, "exact"))])
    _emit(buf.getvalue(), args.out)
    return 0


# ---------------------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(
        prog="lconvex",
        description="Random L-convex polygons: series coefficients, simulation and cross-checks.",
        epilog=f"Set {montecarlo.THREADS_ENV}=k to run Monte Carlo trials in k worker processes; "
               "results do not depend on k.  Bodies are JSON files {a0, cos, sin, name} "
               "or 'disc:R'.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n_default=None):
        sp.add_argument("--K", help="body K (JSON path or disc:R)")
        sp.add_argument("--L", help="body L (JSON path or disc:R)")
        sp.add_argument("--regime", choices=["KL", "LL"], help="default: KL if --K is given, else LL")
        sp.add_argument("--n", default=n_default, help="sample size(s), comma separated")
        sp.add_argument("--trials", type=int, default=2000)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--tol-sigma", type=float, default=3.0, help="Monte Carlo agreement in stderr units")
        sp.add_argument("--tol-quad", type=float, default=1e-10, help="relative quadrature tolerance")

    sp = sub.add_parser("coeffs", help="series coefficients as JSON")
    common(sp)
    sp.set_defaults(func=cmd_coeffs)

    sp = sub.add_parser("simulate", help="Monte Carlo estimates as CSV")
    common(sp, "100")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="Monte Carlo vs expectation integral vs series")
    common(sp, "1000")
    sp.add_argument("--skip-integral", action="store_true")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("hull", help="L-convex hull as JSON (+ SVG)")
    common(sp, "50")
    sp.add_argument("--points", help="points file (JSON list of pairs or CSV); default: sample n from K")
    sp.add_argument("--svg", help="SVG output path")
    sp.set_defaults(func=cmd_hull)

    sp = sub.add_parser("floating", help="wet-part areas as CSV, exponent fit on stderr")
    common(sp)
    sp.add_argument("--delta-grid", help="comma separated areas (default: 6 points in [1e-6, 1e-4]*A(K))")
    sp.add_argument("--u-nodes", type=int, default=128)
    sp.add_argument("--svg", help="SVG output path")
    sp.set_defaults(func=cmd_floating)

    sp = sub.add_parser("lemma3", help="beta-moment expansion table as CSV")
    sp.add_argument("--beta", default="2/3,4/3,2")
    sp.add_argument("--n", default=None)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_lemma3)
    return p


def _error(kind, exc, code):
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        return _error("input", exc, EXIT_INPUT)
    except LConvexError as exc:
        return _error("module", exc, EXIT_MODULE)


if __name__ == "__main__":
    sys.exit(main())

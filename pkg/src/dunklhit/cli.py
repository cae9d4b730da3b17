"""Command-line entry point: ``survival``, ``check`` and ``brownian``.

Output goes to ``--out`` (or stdout) as CSV or JSON; wall time is written to
stderr only, so identical argument vectors give byte-identical output.
Exit codes: 0 success, 1 failed check, 2 invalid input, 3 numerical failure.
"""

import argparse
from dataclasses import asdict
import io
import json
import math
import sys
import time

from . import __version__, brownian, checks, hitting, simulate
from .errors import ConvergenceError, OddRank, ValidationError
from .rootsys import build_root_system

EXIT_OK, EXIT_CHECK, EXIT_VALIDATION, EXIT_CONVERGENCE = 0, 1, 2, 3


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _fmt(v):
    if v is None:
        return "nan"
    return "%.17g" % v


def _sigma(closed, mc, se):
    if closed is None or mc is None:
        return None
    diff = abs(closed - mc)
    if se == 0:
        return 0.0 if diff == 0 else math.inf
    return diff / se


def _json_value(v):
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return None if v is None or math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


def _write(args, columns, rows, report):
    fmt = args.format or ("json" if args.out and args.out.endswith(".json") else "csv")
    if fmt == "csv":
        buf = io.StringIO(newline="")
        buf.write(",".join(columns) + "\n")
        for row in rows:
            buf.write(",".join(_fmt(row.get(c)) for c in columns) + "\n")
        text = buf.getvalue()
    else:
        report = dict(report, results=[{c: _json_value(r.get(c)) for c in columns} for r in rows])
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _sim_config(args):
    return simulate.SimConfig(paths=args.paths, seed=args.seed)


def _check_t(ts):
    if not ts or any(not t > 0 for t in ts):
        raise ValidationError("every t must be > 0", where="cli")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValidationError("t values must be strictly increasing", where="cli")


# ---------------------------------------------------------------- survival

def cmd_survival(args):
    x, ts = args.x, args.t
    if len(x) != args.m:
        raise ValidationError(f"--x must have m = {args.m} coordinates, got {len(x)}", where="cli")
    _check_t(ts)
    queries = [hitting.make_query(args.family, args.m, x, t, k0=args.k0, k1=args.k1) for t in ts]
    rs = queries[0].rs
    closed = [None] * len(ts)
    if args.method in ("closed", "both"):
        closed = [hitting.survival(q, method=args.route) for q in queries]
    mc = se = [None] * len(ts)
    cfg = _sim_config(args)
    if args.method in ("mc", "both"):
        est = simulate.simulate_survival(rs, queries[0].k.dual(), x, ts, cfg)
        mc = [float(v) for v in est.probabilities]
        se = [float(v) for v in est.std_errors]
    rows = [dict(t=t, p_closed=c, p_mc=p, stderr=s, sigma=_sigma(c, p, s))
            for t, c, p, s in zip(ts, closed, mc, se)]
    config = {
        "family": args.family, "m": args.m, "k0": args.k0, "k1": args.k1, "x": x,
        "method": args.method, "route": args.route,
        "max_weight": hitting._max_weight(rs, None), "series_tolerance": 1e-15,
        "series_cap": hitting.SERIES_CAP, "simulation": asdict(cfg),
    }
    if args.family == "A" and args.route == "hypergeometric":
        config["b_schedule"] = list(hitting.DEFAULT_B_SCHEDULE)
    report = {"command": "survival", "version": __version__, "config": config, "seed": args.seed}
    _write(args, ["t", "p_closed", "p_mc", "stderr", "sigma"], rows, report)
    return EXIT_OK


# ---------------------------------------------------------------- brownian

def cmd_brownian(args):
    x, ts = args.x, args.t
    if len(x) != args.m:
        raise ValidationError(f"--x must have m = {args.m} coordinates, got {len(x)}", where="cli")
    _check_t(ts)
    rs = build_root_system(args.family, args.m)
    odd = args.m % 2 == 1
    if odd and (args.compare or args.family == "D"):
        raise OddRank(f"Pfaffian formulas need even m (got m = {args.m})",
                      where="brownian.survival_bm_pf")
    pf = [brownian.survival_bm_pf(args.family, x, t, args.convention) if not odd
          else brownian.survival_bm_exact_B(x, t) for t in ts]
    rows = [dict(t=t, p_pf=p) for t, p in zip(ts, pf)]
    columns = ["t", "p_pf"]
    cfg = _sim_config(args)
    config = {"family": args.family, "m": args.m, "x": x, "convention": args.convention}
    if args.compare:
        cal = brownian.calibrate(args.family, args.m, convention=args.convention)
        est = simulate.simulate_survival(rs, 0.0, x, ts, cfg)
        for i, row in enumerate(rows):
            det = brownian.survival_bm_det(args.family, x, ts[i], cal)
            p, s = float(est.probabilities[i]), float(est.std_errors[i])
            row.update(p_det=det, ratio=det / row["p_pf"] if row["p_pf"] else None,
                       p_mc=p, stderr=s, sigma=_sigma(row["p_pf"], p, s))
        columns += ["p_det", "ratio", "p_mc", "stderr", "sigma"]
        config.update(calibration={"C": cal.C, "x_ref": list(cal.x_ref), "t_ref": cal.t_ref,
                                   "reference": cal.reference},
                      simulation=asdict(cfg))
    report = {"command": "brownian", "version": __version__, "config": config, "seed": args.seed}
    _write(args, columns, rows, report)
    return EXIT_OK


# ---------------------------------------------------------------- check

def cmd_check(args):
    results = checks.run_suite(args.suite, seed=args.seed)
    failed = [r for r in results if not r.passed]
    report = {
        "command": "check", "suite": args.suite, "version": __version__, "seed": args.seed,
        "passed": len(results) - len(failed), "total": len(results),
        "checks": [r.as_dict() for r in results],
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if failed:
        first = failed[0]
        print(f"check failed: {first.name} residual {first.residual:.3e} "
              f"> threshold {first.threshold:.3e}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="dunklhit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def output(sp):
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"),
                        help="default: json for *.json, else csv")

    s = sub.add_parser("survival", help="tail P(T0 > t) from the series and/or the simulator")
    s.add_argument("--family", choices=("A", "B", "D"), required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--k0", type=float)
    s.add_argument("--k1", type=float)
    s.add_argument("--x", type=_floats, required=True)
    s.add_argument("--t", type=_floats, required=True)
    s.add_argument("--method", choices=("closed", "mc", "both"), default="closed")
    s.add_argument("--route", choices=hitting.METHODS, default="moment",
                   help="series route for the closed form")
    s.add_argument("--paths", type=int, default=simulate.SimConfig.paths)
    s.add_argument("--seed", type=int, default=simulate.SimConfig.seed)
    output(s)
    s.set_defaults(func=cmd_survival)

    c = sub.add_parser("check", help="run an identity suite and report residuals as JSON")
    c.add_argument("--suite", choices=checks.SUITES, required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("brownian", help="Brownian motion (k' = 0) chamber exit")
    b.add_argument("--family", choices=("B", "D"), required=True)
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--x", type=_floats, required=True)
    b.add_argument("--t", type=_floats, required=True)
    b.add_argument("--compare", action="store_true",
                   help="add determinant, ratio and Monte-Carlo columns")
    b.add_argument("--convention", choices=brownian.B_CONVENTIONS, default="debruijn",
                   help="B-type Pfaffian entries")
    b.add_argument("--paths", type=int, default=simulate.SimConfig.paths)
    b.add_argument("--seed", type=int, default=simulate.SimConfig.seed)
    output(b)
    b.set_defaults(func=cmd_brownian)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        code = args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_VALIDATION
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_CONVERGENCE
    print(f"wall time {time.perf_counter() - start:.3f} s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())

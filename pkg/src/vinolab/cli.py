"""Command-line front end: ``vinolab <command> [options]``.

Every command writes rows as CSV (default) or JSON.  CSV output starts with
one ``#`` comment line holding the metadata (version, command line, seed,
notes), then a header row.  JSON output is ``{"meta": {...}, "rows": [...]}``.

Exit codes: 0 success, 2 invalid parameters, 3 budget or size limit
exceeded, 4 under-resolved quadrature, 1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import shlex
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from . import counting, decoupling, expsum, waring
from .exceptions import InstanceTooLarge, PreconditionError, ResolutionError, VinolabError

COLUMNS = {
    "count": ["k", "s", "N", "J", "conjectured_exponent", "classical_exponent_bound", "runtime",
              "fitted_slope", "residual"],
    "moment": ["k", "m", "N", "moment", "parseval_mean", "grid", "runtime"],
    "waring": ["n", "s", "k", "R", "Q", "singular_series", "tail_flag", "main_term", "relative_error"],
    "gtilde": ["k", "classical", "log", "improved", "maximizer_j", "maximizer_s", "wooley_reference"],
    "weyl": ["k", "N", "re", "im", "abs", "a", "q", "err", "weyl_envelope", "vinogradov_envelope",
             "weyl_ratio"],
    "arcs": ["x", "N", "k", "label", "a", "q", "p", "grid", "minor_moment", "full_moment",
             "minor_fraction", "exact_full"],
    "decouple": ["k", "p", "delta", "density", "seed", "lhs", "rhs", "ratio", "trivial_cap", "nodes",
                 "radius", "weight", "spacing", "lattice_points", "weight_tail", "slope"],
    "fit": ["points", "fitted_slope", "residual"],
}

NOTES = {
    "count": ["exact integer counts; D(s,k) constant c left symbolic",
              "asymptotic threshold logs are natural"],
    "weyl": ["N^eps factors dropped from envelopes",
             "coordinates rounded to 64-bit fixed point before exact phase reduction"],
    "gtilde": [waring.TYPO_REPAIR_NOTE,
               "wooley_reference: tabulated for k in 5..7, else 1.5407 k^2 (non-rigorous)"],
    "waring": ["singular series summed in increasing q; tail_flag = last tenth of q > 1e-3 relative"],
    "arcs": ["minor-arc moment is a Riemann sum; exact_full reports grid >= 2 N^k p"],
    "decouple": ["midpoint rule in t; lattice spacing min(1/4, R/(200k)) resolves the weight",
                 "lattice truncated where the weight mass < 1e-12",
                 "ratio is a lower estimate of the decoupling constant for the chosen g"],
    "moment": ["exact integer counts via meet-in-the-middle"],
    "fit": ["unweighted least squares on log-log points"],
}


def parse_number(text: str):
    """Parse an integer, a fraction 'a/b' (exactly) or a float."""
    text = text.strip()
    if "/" in text:
        return Fraction(text)
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse_fraction(text: str) -> Fraction:
    value = parse_number(text)
    return Fraction(value)


def parse_sweep(text: str) -> list[int]:
    """'32..256' doubles from 32 up to 256; '3,5,9' is an explicit list."""
    if ".." in text:
        lo, hi = (int(v) for v in text.split("..", 1))
        if lo < 1 or hi < lo:
            raise argparse.ArgumentTypeError(f"bad sweep range {text!r}")
        out = []
        n = lo
        while n <= hi:
            out.append(n)
            n *= 2
        return out
    return [int(v) for v in text.split(",") if v.strip()]


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    if isinstance(value, Fraction):
        return str(value)
    return str(value)


def _json_value(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def render(command: str, rows: list[dict], meta: dict, fmt: str) -> str:
    columns = COLUMNS[command]
    if fmt == "json":
        payload = {
            "meta": {key: _json_value(v) for key, v in meta.items()},
            "rows": [{c: _json_value(r.get(c)) for c in columns} for r in rows],
        }
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    buf.write("# " + json.dumps({key: _json_value(v) for key, v in meta.items()}) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise PreconditionError("missing required option(s): " + ", ".join("--" + m for m in missing))


def cmd_count(args) -> tuple[list[dict], dict]:
    _need(args, "k", "s")
    Ns = args.sweep if args.sweep else ([args.N] if args.N is not None else None)
    if Ns is None:
        raise PreconditionError("give --N or --sweep")
    conj = counting.conjectured_exponent(args.s, args.k)
    classical = counting.classical_exponent_bound(args.s, args.k).value if args.s >= args.k else None
    rows = []
    for N in Ns:
        start = time.perf_counter()
        J = counting.count_vinogradov(args.k, args.s, N, budget=args.budget, workers=args.workers)
        rows.append({"k": args.k, "s": args.s, "N": N, "J": J, "conjectured_exponent": conj,
                     "classical_exponent_bound": classical,
                     "runtime": time.perf_counter() - start})
    meta = {}
    if len(rows) >= 3:
        series = counting.GrowthSeries(tuple((r["N"], r["J"]) for r in rows))
        for r in rows:
            r["fitted_slope"] = series.fitted_slope
            r["residual"] = series.residual
        meta["fitted_slope"] = series.fitted_slope
    return rows, meta


def cmd_moment(args):
    _need(args, "k", "m", "N")
    start = time.perf_counter()
    value = counting.count_hua_moment(args.k, args.m, args.N, budget=args.budget, workers=args.workers)
    row = {"k": args.k, "m": args.m, "N": args.N, "moment": value}
    if args.grid is not None:
        row["grid"] = args.grid
        row["parseval_mean"] = expsum.power_sum_moment(args.N, args.k, 2 * args.m, args.grid)
    row["runtime"] = time.perf_counter() - start
    return [row], {}


def cmd_waring(args):
    _need(args, "n", "s", "k")
    R = counting.count_waring_representations(args.n, args.s, args.k)
    row = {"n": args.n, "s": args.s, "k": args.k, "R": R}
    if args.Q is not None:
        ss = waring.singular_series(args.n, args.s, args.k, args.Q)
        row.update(Q=args.Q, singular_series=ss.value, tail_flag=ss.tail_flag)
        if args.s > args.k:
            main = waring.waring_main_term(args.n, args.s, args.k, args.Q)
            row["main_term"] = main
            row["relative_error"] = abs(R - main) / R if R else None
    return [row], {}


def cmd_gtilde(args):
    ks = list(range(3, 21)) if args.table else ([args.k] if args.k is not None else None)
    if ks is None:
        raise PreconditionError("give --k or --table")
    rows = []
    for k in ks:
        rep = waring.gtilde_report(k)
        rows.append({"k": k, "classical": rep.bound_classical, "log": rep.bound_log,
                     "improved": rep.bound_improved, "maximizer_j": rep.maximizer_classical,
                     "maximizer_s": rep.maximizer_improved,
                     "wooley_reference": waring.wooley_reference_bound(k).value if k >= 5 else None})
    return rows, {}


def _parse_point(text: str) -> list[float]:
    return [float(parse_number(v)) for v in text.split(",") if v.strip()]


def cmd_weyl(args):
    _need(args, "x", "N")
    coords = _parse_point(args.x)
    k = args.k if args.k is not None else len(coords)
    point = expsum.FrequencyPoint(tuple(coords))
    value = expsum.eval_weyl_sum(point, args.N, k)
    approx = expsum.rational_approx(point.coords[-1], args.N)
    q = args.q if args.q is not None else approx.q
    env = expsum.weyl_envelope(q, args.N, k)
    row = {"k": k, "N": args.N, "re": value.real, "im": value.imag, "abs": abs(value),
           "a": approx.a, "q": q, "err": approx.err, "weyl_envelope": env,
           "weyl_ratio": abs(value) / env,
           "vinogradov_envelope": expsum.vinogradov_envelope(q, args.N, k, k) if k >= 3 else None}
    return [row], {}


def cmd_arcs(args):
    _need(args, "N", "k")
    if args.x is not None:
        rows = []
        for text in args.x.split(","):
            x = float(parse_number(text))
            lab = expsum.classify_arc(x, args.N, args.k)
            w = lab.witness
            rows.append({"x": x, "N": args.N, "k": args.k, "label": lab.label,
                         "a": w.a if w else None, "q": w.q if w else None})
        return rows, {}
    _need(args, "p", "grid")
    res = expsum.minor_arc_moment(args.N, args.k, int(args.p), args.grid)
    row = {"N": args.N, "k": args.k, "p": int(args.p), "grid": res.grid,
           "minor_moment": res.value, "full_moment": res.full_moment,
           "minor_fraction": res.minor_fraction, "exact_full": res.exact_full}
    return [row], {"quadrature_notes": list(res.notes)}


def _density(kind: str, M: int, seed: int):
    if kind == "const":
        return decoupling.SampledDensity.constant(M)
    if kind == "gauss":
        return decoupling.SampledDensity.gaussian(M, seed)
    raise PreconditionError(f"unknown density {kind!r} (const or gauss)")


def _report_row(rep, slope=None):
    return {"k": rep.k, "p": rep.p, "delta": Fraction(rep.delta).limit_denominator(10**6),
            "density": rep.density, "seed": rep.seed, "lhs": rep.lhs, "rhs": rep.rhs,
            "ratio": rep.ratio, "trivial_cap": math.sqrt(1 / rep.delta), "nodes": rep.nodes,
            "radius": rep.ball.radius, "weight": rep.weight, "spacing": rep.spacing,
            "lattice_points": rep.lattice_points, "weight_tail": rep.weight_tail, "slope": slope}


def cmd_decouple(args):
    k = args.k if args.k is not None else 2
    p = args.p if args.p is not None else k * (k + 1)
    if args.trend:
        deltas = [Fraction(1, 4), Fraction(1, 8), Fraction(1, 16)]
        M = args.grid or 64 * 16
        densities = [_density(args.g, M, args.seed)] if args.count is None else (
            [decoupling.SampledDensity.constant(M)]
            + [decoupling.SampledDensity.gaussian(M, args.seed + i) for i in range(args.count)])
        slopes, ratios = decoupling.decoupling_trend(densities, deltas, p, k, weight=args.weight)
        rows = []
        for di, d in enumerate(deltas):
            for gi, g in enumerate(densities):
                rows.append({"k": k, "p": p, "delta": d, "density": g.label, "seed": g.seed,
                             "ratio": ratios[di, gi], "trivial_cap": math.sqrt(1 / d), "nodes": M,
                             "radius": float(1 / d) ** k, "weight": args.weight,
                             "slope": slopes[gi]})
        ensemble = float(np.polyfit(np.log([4.0, 8.0, 16.0]), np.log(ratios).mean(axis=1), 1)[0])
        return rows, {"max_slope": float(slopes.max()), "ensemble_slope": ensemble}
    delta = args.delta if args.delta is not None else Fraction(1, 8)
    pieces = Fraction(delta).denominator
    M = args.grid or 64 * pieces
    g = _density(args.g, M, args.seed)
    if args.single_interval:
        J = decoupling.partition(delta)[0]
        g = decoupling.SampledDensity(g.restricted(J).samples, seed=g.seed, label=g.label + "-single")
    rep = decoupling.decoupling_ratio(g, delta, p, k, weight=args.weight)
    return [_report_row(rep)], {}


def cmd_fit(args):
    points = []
    if args.infile:
        with open(args.infile, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(line for line in fh if not line.startswith("#"))
            for rec in reader:
                count = rec.get("count") or rec.get("J") or rec.get("moment")
                points.append((int(rec["N"]), int(count)))
    for text in args.points or []:
        n, c = text.split(":", 1)
        points.append((int(n), int(c)))
    series = counting.GrowthSeries(tuple(points))
    slope = counting.fit_growth_exponent(series)
    label = " ".join(f"{n}:{c}" for n, c in series.points)
    return [{"points": label, "fitted_slope": slope, "residual": series.residual}], {}


COMMANDS = {
    "count": cmd_count,
    "moment": cmd_moment,
    "waring": cmd_waring,
    "gtilde": cmd_gtilde,
    "weyl": cmd_weyl,
    "arcs": cmd_arcs,
    "decouple": cmd_decouple,
    "fit": cmd_fit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vinolab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"vinolab {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", metavar="PATH", help="write to PATH instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=int, help="memory budget in bytes (env VLAB_BUDGET_BYTES)")
    common.add_argument("--workers", type=int, default=1, help="threads for chunked counting")

    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        cols = ",".join(COLUMNS[name])
        return sub.add_parser(name, parents=[common], help=help_text,
                              description=f"{help_text}. CSV columns: {cols}")

    p = add("count", "Vinogradov mean value J_{s,k}(N) by exact counting")
    p.add_argument("--k", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--sweep", type=parse_sweep, help="N1..N2 (doubling) or comma list")

    p = add("moment", "Hua moment: integral of |S|^(2m) by exact counting")
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--grid", type=int, help="also report the grid mean of |S|^(2m)")

    p = add("waring", "Waring representations R_{s,k}(n), singular series and main term")
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--Q", type=int, help="singular series truncation")

    p = add("gtilde", "G~(k) bound calculators")
    p.add_argument("--k", type=int)
    p.add_argument("--table", action="store_true", help="k = 3..20")

    p = add("weyl", "Weyl sum with Weyl and Vinogradov envelopes")
    p.add_argument("--x", help="comma-separated coordinates x_1,...,x_k (fractions allowed)")
    p.add_argument("--N", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--q", type=int, help="override the denominator used in the envelopes")

    p = add("arcs", "major/minor arc classification or minor-arc moment")
    p.add_argument("--x", help="comma-separated points; omit for the minor-arc moment")
    p.add_argument("--N", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--grid", type=int)

    p = add("decouple", "empirical decoupling ratio for the moment curve")
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--delta", type=parse_fraction)
    p.add_argument("--g", choices=("const", "gauss"), default="const")
    p.add_argument("--grid", type=int, help="nodes of the t-grid (default 64/delta)")
    p.add_argument("--single-interval", action="store_true")
    p.add_argument("--trend", action="store_true", help="sweep delta over 1/4, 1/8, 1/16")
    p.add_argument("--count", type=int, help="with --trend: const plus COUNT Gaussian densities")
    p.add_argument("--weight", choices=("omega", "indicator"), default="omega",
                   help="ball weight: (1+|x|/R)^-100k (default) or the indicator of the ball")

    p = add("fit", "least-squares growth exponent of counts")
    p.add_argument("points", nargs="*", help="N:count pairs")
    p.add_argument("--in", dest="infile", metavar="PATH", help="CSV with N and count/J columns")
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rows, extra = COMMANDS[args.command](args)
    except InstanceTooLarge as exc:
        print(f"vinolab: {exc}", file=sys.stderr)
        return 3
    except ResolutionError as exc:
        print(f"vinolab: {exc}", file=sys.stderr)
        return 4
    except (PreconditionError, ValueError) as exc:
        print(f"vinolab: {exc}", file=sys.stderr)
        return 2
    except VinolabError as exc:
        print(f"vinolab: {exc}", file=sys.stderr)
        return 1
    meta = {
        "version": __version__,
        "command": "vinolab " + shlex.join(argv),
        "seed": args.seed,
        "notes": NOTES.get(args.command, []),
    }
    meta.update(extra)
    text = render(args.command, rows, meta, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 1 tolerance failure, 2 usage error, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from contextlib import contextmanager

import numpy as np

from . import table1
from .cf_core import QuadratureError, SpecError, normal, nig, tempered_stable
from .cos_engine import ToleranceConfig, build_cos, cdf_eval, density_eval
from .inversion import BracketError, QuantileResult, RefinementError, quantile_batch
from .reference_oracle import (
    DESK_N,
    HIGH_PRECISION_EPS,
    FULL_N,
    ConvergenceError,
    gil_pelaez_cdf,
)
from .sampling import sample

EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

QUANTILE_FIELDS = ("p", "y", "eps_used", "h_min", "bound", "refinements", "status")
CDF_FIELDS = ("y", "cdf", "density")
VALIDATE_FIELDS = ("y", "cos_cdf", "gil_pelaez_cdf", "abs_diff")


class UsageError(Exception):
    pass


def _add_distribution(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("distribution")
    g.add_argument("--dist", choices=("normal", "ts", "nig"), required=True)
    g.add_argument("--mean", type=float, default=0.0, help="normal mean")
    g.add_argument("--std", type=float, default=1.0, help="normal standard deviation")
    g.add_argument("--c", type=float, default=1.0, help="TS c > 0")
    g.add_argument("--d", type=float, default=1.0, help="TS d >= 0")
    g.add_argument("--kappa", type=float, default=0.75, help="TS kappa in (0, 1)")
    g.add_argument("--gamma", type=float, default=1.0, help="NIG gamma > 0")
    g.add_argument("--theta", type=float, default=0.0, help="NIG theta in (-gamma, gamma)")
    g.add_argument("--nu", type=float, default=1.0, help="NIG nu > 0")


def _add_tolerance(p: argparse.ArgumentParser, delta: bool = True) -> None:
    g = p.add_argument_group("tolerances")
    g.add_argument("--eps", type=float, default=0.005, help="CDF tolerance (default 0.005)")
    if delta:
        g.add_argument("--delta", type=float, default=None, help="quantile tolerance (default 0.01)")
    g.add_argument("--n", type=int, default=8, help="even moment order for the range (default 8)")
    g.add_argument("--s", type=int, default=39, help="odd smoothness order for N (default 39)")
    g.add_argument("--N", type=int, default=None, dest="N_override", help="fix the number of terms")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", default="-", help="output path, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfquantile",
        description="Density, CDF and certified quantiles from a characteristic function (COS method).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("quantile", help="quantiles with a certified error bound")
    _add_distribution(q)
    _add_tolerance(q)
    q.add_argument("--p", type=float, nargs="+", required=True, help="probabilities in (0, 1)")
    q.add_argument("--no-refine", action="store_true", help="keep eps fixed; report the bound as is")
    _add_output(q)

    c = sub.add_parser("cdf", help="COS CDF and density at given points")
    _add_distribution(c)
    _add_tolerance(c, delta=False)
    c.add_argument("--y", type=float, nargs="+", required=True)
    c.add_argument("--timing", action="store_true", help="report mean time per CDF evaluation on stderr")
    _add_output(c)

    t = sub.add_parser("table1", help="regression table for N(0,1), TS and NIG")
    t.add_argument("--ref-N", type=int, default=DESK_N, help=f"terms in the reference build (default {DESK_N})")
    t.add_argument("--full-scale", action="store_true", help=f"use {FULL_N} reference terms (slow)")
    _add_output(t)

    s = sub.add_parser("sample", help="inverse-transform samples")
    _add_distribution(s)
    _add_tolerance(s)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--seed", type=int, default=0, help="64-bit seed (default 0)")
    _add_output(s)

    v = sub.add_parser("validate", help="compare the COS CDF with Gil-Pelaez on a grid")
    _add_distribution(v)
    _add_tolerance(v, delta=False)
    v.add_argument("--points", type=int, default=21)
    v.add_argument("--high-precision", action="store_true", help=f"eps={HIGH_PRECISION_EPS:g}, N={DESK_N}")
    v.add_argument("--full-scale", action="store_true", help=f"with --high-precision use N={FULL_N}")
    _add_output(v)
    return parser


def make_spec(args):
    if args.dist == "normal":
        return normal(args.mean, args.std)
    if args.dist == "ts":
        return tempered_stable(args.c, args.d, args.kappa)
    return nig(args.gamma, args.theta, args.nu)


def make_config(args, **overrides) -> ToleranceConfig:
    fields = {
        "eps": args.eps,
        "n": args.n,
        "s": args.s,
        "N_override": args.N_override,
    }
    if getattr(args, "delta", None) is not None:
        fields["delta"] = args.delta
    fields.update(overrides)
    return ToleranceConfig(**fields)


@contextmanager
def _sink(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit(args, fields, rows, extra: dict | None = None) -> None:
    with _sink(args.output) as out:
        if args.format == "json":
            doc = {"rows": rows}
            if extra:
                doc.update(extra)
            json.dump(doc, out, indent=2, default=_json_default)
            out.write("\n")
        else:
            w = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: _csv_value(r.get(k)) for k in fields})


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(type(obj))


def _csv_value(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _number(x: float):
    # JSON has no inf
    return x if math.isfinite(x) else str(x)


def cmd_quantile(args) -> int:
    bad = [p for p in args.p if not 0.0 < p < 1.0]
    if bad:
        raise UsageError(f"probabilities must lie in (0, 1), got {bad}")
    spec = make_spec(args)
    cfg = make_config(args)
    refine = not args.no_refine
    delta = cfg.delta if refine or args.delta is not None else math.inf
    results = quantile_batch(spec, args.p, delta, cfg, refine=refine)
    rows, status = [], EXIT_OK
    for p, res in zip(args.p, results):
        if isinstance(res, QuantileResult):
            r, tag = res, "ok" if res.certified else "bound>delta"
            if not res.certified:
                status = max(status, EXIT_TOLERANCE)
        else:
            r = res.result
            tag = f"fail: {res}"
            status = max(status, EXIT_NUMERICAL if isinstance(res, BracketError) else EXIT_TOLERANCE)
        rows.append(
            {
                "p": p,
                "y": r.y if r else None,
                "eps_used": r.eps_used if r else None,
                "h_min": r.h_min if r else None,
                "bound": _number(r.bound) if r else None,
                "refinements": r.refinements if r else 0,
                "status": tag,
            }
        )
    _emit(args, QUANTILE_FIELDS, rows, {"delta": _number(delta)})
    return status


def cmd_cdf(args) -> int:
    cos = build_cos(make_spec(args), make_config(args))
    ys = np.asarray(args.y, dtype=float)
    rows = [
        {"y": float(y), "cdf": float(H), "density": float(h)}
        for y, H, h in zip(ys, cdf_eval(cos, ys), density_eval(cos, ys))
    ]
    if args.timing:
        reps = 10_000
        t0 = time.perf_counter()
        for _ in range(reps):
            cdf_eval(cos, float(ys[0]))
        per_call = (time.perf_counter() - t0) / reps
        print(f"N={cos.N} mean cdf_eval time {per_call * 1e6:.2f} us", file=sys.stderr)
    _emit(args, CDF_FIELDS, rows, {"a": cos.a, "b": cos.b, "N": cos.N, "eps": cos.eps})
    return EXIT_OK


def cmd_table1(args) -> int:
    ref_N = FULL_N if args.full_scale else args.ref_N
    rows, status = [], EXIT_OK
    for r in table1.compute(ref_N):
        if isinstance(r, Exception):
            status = EXIT_NUMERICAL
            rows.append({"F": f"fail: {r}"})
        else:
            rows.append(table1.format_row(r) if args.format == "csv" else r)
    with _sink(args.output) as out:
        if args.format == "json":
            json.dump({"rows": rows}, out, indent=2, default=_json_default)
            out.write("\n")
        else:
            w = csv.DictWriter(out, fieldnames=table1.COLUMNS, lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    return status


def cmd_sample(args) -> int:
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    report = sample(make_spec(args), args.count, args.seed, args.delta, make_config(args))
    print(
        f"eps={report.eps_used:g} N={report.cos_build.N} max_bound={report.max_bound:.3g} "
        f"refinements={report.refinements} resampled={report.resampled}",
        file=sys.stderr,
    )
    with _sink(args.output) as out:
        if args.format == "json":
            json.dump(
                {
                    "seed": args.seed,
                    "eps_used": report.eps_used,
                    "max_bound": report.max_bound,
                    "refinements": report.refinements,
                    "resampled": report.resampled,
                    "values": report.values.tolist(),
                },
                out,
            )
            out.write("\n")
        else:
            out.write("x\n")
            out.writelines(f"{v!r}\n" for v in report.values.tolist())
    return EXIT_OK


def cmd_validate(args) -> int:
    spec = make_spec(args)
    if args.high_precision:
        cfg = make_config(args, eps=HIGH_PRECISION_EPS, N_override=FULL_N if args.full_scale else DESK_N)
        tol = HIGH_PRECISION_EPS
    else:
        cfg = make_config(args)
        tol = cfg.eps
    cos = build_cos(spec, cfg)
    sd = math.sqrt(spec.cumulants[1])
    lo = max(cos.a, cos.mu - 5 * sd)
    hi = min(cos.b, cos.mu + 5 * sd)
    rows, worst = [], 0.0
    for y in np.linspace(lo, hi, args.points + 2)[1:-1]:
        ref = gil_pelaez_cdf(spec, float(y)).value
        H = cdf_eval(cos, float(y))
        worst = max(worst, abs(H - ref))
        rows.append({"y": float(y), "cos_cdf": H, "gil_pelaez_cdf": ref, "abs_diff": abs(H - ref)})
    ok = worst <= tol
    print(
        f"{spec.name}: N={cos.N} eps={cos.eps:g} max |H_COS - F_GP| = {worst:.3e} "
        f"({'pass' if ok else 'FAIL'} against {tol:g})",
        file=sys.stderr,
    )
    _emit(args, VALIDATE_FIELDS, rows, {"max_abs_diff": worst, "tolerance": tol, "pass": ok})
    return EXIT_OK if ok else EXIT_TOLERANCE


COMMANDS = {
    "quantile": cmd_quantile,
    "cdf": cmd_cdf,
    "table1": cmd_table1,
    "sample": cmd_sample,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, SpecError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RefinementError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except (ConvergenceError, QuadratureError, BracketError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

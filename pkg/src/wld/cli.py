"""Command-line front end: ``wld <command> [flags]``.

Tables are written as CSV with a header row, single results and the
verification report as JSON.  Floats carry 17 significant digits.
"""
from __future__ import annotations

import argparse
import csv
import json
import io
import math
import os
import sys
from typing import Any, Sequence

import numpy as np

from . import checks, kernels, measures, primesums, residues, rmt
from .kernels import KernelId

DEFAULT_RTOL = 1e-12


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _json_value(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json_value(str(k), indent, 0)}: {_json_value(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _json_value(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, np.floating):
        return _json_value(float(obj), indent, level)
    if isinstance(obj, np.integer):
        return str(int(obj))
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """JSON text with 17-significant-digit floats; non-finite floats become null."""
    return _json_value(obj, 2, 0) + "\n"


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _table(header, rows, fmt_name: str) -> str:
    if fmt_name == "json":
        return dumps([dict(zip(header, row)) for row in rows])
    return _csv_text(header, rows)


def _record(obj: dict, fmt_name: str) -> str:
    if fmt_name == "csv":
        flat = {k: v for k, v in obj.items() if not isinstance(v, (dict, list))}
        return _csv_text(list(flat), [list(flat.values())])
    return dumps(obj)


def _write(text: str, output: str) -> None:
    if output == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("WLD_THREADS")
    return int(env) if env else None


# commands


def cmd_b_table(args) -> int:
    if args.r_max < 1:
        raise SystemExit("r-max must be at least 1")
    if args.r_max > residues.DEFAULT_MAX_R and not args.allow_large:
        raise SystemExit(f"r-max above {residues.DEFAULT_MAX_R} needs --allow-large")
    rows = []
    for r in range(1, args.r_max + 1):
        table = residues.b_table(r, allow_large=args.allow_large)
        rows += [(r, j, v.numerator, v.denominator) for j, v in sorted(table.values.items())]
    _write(_table(["r", "j", "numerator", "denominator"], rows, args.format or "csv"), args.output)
    return 0


def _kernel_columns(family: str | None, r: int) -> list[str]:
    candidates = [family] if family else list(kernels.FAMILIES)
    out = []
    for fam in candidates:
        try:
            KernelId(fam, r)
        except ValueError:
            if family:
                raise
            continue
        if fam == "conjectureD" and r > residues.DEFAULT_MAX_R:
            continue
        out.append(fam)
    return out


def cmd_density_curve(args) -> int:
    if args.npoints < 1:
        raise SystemExit("npoints must be positive")
    try:
        columns = _kernel_columns(args.family, args.r)
    except ValueError as exc:
        raise SystemExit(str(exc))
    x = np.linspace(args.x_min, args.x_max, args.npoints)
    values = [np.atleast_1d(kernels.w_eval(KernelId(fam, args.r), x)) for fam in columns]
    rows = [[xi, *(v[i] for v in values)] for i, xi in enumerate(x)]
    header = ["x"] + [f"W_{fam}" for fam in columns]
    _write(_table(header, rows, args.format or "csv"), args.output)
    return 0


def _spec(args) -> measures.MeasureSpec:
    try:
        return measures.MeasureSpec(args.p, args.r, args.weighting == "harmonic")
    except ValueError as exc:
        raise SystemExit(str(exc))


def cmd_measure_moments(args) -> int:
    spec = _spec(args)
    rows = []
    for ell in range(args.ell_max + 1):
        quad = measures.cheb_moment(spec, ell, args.rtol)
        try:
            closed = measures.closed_moment(spec, ell)
        except ValueError:
            closed = math.nan
        rows.append((spec.p, spec.r, int(spec.harmonic), ell, quad, closed, abs(quad - closed)))
    header = ["p", "r", "harmonic", "ell", "moment_quadrature", "moment_closed", "abs_diff"]
    _write(_table(header, rows, args.format or "csv"), args.output)
    return 0


def cmd_measure_density(args) -> int:
    spec = _spec(args)
    if args.npoints < 1:
        raise SystemExit("npoints must be positive")
    x = np.linspace(-2.0, 2.0, args.npoints)
    density = np.atleast_1d(measures.measure_density(spec, x))
    moments = [measures.cheb_moment(spec, ell, args.rtol) for ell in range(args.L + 1)]
    recon = np.atleast_1d(measures.reconstruct_density(spec, x, args.L, moments))
    rows = list(zip(x, density, recon))
    _write(_table(["x", "density", "reconstructed"], rows, args.format or "csv"), args.output)
    return 0


def cmd_rmt_sim(args) -> int:
    pair = kernels.fejer(args.delta)
    try:
        config = rmt.RMTConfig(args.N, args.samples, args.r, args.seed, pair)
    except ValueError as exc:
        raise SystemExit(str(exc))
    est = rmt.weighted_one_level(config, threads=_threads(args))
    report = {
        "estimate": est.weighted_mean,
        "std_error": est.std_error,
        "reference": est.reference,
        "z_score": est.z_score,
        "config": {
            "N": config.N,
            "samples": config.samples,
            "r": config.r,
            "seed": config.seed,
            "delta": args.delta,
            "test_function": "fejer",
        },
    }
    _write(_record(report, args.format or "json"), args.output)
    return 0


def cmd_lemma41(args) -> int:
    pair = kernels.fejer(args.delta)
    try:
        table = primesums.sieve(args.limit, allow_large=args.allow_large)
        lhs, rhs, rel = primesums.lemma41_partial_sum(args.n, args.R, pair, table)
    except (ValueError, MemoryError) as exc:
        raise SystemExit(str(exc))
    report = {"lhs": lhs, "rhs": rhs, "rel_error": rel}
    _write(_record(report, args.format or "json"), args.output)
    return 0


def cmd_verify(args) -> int:
    results = checks.run(args.level, threads=_threads(args))
    failed = [c.name for c in results if not c.passed]
    entries = []
    for c in results:
        entry = c.to_dict()
        if not args.timings:
            entry.pop("seconds")
        entries.append(entry)
    report = {"level": args.level, "passed": not failed, "failures": failed, "checks": entries}
    _write(dumps(report), args.output)
    for name in failed:
        print(f"FAILED: {name}", file=sys.stderr)
    return 1 if failed else 0


# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", default="-", help="output file, '-' for stdout (default: -)")
    common.add_argument("--format", choices=("csv", "json"), default=None, help="override the command's default format")
    common.add_argument("--rtol", type=float, default=DEFAULT_RTOL, help="quadrature relative tolerance (default: 1e-12)")
    common.add_argument("--threads", type=int, default=None, help="worker cap (default: $WLD_THREADS, else all cores)")

    parser = argparse.ArgumentParser(prog="wld", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("b-table", parents=[common], help="exact residue coefficients b_r(j) as CSV")
    p.add_argument("--r-max", type=int, required=True)
    p.add_argument("--allow-large", action="store_true", help="permit r-max above 8")
    p.set_defaults(func=cmd_b_table)

    p = sub.add_parser("density-curve", parents=[common], help="kernel values on a grid as CSV")
    p.add_argument("--family", choices=kernels.FAMILIES, default=None, help="single family (default: every family defined at r)")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--x-min", type=float, default=-5.0)
    p.add_argument("--x-max", type=float, default=5.0)
    p.add_argument("--npoints", type=int, default=201)
    p.set_defaults(func=cmd_density_curve)

    for name, func, helptext in (
        ("measure-moments", cmd_measure_moments, "Chebyshev moments by quadrature and in closed form"),
        ("measure-density", cmd_measure_density, "measure density and its Chebyshev reconstruction"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--p", type=int, required=True, help="norm of the prime (any prime power >= 2)")
        p.add_argument("--r", type=int, required=True)
        p.add_argument("--weighting", choices=("harmonic", "unweighted"), default="harmonic")
        if name == "measure-moments":
            p.add_argument("--ell-max", type=int, default=10)
        else:
            p.add_argument("--npoints", type=int, default=401)
            p.add_argument("--L", type=int, default=60, help="number of Chebyshev terms in the reconstruction")
        p.set_defaults(func=func)

    p = sub.add_parser("rmt-sim", parents=[common], help="weighted one-level density over SO(2N) as JSON")
    p.add_argument("--N", type=int, default=40)
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_rmt_sim)

    p = sub.add_parser("lemma41", parents=[common], help="prime sum against a Fejer test function as JSON")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--R", type=float, default=1e14)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--limit", type=int, default=10**7)
    p.add_argument("--allow-large", action="store_true", help="permit sieve limits above 1e9")
    p.set_defaults(func=cmd_lemma41)

    p = sub.add_parser("verify", parents=[common], help="run the verification suite; exit 1 on any failure")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument("--timings", action="store_true", help="include wall-clock seconds per check")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

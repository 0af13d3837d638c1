"""Command-line front end.

Subcommands ``spectrum``, ``wavefunction``, ``verify`` and ``degeneracy``
write CSV or JSON to standard output (or ``--output``); diagnostics go to
standard error. Exit codes: 0 success, 1 verification failure, 2 invalid
arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import analytic, harness, pct
from .errors import InvalidInputError
from .model import MassModel, Parity, QuantumNumbers, mass_at

SPECTRUM_FIELDS = ["n_r", "ell", "d", "ell_d", "kappa", "lambda", "delta",
                   "E_analytic", "E_numeric", "rel_err", "nodes", "pass"]
WAVEFUNCTION_FIELDS = ["r", "q", "m", "R", "phi"]
DEGENERACY_FIELDS = ["n_r", "ell", "d", "ell_d", "E_analytic", "E_numeric", "abs_diff"]
VERIFY_FIELDS = ["check", "pass", "value", "tolerance", "elapsed_s", "detail"]
SUITES = ["transform", "spectrum", "residual", "structure", "scaling",
          "degeneracy", "convergence", "determinism"]
BOOL_OPTIONS = {"no_oracle"}


class UsageError(Exception):
    pass


def _num(x):
    """Round to 12 significant digits; the single formatting rule for CSV and JSON."""
    if x is None or isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if not math.isfinite(x):
        return x
    value = float(format(x, ".12g"))
    return int(value) if value.is_integer() and abs(value) < 1e15 else value


def _csv_cell(x):
    x = _num(x)
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def write_table(records, fields, fmt, out, meta=None, key="rows"):
    if fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(fields)
        for rec in records:
            writer.writerow([_csv_cell(rec.get(f)) for f in fields])
    else:
        doc = dict(meta or {})
        doc[key] = [{f: _num(rec.get(f)) for f in fields} for rec in records]
        json.dump(doc, out, indent=2, allow_nan=False)
        out.write("\n")


def _positive_float(text):
    value = float(text)
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be a non-negative integer, got {text}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _d_list(text):
    try:
        values = [int(v) for v in str(text).replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid dimension list {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"dimensions must be integers >= 1, got {text!r}")
    return tuple(values)


def _tol_pair(text):
    key, sep, value = str(text).partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid tolerance value in {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--zeta", type=_positive_float, default=1.0,
                        help="mass-profile parameter (inverse length), default 1")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--output", "-o", default=None, help="output file (default stdout)")
    common.add_argument("--grid", type=int, default=8192, help="oracle grid size, default 8192")
    common.add_argument("--config", default=None,
                        help="key=value file; explicit flags take precedence")
    common.add_argument("--tol", type=_tol_pair, action="append", default=None,
                        metavar="KEY=VALUE",
                        help=f"tolerance override ({', '.join(harness.Tolerances.__dataclass_fields__)})")

    parser = argparse.ArgumentParser(
        prog="pdm-spectra",
        description="Bound states of a quasi-free particle with mass 1/(1+zeta^2 r^2)^2 in d dimensions.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", parents=[common], help="energy table with oracle comparison")
    sp.add_argument("--d", type=_d_list, default=(3,), help="dimension(s), comma separated")
    sp.add_argument("--ell-max", type=_nonneg_int, default=2)
    sp.add_argument("--n-max", type=_nonneg_int, default=4)
    sp.add_argument("--parity", choices=["even", "odd"], default=None, help="d = 1 only")
    sp.add_argument("--no-oracle", action="store_true", help="skip the numerical eigensolver")

    wp = sub.add_parser("wavefunction", parents=[common], help="sample R(r) and phi(q)")
    wp.add_argument("--n", type=_nonneg_int, default=0)
    wp.add_argument("--ell", type=_nonneg_int, default=0)
    wp.add_argument("--d", type=_positive_int, default=3)
    wp.add_argument("--parity", choices=["even", "odd"], default=None)
    wp.add_argument("--points", type=_positive_int, default=500)
    wp.add_argument("--r-max", type=_positive_float, default=None, help="default 10/zeta")

    vp = sub.add_parser("verify", parents=[common], help="run acceptance checks")
    vp.add_argument("--suite", default="all",
                    help=f"'all' or comma-separated subset of {', '.join(SUITES)}")

    dp = sub.add_parser("degeneracy", parents=[common], help="inter-dimensional ladder report")
    dp.add_argument("--n", type=_nonneg_int, default=0)
    dp.add_argument("--ell", type=_positive_int, default=1)
    dp.add_argument("--d-start", type=int, choices=[2, 3], default=3)
    dp.add_argument("--no-oracle", action="store_true")
    return parser


def read_config(path) -> dict:
    """Parse a ``key=value`` file; ``#`` starts a comment."""
    conf = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        conf[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return conf


def _apply_config(parser, argv, args):
    conf = read_config(args.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in subparser._actions}
    defaults = {}
    for key, value in conf.items():
        if key in ("config", "command") or key not in known:
            raise UsageError(f"unknown config key {key!r} for '{args.command}'")
        if key in BOOL_OPTIONS:
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        elif key == "tol":
            defaults[key] = [_tol_pair(v) for v in value.split(",") if v.strip()]
        else:
            defaults[key] = value  # argparse converts string defaults with `type`
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def _tolerances(args) -> harness.Tolerances:
    overrides = dict(args.tol or [])
    try:
        return harness.DEFAULT_TOLERANCES.updated(**overrides)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None


def cmd_spectrum(args, out) -> int:
    tol = _tolerances(args)
    if args.parity is not None and 1 not in args.d:
        raise UsageError("--parity applies only when d = 1 is requested")
    cfg = harness.SweepConfig(n_max=args.n_max, ell_max=args.ell_max, d_list=args.d,
                              zetas=(args.zeta,), parity=args.parity, grid_size=args.grid,
                              run_oracle=not args.no_oracle, tolerances=tol)
    rows = harness.full_comparison(cfg)
    records = []
    for row in rows:
        records.append({
            "n_r": row.qn.n_r, "ell": row.qn.ell, "d": row.qn.d,
            "ell_d": float(row.qn.ell_d), "kappa": row.kappa, "lambda": row.lam,
            "delta": row.delta, "E_analytic": row.E_analytic, "E_numeric": row.E_numeric,
            "rel_err": row.rel_err, "nodes": row.nodes, "pass": row.passed,
        })
        if not row.passed:
            print(f"FAIL {row.qn.label}: {', '.join(row.failures)}"
                  + (f" ({row.error})" if row.error else ""), file=sys.stderr)
    write_table(records, SPECTRUM_FIELDS, args.format, out,
                meta={"zeta": _num(args.zeta), "tolerances": tol.as_dict()}, key="states")
    return 0 if all(r.passed for r in rows) else 1


def cmd_wavefunction(args, out) -> int:
    parity = args.parity if args.d == 1 else None
    if args.d != 1 and args.parity is not None:
        raise UsageError("--parity applies only to d = 1")
    qn = QuantumNumbers(args.n, args.ell, args.d, parity)
    state = analytic.bound_state(qn, args.zeta)
    model = MassModel.lorentzian(args.zeta)
    r_max = args.r_max if args.r_max is not None else 10.0 / args.zeta
    r = np.linspace(0.0, r_max, args.points)
    q = pct.q_of_r(pct.PctMap(model, args.d), r)
    m = mass_at(model, r)[0]
    R = state.radial(r)
    ph = state.phi(q)
    records = [{"r": a, "q": b, "m": c, "R": e, "phi": f}
               for a, b, c, e, f in zip(r, q, m, R, ph)]
    meta = {"zeta": _num(args.zeta), "n_r": qn.n_r, "ell": qn.ell, "d": qn.d,
            "ell_d": _num(float(qn.ell_d)), "energy": _num(state.energy),
            "norm_constant": _num(state.norm_constant)}
    write_table(records, WAVEFUNCTION_FIELDS, args.format, out, meta=meta, key="samples")
    return 0


def cmd_verify(args, out) -> int:
    tol = _tolerances(args)
    names = SUITES if args.suite == "all" else [s.strip() for s in args.suite.split(",") if s.strip()]
    unknown = [n for n in names if n not in SUITES]
    if unknown or not names:
        raise UsageError(f"unknown suite(s) {unknown}; choose from all, {', '.join(SUITES)}")
    results = harness.run_checks(names, tol=tol, grid_size=args.grid)
    for res in results:
        print(res.line(), file=sys.stderr)
    records = [{"check": r.name, "pass": r.passed, "value": r.value, "tolerance": r.tolerance,
                "elapsed_s": round(r.elapsed, 3), "detail": r.detail} for r in results]
    if args.format == "json":
        doc = {"checks": [{**rec, "value": _num(rec["value"]), "tolerance": _num(rec["tolerance"])}
                          for rec in records],
               "all_passed": all(r.passed for r in results)}
        json.dump(doc, out, indent=2)
        out.write("\n")
    else:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(VERIFY_FIELDS)
        for rec in records:
            writer.writerow([_csv_cell(rec[f]) for f in VERIFY_FIELDS])
    return 0 if all(r.passed for r in results) else 1


def cmd_degeneracy(args, out) -> int:
    rep = harness.degeneracy_ladder(args.n, args.ell, args.d_start, args.zeta,
                                    run_oracle=not args.no_oracle, grid_size=args.grid)
    records = [{"n_r": r.n_r, "ell": r.ell, "d": r.d, "ell_d": r.ell_d,
                "E_analytic": r.E_analytic, "E_numeric": r.E_numeric, "abs_diff": r.abs_diff}
               for r in rep.ladder]
    verdict = "holds" if rep.claim_satisfied else "does not hold"
    print(f"ladder spread {rep.max_pairwise_spread:.12g}; degeneracy {verdict}", file=sys.stderr)
    meta = {"zeta": _num(args.zeta), "max_pairwise_spread": _num(rep.max_pairwise_spread),
            "claim_satisfied": rep.claim_satisfied}
    write_table(records, DEGENERACY_FIELDS, args.format, out, meta=meta, key="ladder")
    return 0


COMMANDS = {
    "spectrum": cmd_spectrum,
    "wavefunction": cmd_wavefunction,
    "verify": cmd_verify,
    "degeneracy": cmd_degeneracy,
}


def run(argv=None, stdout=None) -> int:
    """Parse ``argv`` and execute; returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config:
            try:
                args = _apply_config(parser, argv, args)
            except SystemExit as exc:
                return int(exc.code or 0)
        if args.grid < 64 or args.grid % 2:
            raise UsageError(f"--grid must be an even integer >= 64, got {args.grid}")
        handler = COMMANDS[args.command]
        if args.output:
            buf = io.StringIO()
            code = handler(args, buf)
            with open(args.output, "w", newline="") as fh:
                fh.write(buf.getvalue())
            return code
        return handler(args, stdout if stdout is not None else sys.stdout)
    except (UsageError, InvalidInputError, OSError) as exc:
        parser.print_usage(sys.stderr)
        print(f"pdm-spectra: error: {exc}", file=sys.stderr)
        return 2


def check_determinism(tol=harness.DEFAULT_TOLERANCES, grid_size=8192, **_):
    """Two identical ``spectrum`` runs must produce byte-identical output."""

    def body():
        outputs = []
        with tempfile.TemporaryDirectory() as tmp:
            for i in range(2):
                path = Path(tmp) / f"run{i}.csv"
                code = run(["spectrum", "--d", "1,2,3", "--ell-max", "2", "--n-max", "4",
                            "--grid", str(grid_size), "--output", str(path)])
                outputs.append((code, path.read_bytes()))
        same = outputs[0] == outputs[1]
        return (0.0 if same else 1.0), same and outputs[0][0] == 0, \
            f"{len(outputs[0][1])} bytes per run"

    return harness._timed("8 determinism", 0.0, None, body)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line front end: ``sixv <subcommand> [options]``.

Results go to stdout (JSON object, CSV or plain text), progress and
diagnostics to stderr.  Exit codes: 0 ok, 1 domain error, 2 precision
exhausted, 3 selftest failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from . import __version__
from .errors import DomainError, PrecisionExhausted

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_PRECISION = 2
EXIT_SELFTEST = 3
EXIT_USAGE = 64

PRECISION_ENV = "SIXV_PRECISION_BITS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _scalar(v):
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v)
    return str(v)


def emit(obj, fmt: str, out=None) -> None:
    """Write a dict (one record) or a list of dicts (table) in the chosen format."""
    out = sys.stdout if out is None else out
    if fmt == "json":
        out.write(json.dumps(obj, indent=2) + "\n")
        return
    rows = obj if isinstance(obj, list) else [obj]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if rows:
            keys = list(rows[0])
            w.writerow(keys)
            for r in rows:
                w.writerow([_scalar(r[k]) for k in keys])
        out.write(buf.getvalue())
        return
    for i, r in enumerate(rows):
        if i:
            out.write("\n")
        for k, v in r.items():
            out.write(f"{k}: {_scalar(v)}\n")


def _table(columns: dict) -> list[dict]:
    keys = list(columns)
    return [dict(zip(keys, vals)) for vals in zip(*columns.values())]


# --------------------------------------------------------------------------
# config
# --------------------------------------------------------------------------

def read_config(path: str) -> dict:
    """``key = value`` lines; '#' starts a comment; keys use the long option names."""
    cfg = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key.replace("-", "_")] = value
    return cfg


def _env_precision():
    raw = os.environ.get(PRECISION_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from None


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _params(args):
    from .equilibrium import ModelParams
    if args.gamma is None or args.t is None:
        raise UsageError("--gamma and --t are required")
    return ModelParams(args.gamma, args.t)


def _need_n(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    return args.n


def _precision(args, n: int) -> int:
    from .exact import MIN_BITS, default_precision
    P = args.precision if args.precision is not None else _env_precision()
    P = default_precision(n) if P is None else P
    if P < MIN_BITS:
        raise DomainError(f"precision must be at least {MIN_BITS} bits, got {P}")
    return P


def cmd_params(args):
    from .asymptotics import constants
    p = _params(args)
    d = p.as_dict()
    d.update(constants(p).as_dict())
    emit(d, args.format)


def cmd_endpoints(args):
    from .equilibrium import centroid_formula, endpoint_gap_formulas, endpoints, lagrange_multiplier
    p = _params(args)
    d = {"gamma": p.gamma, "t": p.t}
    d.update(endpoints(p).as_dict())
    d["gaps"] = endpoint_gap_formulas(p)
    d["centroid"] = centroid_formula(p)
    d["lagrange_multiplier"] = lagrange_multiplier(p)
    if args.format == "csv":
        d.pop("gaps")
    emit(d, args.format)


def cmd_density(args):
    from .equilibrium import EquilibriumMeasure, density_samples
    p = _params(args)
    eq = EquilibriumMeasure(p, tol=args.tol)
    pts = density_samples(eq, args.points)
    if args.format == "json":
        emit({"gamma": p.gamma, "t": p.t, "x": [x for x, _ in pts], "rho": [r for _, r in pts]}, "json")
    else:
        emit([{"x": x, "rho": r} for x, r in pts], args.format)


def cmd_exact(args):
    from .exact import partition_exact
    p = _params(args)
    n = _need_n(args)
    sol = partition_exact(p, n, _precision(args, n), max_retries=args.max_retries)
    for ev in sol.ladder:
        print(f"ladder: P={ev['P']} {ev['event']}", file=sys.stderr)
    d = sol.to_json()
    if args.format == "csv":
        d.pop("h")
    emit(d, args.format)


def cmd_brute(args):
    from .enumerate import brute_force_Z, enumerate_configs
    from .exact import to_decimal
    p = _params(args)
    n = _need_n(args)
    P = _precision(args, n)
    count = 0
    dump = open(args.dump, "w", encoding="utf-8") if args.dump else None
    try:
        for cfg in enumerate_configs(n):
            count += 1
            if dump is not None:
                dump.write(cfg.to_line() + "\n")
    finally:
        if dump is not None:
            dump.close()
    Z = brute_force_Z(p, n, P)
    emit({"n": n, "count": count, "Z": to_decimal(Z, P)}, args.format)


def cmd_asym(args):
    from .asymptotics import constants, log_h_ratio_asym, z_asym
    p = _params(args)
    n = _need_n(args)
    d = {"gamma": p.gamma, "t": p.t, "n": n}
    d.update(constants(p).as_dict())
    d["log_h_ratio_asym"] = log_h_ratio_asym(p, n)
    if args.C is not None:
        d["log_Z_asym"] = z_asym(p, n, args.C)
    emit(d, args.format)


def cmd_compare(args):
    from .asymptotics import compare
    p = _params(args)
    if args.n_min < 1 or args.n_max < args.n_min:
        raise UsageError("need 1 <= --n-min <= --n-max")
    res = compare(p, range(args.n_min, args.n_max + 1), args.precision)
    rows = [{"n": r.n, "Z_exact_log": r.Z_exact_log, "Z_asym_log": r.Z_asym_log,
             "r_n": r.r_n, "n2_dev": r.n2_dev} for r in res.rows]
    if args.format == "json":
        emit({"rows": rows, "summary": res.summary()}, "json")
    else:
        emit(rows, args.format)
        print(json.dumps(res.summary()), file=sys.stderr)
        if args.summary:
            with open(args.summary, "w", encoding="utf-8") as fh:
                fh.write(json.dumps(res.summary(), indent=2) + "\n")


def cmd_toda(args):
    import mpmath
    from mpmath import mp

    from .exact import to_decimal, toda_residual
    p = _params(args)
    n = _need_n(args)
    P = _precision(args, n)
    r = toda_residual(p, n, P)
    with mp.workprec(P):
        lg = float(mpmath.log(r, 2)) if r > 0 else None
    emit({"gamma": p.gamma, "t": p.t, "n": n, "precision_bits": P,
          "residual": to_decimal(r, 64), "log2_residual": lg}, args.format)


def cmd_identities(args):
    from .theta import identity_suite
    res = identity_suite(args.trials, args.seed)
    worst = max(res, key=res.get)
    d = {"trials": args.trials, "seed": args.seed, "max_residual": res[worst],
         "worst_identity": worst, "residuals": res}
    if args.format == "csv":
        emit([{"identity": k, "max_residual": v} for k, v in res.items()], "csv")
    else:
        emit(d, args.format)


def cmd_subleading(args):
    from .subleading import f_value, residue_identities
    p = _params(args)
    n = _need_n(args)
    f = f_value(p, n)
    emit({"gamma": p.gamma, "t": p.t, "n": n, "f_value": f, "dev_from_one_sixth": abs(f - 1.0 / 6.0),
          "residues": list(residue_identities(p, args.z))}, args.format)


def cmd_selftest(args):
    from .acceptance import run_all
    only = None
    if args.only:
        try:
            only = [int(x) for x in args.only.split(",")]
        except ValueError:
            raise UsageError("--only takes a comma-separated list of criterion numbers") from None
    results = run_all(only, stream=sys.stderr)
    ok = all(r.passed for r in results)
    emit({"passed": ok,
          "criteria": [{"number": r.number, "name": r.name, "passed": r.passed} for r in results]},
         args.format if args.format != "csv" else "json")
    return EXIT_OK if ok else EXIT_SELFTEST


COMMANDS = {
    "params": (cmd_params, "model parameters and asymptotic constants"),
    "endpoints": (cmd_endpoints, "support endpoints of the equilibrium measure"),
    "density": (cmd_density, "equilibrium density samples (x, rho)"),
    "exact": (cmd_exact, "exact Z_n through the Hankel determinant"),
    "brute": (cmd_brute, "Z_n by exhaustive enumeration (n <= 6)"),
    "asym": (cmd_asym, "asymptotic formulas at one n"),
    "compare": (cmd_compare, "exact vs asymptotic sweep over n"),
    "toda": (cmd_toda, "Toda equation residual"),
    "identities": (cmd_identities, "randomised theta identity suite"),
    "subleading": (cmd_subleading, "subleading constant f and residue sums"),
    "selftest": (cmd_selftest, "run the acceptance checks"),
}


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--gamma", type=float)
    common.add_argument("--t", type=float)
    common.add_argument("--n", type=int)
    common.add_argument("--precision", type=int, help=f"bits (default from {PRECISION_ENV} or per command)")
    common.add_argument("--format", choices=("json", "csv", "text"), default=None)
    common.add_argument("--config", help="file of 'key = value' lines; explicit flags win")

    parser = _Parser(prog="sixv", description="Six-vertex DWBC partition function toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    subs = {}
    for name, (_, help_text) in COMMANDS.items():
        subs[name] = sub.add_parser(name, parents=[common], help=help_text)

    subs["density"].add_argument("--points", type=int, default=201)
    subs["density"].add_argument("--tol", type=float, default=1e-10)
    subs["exact"].add_argument("--max-retries", type=int, default=4, help="precision doublings allowed")
    subs["brute"].add_argument("--dump", help="write one configuration per line (row type strings)")
    subs["asym"].add_argument("--C", type=float, help="constant C for ln Z_asym")
    subs["compare"].add_argument("--n-min", type=int, default=4)
    subs["compare"].add_argument("--n-max", type=int, default=28)
    subs["compare"].add_argument("--summary", help="also write the JSON summary to this file")
    subs["identities"].add_argument("--trials", type=int, default=1000)
    subs["identities"].add_argument("--seed", type=int, default=0)
    subs["subleading"].add_argument("--z", type=float, default=0.7, help="point for the residue sums")
    subs["selftest"].add_argument("--only", help="comma-separated criterion numbers")

    default_format = {"density": "csv", "compare": "csv"}
    for name, sp in subs.items():
        sp.set_defaults(func=COMMANDS[name][0], _default_format=default_format.get(name, "json"))
    parser._subparsers_by_name = subs
    return parser


def _apply_config(parser: _Parser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = read_config(known.config)
    for name, sp in parser._subparsers_by_name.items():
        dests = {a.dest for a in sp._actions}
        unknown = set(cfg) - dests
        if name in argv and unknown:
            raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        sp.set_defaults(**{k: v for k, v in cfg.items() if k in dests})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if args.format is None:
            args.format = args._default_format
        if args.format not in ("json", "csv", "text"):
            raise UsageError(f"unknown format {args.format!r}")
        rc = args.func(args)
        return EXIT_OK if rc is None else rc
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sixv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PrecisionExhausted as exc:
        print(f"sixv: precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except DomainError as exc:
        print(f"sixv: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
        return code


if __name__ == "__main__":
    sys.exit(main())

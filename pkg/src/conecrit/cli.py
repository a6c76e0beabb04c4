"""Command-line front end: ``conecrit <command> [flags]``.

Data goes to stdout (or ``--out``) with fixed float formatting so identical
invocations produce identical bytes.  When ``--out`` is given, run metadata
(argv, version, timestamp) is written to a ``.meta.json`` sidecar next to it.

Exit codes: 0 success, 1 usage error, 2 regime gate, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import math
import sys
from typing import List, Optional, Sequence

from . import __version__, exponents
from .angular_solver import solve_psi
from .errors import DomainError, NumericalFailure, RegimeError
from .shooting import ShootingParams, nonexistence_certificate, shoot
from .spectral import (DomainSpec, ExplicitLambda, discrete_lambda1, grid_domain, lambda1,
                       principal_eigenfunction)

SCHEMA = 1
EXIT_OK, EXIT_USAGE, EXIT_REGIME, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- serialization ----------------------------------------------------------

def fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """JSON text with 17 significant digits and infinities as strings; dict order kept."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + ", ".join(dumps(v, indent + 1) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if hasattr(obj, "item"):  # numpy scalar
        return dumps(obj.item(), indent)
    return json.dumps(str(obj), ensure_ascii=False)


def csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _emit(args, text: str, extra_csv: Optional[str] = None):
    """JSON to stdout; ``extra_csv`` (samples) to ``--out`` when requested."""
    if args.out and extra_csv is not None:
        _write(args.out, extra_csv, args)
    elif args.out:
        _write(args.out, text, args)
        return
    sys.stdout.write(text)


def _write(path: str, text: str, args):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    meta = {
        "schema": SCHEMA,
        "version": __version__,
        "command": args.command,
        "argv": list(args.argv),
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "output": path,
    }
    with open(path + ".meta.json", "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps(meta) + "\n")


# -- argument helpers ---------------------------------------------------------

def parse_range(text: str) -> List[float]:
    """``start:end:step`` (inclusive end) rounded to 12 decimals."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"range must be start:end:step, got {text!r}")
    try:
        start, end, step = (float(v) for v in parts)
    except ValueError:
        raise UsageError(f"range values must be numbers, got {text!r}") from None
    if not step > 0 or not math.isfinite(start + end + step):
        raise UsageError(f"range step must be positive and finite, got {text!r}")
    if end < start:
        raise UsageError(f"empty range {text!r}")
    n = int(math.floor((end - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) + 0.0 for i in range(n)]


def parse_compact(text: str):
    parts = text.split(":")
    try:
        a, b = (float(v) for v in parts)
    except ValueError:
        raise UsageError(f"--compact must be a:b, got {text!r}") from None
    return a, b


def _domain(args) -> DomainSpec:
    if args.N is None:
        raise UsageError("--N is required")
    lam = getattr(args, "lambda1", None)
    if args.domain and lam is not None:
        raise UsageError("give either --domain or --lambda1, not both")
    if lam is not None:
        return DomainSpec(args.N, ExplicitLambda(lam))
    if not args.domain:
        raise UsageError("--domain (or --lambda1) is required")
    return DomainSpec.parse(args.N, args.domain)


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required for {args.command}")


# -- commands -----------------------------------------------------------------

def cmd_exponents(args) -> int:
    _need(args, "s")
    dom = _domain(args)
    lam = lambda1(dom, args.resolution)
    spec = exponents.alpha_roots(lam, dom.N)
    rep = exponents.report(spec, args.s, args.p, args.c)
    doc = {
        "schema": SCHEMA,
        "N": dom.N,
        "domain": dom.describe(),
        "s": float(args.s),
        "lambda1": spec.lambda1,
        "alpha_plus": spec.alpha_plus,
        "alpha_minus": spec.alpha_minus,
        "p_star_sub": rep.p_star_sub,
        "p_star_super": rep.p_star_super,
    }
    if args.p is not None:
        doc["p"] = float(args.p)
        doc["sigma_kelvin"] = rep.sigma_kelvin
        doc["p_star_sub_kelvin"] = rep.p_star_sub_kelvin
    doc["linear_threshold_c"] = rep.linear_threshold_c
    if rep.classification is not None:
        doc["class"] = rep.classification.zone.value
        if rep.classification.c_max is not None:
            doc["c_max"] = rep.classification.c_max
    _emit(args, dumps(doc) + "\n")
    return EXIT_OK


def cmd_eigen(args) -> int:
    dom = _domain(args)
    doc = {"schema": SCHEMA, "N": dom.N, "domain": dom.describe(),
           "resolution": args.resolution, "lambda1": lambda1(dom, args.resolution)}
    samples = None
    if not isinstance(dom.shape, ExplicitLambda):
        try:
            gd = grid_domain(dom)
        except DomainError:
            gd = None
        if gd is not None:
            doc["lambda1_discrete"] = discrete_lambda1(gd, args.resolution)
            phi = principal_eigenfunction(gd, args.resolution)
            samples = csv_text(["theta", "phi1"], zip(phi.nodes.tolist(), phi.values.tolist()))
    _emit(args, dumps(doc) + "\n", samples)
    return EXIT_OK


def cmd_psi(args) -> int:
    _need(args, "s", "p")
    dom = _domain(args)
    alpha = exponents.supersolution_alpha(args.p, args.s)
    sol = solve_psi(dom, alpha, args.p, tol=args.tol, resolution=args.resolution)
    c = 1.0 if args.c is None else args.c
    doc = {
        "schema": SCHEMA,
        "N": dom.N,
        "domain": dom.describe(),
        "s": float(args.s),
        "p": float(args.p),
        "c": float(c),
        "alpha": sol.alpha,
        "mu": sol.mu,
        "amplitude": c ** (1.0 / (1.0 - args.p)),
        "iterations": sol.iterations,
        "residual_max": sol.residual_max,
        "psi_max": float(sol.grid.values.max()),
        "psi_min": float(sol.grid.values.min()),
        "resolution": args.resolution,
    }
    samples = csv_text(["theta", "psi"], zip(sol.grid.nodes.tolist(), sol.grid.values.tolist()))
    _emit(args, dumps(doc) + "\n", samples)
    return EXIT_OK


def cmd_shoot(args) -> int:
    _need(args, "s", "p", "K")
    dom = _domain(args)
    lam = lambda1(dom, args.resolution)
    c = 1.0 if args.c is None else args.c
    prm = ShootingParams(dom.N, lam, args.s, args.p, c, args.K)
    if args.rmax is None:
        raise UsageError("--rmax is required for shoot")
    traj = shoot(prm, r_max=args.rmax, step_tol=args.tol)
    doc = {
        "schema": SCHEMA,
        "N": dom.N,
        "lambda1": lam,
        "s": float(args.s),
        "p": float(args.p),
        "c": float(c),
        "K": float(args.K),
        "delta": prm.delta,
        "exit_kind": traj.exit_kind.value,
        "R": traj.R,
        "log_R": traj.log_R,
        "exit_residual": traj.exit_residual,
        "samples": len(traj.log_r),
    }
    samples = csv_text(["log_r", "w", "w_x"],
                       zip(traj.log_r.tolist(), traj.w.tolist(), traj.w_x.tolist()))
    _emit(args, dumps(doc) + "\n", samples)
    return EXIT_OK if traj.exit_kind.value != "step_failure" else EXIT_NUMERIC


def cmd_certify(args) -> int:
    _need(args, "s", "p", "compact", "M")
    dom = _domain(args)
    c = 1.0 if args.c is None else args.c
    cert = nonexistence_certificate(dom, args.s, args.p, c, parse_compact(args.compact), args.M,
                                    angular_resolution=args.resolution, step_tol=args.tol)
    doc = {
        "schema": SCHEMA,
        "N": dom.N,
        "domain": dom.describe(),
        "s": float(args.s),
        "p": float(args.p),
        "c": float(c),
        "M": float(args.M),
        "compact": [float(v) for v in cert.compact],
        "K": cert.K,
        "R": cert.R,
        "log_R": cert.log_R,
        "exit_residual": cert.exit_residual,
        "radial_min": cert.radial_min,
        "min_on_compact": cert.min_on_compact,
        "subsolution_margin": cert.subsolution_margin,
        "margin_coarse": cert.margin_coarse,
        "margin_tol": cert.margin_tol,
        "verified": cert.verified,
    }
    traj = cert.trajectory
    samples = csv_text(["log_r", "w", "w_x"],
                       zip(traj.log_r.tolist(), traj.w.tolist(), traj.w_x.tolist()))
    _emit(args, dumps(doc) + "\n", samples)
    return EXIT_OK if cert.verified else EXIT_NUMERIC


def phase_rows(spec: exponents.SpectralData, s_values, p_values, c: float):
    for s in s_values:
        for p in p_values:
            yield s, p, exponents.classify(spec, s, p, c).zone.value


def cmd_phase(args) -> int:
    _need(args, "s_range", "p_range")
    s_values = parse_range(args.s_range)
    p_values = parse_range(args.p_range)
    dom = _domain(args)
    spec = exponents.alpha_roots(lambda1(dom, args.resolution), dom.N)
    c = 1.0 if args.c is None else args.c
    rows = [(format(s, ".12g"), format(p, ".12g"), k)
            for s, p, k in phase_rows(spec, s_values, p_values, c)]
    _emit(args, csv_text(["s", "p", "class"], rows))
    return EXIT_OK


COMMANDS = {
    "exponents": (cmd_exponents, "critical exponents and zone for one query"),
    "eigen": (cmd_eigen, "principal eigenvalue (and eigenfunction samples)"),
    "psi": (cmd_psi, "angular profile of the separable supersolution"),
    "shoot": (cmd_shoot, "integrate the radial IVP for one K"),
    "certify": (cmd_certify, "nonexistence certificate on a compact"),
    "phase": (cmd_phase, "phase diagram CSV over an (s, p) grid"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--N", type=int, help="ambient dimension")
    common.add_argument("--domain", help="orthant:k | cap:theta | arc:length | explicit:lambda "
                        "(angles in radians)")
    common.add_argument("--lambda1", type=float, help="principal eigenvalue instead of --domain")
    common.add_argument("--s", type=float, help="weight exponent")
    common.add_argument("--p", type=float, help="nonlinearity exponent")
    common.add_argument("--c", type=float, help="coefficient (default 1 where needed)")
    common.add_argument("--K", type=float, help="initial slope v'(1)")
    common.add_argument("--rmax", type=float, help="largest radius to integrate to")
    common.add_argument("--resolution", type=int, default=1024, help="angular nodes")
    common.add_argument("--tol", type=float, default=None, help="solver tolerance")
    common.add_argument("--compact", help="radial interval a:b of the compact")
    common.add_argument("--M", type=float, help="certificate lower bound")
    common.add_argument("--s-range", dest="s_range", help="start:end:step")
    common.add_argument("--p-range", dest="p_range", help="start:end:step")
    common.add_argument("--out", help="write data here (samples CSV for psi/eigen/shoot/certify)")

    parser = _Parser(prog="conecrit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


_DEFAULT_TOL = {"psi": 1e-8, "shoot": 1e-10, "certify": 1e-10}


_VALUE_FLAGS = {"--N", "--domain", "--lambda1", "--s", "--p", "--c", "--K", "--rmax",
                "--resolution", "--tol", "--compact", "--M", "--s-range", "--p-range", "--out"}


def _glue_values(argv: List[str]) -> List[str]:
    """Rewrite ``--flag value`` as ``--flag=value`` so values like ``-1:3:0.5`` parse."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(_glue_values(argv))
    args.argv = argv
    if args.tol is None:
        args.tol = _DEFAULT_TOL.get(args.command, 1e-8)
    func = COMMANDS[args.command][0]
    try:
        return func(args)
    except UsageError as exc:
        print(f"conecrit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"conecrit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RegimeError as exc:
        print(f"conecrit {args.command}: regime: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except NumericalFailure as exc:
        print(f"conecrit {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

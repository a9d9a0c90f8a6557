"""Command-line front end: ``eucdesign <subcommand> [flags]``.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure,
3 an EXCLUDED verdict.  Configurations are read from ``--in`` (``-`` or
omitted means stdin) so ``gen`` output can be piped into every other command.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import bounds, configspace, designcheck, energy, harmonics

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_EXCLUDED = 0, 1, 2, 3

KIND_ALIASES = {
    "polygon": "polygon",
    "ngon": "polygon",
    "cross": "cross_polytope",
    "cross_polytope": "cross_polytope",
    "orthoplex": "cross_polytope",
    "simplex": "simplex",
    "cube": "cube",
    "icosahedron": "icosahedron",
    "ico": "icosahedron",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class _Out:
    """Formats scalars and tables according to ``--format`` and ``--full``."""

    def __init__(self, args, stream):
        self.fmt = getattr(args, "format", "table")
        self.digits = 17 if getattr(args, "full", False) else 12
        self.stream = stream

    def num(self, x) -> str:
        if isinstance(x, (bool, np.bool_)):
            return "yes" if x else "no"
        if isinstance(x, (int, np.integer)):
            return str(int(x))
        if isinstance(x, Fraction):
            return str(x)
        if x is None:
            return "-"
        if isinstance(x, str):
            return x
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return f"{x:.{self.digits}g}"

    def line(self, text: str) -> None:
        print(text, file=self.stream)

    def record(self, fields: list[tuple[str, object]], doc: dict | None = None) -> None:
        if self.fmt == "json":
            self.line(json.dumps(doc if doc is not None else {k: _jsonable(v) for k, v in fields}, indent=1))
        elif self.fmt == "csv":
            w = csv.writer(self.stream, lineterminator="\n")
            w.writerow(["field", "value"])
            for k, v in fields:
                w.writerow([k, self.num(v)])
        else:
            width = max(len(k) for k, _ in fields)
            for k, v in fields:
                self.line(f"{k:<{width}}  {self.num(v)}")

    def table(self, header: list[str], rows: list[list]) -> None:
        if self.fmt == "json":
            self.line(json.dumps([dict(zip(header, map(_jsonable, r))) for r in rows], indent=1))
            return
        cells = [[self.num(v) for v in r] for r in rows]
        if self.fmt == "csv":
            w = csv.writer(self.stream, lineterminator="\n")
            w.writerow(header)
            w.writerows(cells)
            return
        widths = [max([len(h)] + [len(r[k]) for r in cells]) for k, h in enumerate(header)]
        self.line("  ".join(h.rjust(wd) for h, wd in zip(header, widths)))
        for r in cells:
            self.line("  ".join(c.rjust(wd) for c, wd in zip(r, widths)))


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _floats(text: str, what: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise UsageError(f"{what} is empty")
    return vals


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of integers, got {text!r}") from None


def _read_config(args, stdin) -> configspace.Configuration:
    path = getattr(args, "inp", None)
    fmt = getattr(args, "in_format", None)
    if path in (None, "-"):
        text = stdin.read()
        if not text.strip():
            raise UsageError("no configuration given (use --in FILE or pipe one on stdin)")
        return configspace.loads_configuration(text, fmt or ("json" if text.lstrip().startswith("{") else "csv"))
    return configspace.load_configuration(path, fmt)


def _read_cert(path: str) -> bounds.Certificate:
    try:
        with open(path) as fh:
            return bounds.Certificate.loads(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read certificate {path!r}: {exc.strerror}") from None


def _write_text(path: str | None, text: str, stream) -> None:
    if path in (None, "-"):
        stream.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------- subcommands


def cmd_verify(args, out, stdin):
    X = _read_config(args, stdin)
    modes = ["spherical", "euclidean", "strong"] if args.mode == "all" else [args.mode]
    if "spherical" in modes and X.n_shells != 1:
        if args.mode == "spherical":
            raise UsageError(f"spherical mode needs a single shell, configuration has {X.n_shells}")
        modes.remove("spherical")
    if args.t is not None:
        pred = {"spherical": designcheck.is_spherical_design, "euclidean": designcheck.is_euclidean_design,
                "strong": designcheck.is_strong_design}
        rows = []
        for m in modes:
            chk = pred[m](X, args.t, args.eps)
            rows.append([m, args.t, bool(chk.holds), chk.max_residual])
        out.table(["mode", "t", "holds", "max_residual"], rows)
        return EXIT_OK
    rows = [(m, designcheck.max_strength(X, m, args.tcap, args.eps)) for m in modes]
    if len(rows) == 1 and out.fmt == "table":
        out.line(f"max strength: {rows[0][1]}")
    else:
        out.table(["mode", "max_strength"], [list(r) for r in rows])
    return EXIT_OK


def cmd_energy(args, out, stdin):
    X = _read_config(args, stdin)
    k = energy.parse_kernel(args.kernel)
    val = energy.potential_energy(X, k)
    if out.fmt == "table":
        out.line(out.num(val))
    else:
        out.record([("kernel", k.spec()), ("energy", val)])
    return EXIT_OK


def _report_fields(rep: bounds.BoundReport) -> list[tuple[str, object]]:
    fields = [
        ("kind", rep.kind),
        ("bound", rep.bound),
        ("certified_bound", rep.certified_bound),
        ("valid", rep.valid),
        ("heuristic", rep.heuristic),
        ("residual", rep.residual),
        ("grid_n", rep.grid_n),
        ("verify_n", rep.verify_n),
        ("radii", ",".join(f"{r:.12g}" for r in rep.radii)),
    ]
    if rep.counts:
        fields.append(("counts", ",".join(map(str, rep.counts))))
    return fields


def _emit_report(rep, out, cert_out):
    if cert_out:
        cert = rep.certified_certificate or rep.certificate
        if cert is not None:
            _write_text(cert_out, cert.dumps(), out.stream)
    out.record(_report_fields(rep), rep.to_dict())


def cmd_energy_bound(args, out, stdin):
    X = _read_config(args, stdin)
    k = energy.parse_kernel(args.kernel)
    rep = bounds.energy_lower_bound(X, k, args.imax, args.jmax, args.grid, args.exponents, tol=args.eps)
    _emit_report(rep, out, args.cert_out)
    return EXIT_OK


def _print_verdict(v: bounds.Verdict, out) -> int:
    out.record(
        [("verdict", v.verdict), ("lhs", v.lhs), ("rhs", v.rhs), ("worst_violation", v.worst_violation)],
        {"verdict": v.verdict, "lhs": v.lhs, "rhs": v.rhs, "worst_violation": v.worst_violation},
    )
    return EXIT_EXCLUDED if v.excluded else EXIT_OK


def cmd_code_bound(args, out, stdin):
    radii = _floats(args.r, "--r")
    if args.a <= 0:
        raise UsageError("--a must be positive")
    if args.action == "optimize":
        rep = bounds.code_bound_optimize(radii, args.a, args.d, args.imax, args.jmax, args.grid,
                                         args.resolution, jobs=args.jobs)
        _emit_report(rep, out, args.cert_out)
        return EXIT_OK
    counts = _ints(args.n, "--n") if args.n else None
    if counts is None or len(counts) != len(radii):
        raise UsageError("check needs --n with one count per radius")
    if args.cert:
        cert = _read_cert(args.cert)
    else:
        if len(radii) != 1:
            raise UsageError("check on several shells needs an explicit --cert")
        rep = bounds.code_bound_optimize(radii, args.a, args.d, args.imax, args.jmax, args.grid)
        cert = rep.certified_certificate
    return _print_verdict(bounds.code_bound_check(radii, counts, args.a, cert, args.grid), out)


def cmd_design_bound(args, out, stdin):
    if args.r is None:
        X = _read_config(args, stdin)
        d = X.d
        cert = _read_cert(args.cert) if args.cert else bounds.fisher_design_certificate(d, args.t)
        v = bounds.design_bound_check_configuration(X, args.t, cert, args.grid, args.pair_counts)
        return _print_verdict(v, out)
    radii = _floats(args.r, "--r")
    counts = _ints(args.n or "", "--n")
    weights = _floats(args.w, "--w") if args.w else [1.0] * len(radii)
    if len(counts) != len(radii) or len(weights) != len(radii):
        raise UsageError("--r, --w and --n need one entry per shell")
    if args.d is None and not args.cert:
        raise UsageError("give --d or --cert")
    cert = _read_cert(args.cert) if args.cert else bounds.fisher_design_certificate(args.d, args.t)
    return _print_verdict(bounds.design_bound_check(radii, weights, counts, args.t, cert, args.grid), out)


def cmd_fisher(args, out, stdin):
    if args.t < 0 or args.d < 2:
        raise UsageError("need --d >= 2 and --t >= 0")
    try:
        if args.all:
            rows = [["spherical", bounds.fisher_spherical(args.d, args.t)]]
            if args.t % 2 == 0 or args.antipodal:
                rows.append(["strong", bounds.fisher_strong(args.d, args.t, args.antipodal)])
            if args.p is not None:
                rows.append(["per_sphere", bounds.fisher_per_sphere(args.d, args.t, args.p)])
            out.table(["form", "bound"], rows)
            return EXIT_OK
        if args.p is not None:
            val = bounds.fisher_per_sphere(args.d, args.t, args.p)
        elif args.strong:
            val = bounds.fisher_strong(args.d, args.t, args.antipodal)
        else:
            val = bounds.fisher_spherical(args.d, args.t)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out.line(str(val))
    return EXIT_OK


def cmd_gen(args, out, stdin):
    kind = KIND_ALIASES.get(args.kind)
    if kind is None:
        raise UsageError(f"unknown kind {args.kind!r}; choose from {', '.join(sorted(KIND_ALIASES))}")
    rot = None
    if args.seed is not None:
        rot = configspace.random_rotation(args.d, np.random.default_rng(args.seed))
    X = configspace.generate(kind, args.d, args.r, rot, args.n)
    fmt = args.out_format or ("csv" if args.out and args.out.lower().endswith(".csv") else "json")
    _write_text(args.out, configspace.dumps_configuration(X, fmt), out.stream)
    return EXIT_OK


def cmd_expand(args, out, stdin):
    if args.l < 0 or args.d < 2:
        raise UsageError("need --d >= 2 and --l >= 0")
    exp = harmonics.monomial_expansion(args.d, args.l)
    rows = [[i, args.l - i, a, float(a)] for i, a in enumerate(exp.coefficients)]
    out.table(["i", "degree", "A_exact", "A"], rows)
    return EXIT_OK


def cmd_moments(args, out, stdin):
    X = _read_config(args, stdin)
    rep = designcheck.moment_report(X, args.imax, args.jmax)
    rows = [[i, j, v, v / s] for i, j, v, s in rep.rows()]
    out.table(["i", "j", "moment", "relative"], rows)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _common(p, *, config=False, fmt=True):
    if config:
        p.add_argument("--in", dest="inp", metavar="FILE", help="configuration file (JSON or CSV; '-' for stdin)")
        p.add_argument("--in-format", choices=["json", "csv"], help="override the input format")
    if fmt:
        p.add_argument("--format", choices=["table", "csv", "json"], default="table", help="output format")
        p.add_argument("--full", action="store_true", help="print reals with 17 significant digits")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eucdesign", description="Designs, energies and LP bounds on concentric spheres.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("verify", help="design predicates and maximal strength")
    _common(p, config=True)
    p.add_argument("--mode", choices=["spherical", "euclidean", "strong", "all"], default="spherical")
    p.add_argument("--t", type=int, help="test one strength instead of searching")
    p.add_argument("--tcap", type=int, default=12, help="largest strength tried")
    p.add_argument("--eps", type=float, default=designcheck.DEFAULT_EPS, help="relative moment tolerance")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("energy", help="potential energy for a kernel")
    _common(p, config=True)
    p.add_argument("--kernel", required=True, help="riesz:s=S | innerpow:l=L | poly-u:c0,c1,.. | poly-t:c0,..")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("energy-bound", help="LP lower bound on the potential energy")
    _common(p, config=True)
    p.add_argument("--kernel", required=True)
    p.add_argument("--imax", type=int, default=0)
    p.add_argument("--jmax", type=int, default=8)
    p.add_argument("--grid", type=int, default=bounds.DEFAULT_GRID)
    p.add_argument("--exponents", choices=["all", "design"], default="all")
    p.add_argument("--eps", type=float, default=bounds.FEAS_TOL, help="feasibility tolerance")
    p.add_argument("--cert-out", metavar="FILE", help="write the certificate here")
    p.set_defaults(func=cmd_energy_bound)

    p = sub.add_parser("code-bound", help="a-code bounds (check a certificate or optimize one)")
    _common(p)
    p.add_argument("action", choices=["check", "optimize"])
    p.add_argument("--r", default="1", help="comma-separated shell radii")
    p.add_argument("--a", type=float, required=True, help="minimal distance")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", help="comma-separated shell counts (check)")
    p.add_argument("--cert", metavar="FILE", help="code certificate (check)")
    p.add_argument("--imax", type=int, default=0)
    p.add_argument("--jmax", type=int, default=16)
    p.add_argument("--grid", type=int, default=bounds.DEFAULT_GRID)
    p.add_argument("--resolution", type=int, default=8, help="count-simplex resolution for several shells")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--cert-out", metavar="FILE")
    p.set_defaults(func=cmd_code_bound)

    p = sub.add_parser("design-bound", help="cardinality check for Euclidean t-designs")
    _common(p, config=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--r", help="comma-separated radii (omit to read a configuration)")
    p.add_argument("--w", help="comma-separated per-shell weights (default 1)")
    p.add_argument("--n", help="comma-separated shell counts")
    p.add_argument("--cert", metavar="FILE", help="design certificate (default: the Fisher square)")
    p.add_argument("--grid", type=int, default=bounds.DEFAULT_GRID)
    p.add_argument("--pair-counts", action="store_true", help="count same-direction pairs of the configuration")
    p.set_defaults(func=cmd_design_bound)

    p = sub.add_parser("fisher", help="closed-form Fisher-type lower bounds")
    _common(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--strong", action="store_true", help="strong design on enough spheres")
    p.add_argument("--antipodal", action="store_true")
    p.add_argument("--p", type=int, help="number of spheres (per-sphere form)")
    p.add_argument("--all", action="store_true", help="print every applicable form")
    p.set_defaults(func=cmd_fisher)

    p = sub.add_parser("gen", help="catalog configurations")
    _common(p, fmt=False)
    p.add_argument("--kind", required=True, help="polygon, cross, simplex, cube or icosahedron")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--r", type=float, default=1.0, help="radius")
    p.add_argument("--n", type=int, help="vertex count for polygons")
    p.add_argument("--seed", type=int, help="apply a random rotation from this seed")
    p.add_argument("--out", metavar="FILE", help="output file (default stdout)")
    p.add_argument("--out-format", choices=["json", "csv"])
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("expand", help="expansion of t^l in Gegenbauer polynomials")
    _common(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("moments", help="dump the moment table of a configuration")
    _common(p, config=True)
    p.add_argument("--imax", type=int, default=4)
    p.add_argument("--jmax", type=int, default=4)
    p.set_defaults(func=cmd_moments)
    return parser


def run(argv=None, stdout=None, stderr=None, stdin=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    stdin = stdin or sys.stdin
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    out = _Out(args, stdout)
    try:
        return args.func(args, out, stdin)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except bounds.CertificateInfeasible as exc:
        print(f"infeasible certificate: {exc}", file=stderr)
        return EXIT_NUMERIC
    except (bounds.BoundError, energy.SingularKernelError) as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    except FileNotFoundError as exc:
        print(f"input error: {exc.filename}: no such file", file=stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"input error: {exc}", file=stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

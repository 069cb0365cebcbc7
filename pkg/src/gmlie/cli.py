"""Command-line entry point: gmlie {list, expand, ring, connection, solve, mhs, bridge, verify}."""
from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import __version__
from .checks import CHECK_GROUPS, mhs_checks, qseries_checks, run_checks
from .geometry import SchemaError, get_geometry, list_geometries, load_geometry
from .qseries import format_series, named_form
from .report import VerificationReport

DEFAULT_ORDER = 20


class UsageError(Exception):
    pass


def _order(text: str) -> Fraction:
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"order must be a rational number, got {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("order must be positive")
    return v


def _int_order(order: Fraction) -> int:
    if order.denominator != 1:
        raise UsageError(f"this command needs an integral order, got {order}")
    return int(order)


def _geometry(arg: str):
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            return load_geometry(fh.read())
    try:
        return get_geometry(arg)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None


def _groups(text: str | None):
    if not text:
        return CHECK_GROUPS
    groups = tuple(g.strip() for g in text.split(",") if g.strip())
    bad = [g for g in groups if g not in CHECK_GROUPS]
    if bad or not groups:
        raise UsageError(f"unknown check group(s) {', '.join(bad) or '(none)'}; choose from {', '.join(CHECK_GROUPS)}")
    return groups


def _emit(report: VerificationReport, as_json: bool, out) -> int:
    out.write(report.to_json() if as_json else report.to_text())
    return report.exit_code


def cmd_list(args, out):
    for name in list_geometries():
        out.write(f"{name}: {get_geometry(name).description}\n")
    return 0


def cmd_expand(args, out):
    try:
        s = named_form(args.form, args.level, args.order)
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from None
    label = args.form if args.level is None else f"{args.form} (level {args.level})"
    out.write(f"{label} = {format_series(s)}\n")
    return 0


def cmd_ring(args, out):
    from .qmrings import commutator_table, presentation, verify_ring
    from .vfsolver import format_bracket
    try:
        pres = presentation(args.level)
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from None
    if args.action == "table":
        names = ["dtau", "delta", "W"] if pres.level == "1" else ["dtau", "H", "F"]
        for (x, y), coeffs in commutator_table(pres, names).items():
            out.write(format_bracket(x, y, coeffs) + "\n")
        return 0
    rep = VerificationReport(f"ring {pres.name}", {"order": str(args.order)})
    rep.extend(verify_ring(args.level, args.order))
    return _emit(rep, args.json, out)


def cmd_connection(args, out):
    from .gaussmanin import connection_matrix
    geo = _geometry(args.geometry)
    out.write(str(connection_matrix(geo)) + "\n")
    return 0


def cmd_solve(args, out):
    from .vfsolver import EnhancedSpace, classify
    geo = _geometry(args.geometry)
    space = EnhancedSpace(geo)
    out.write(f"S = {space.gauge}\n")
    for m in space.modular_fields():
        out.write(f"{m.name} = {m.field}\n")
        for k, v in m.yukawa.items():
            out.write(f"  {k} = {v}\n")
    for name, f in space.lie_fields():
        out.write(f"{name} = {f}\n")
    for line in classify(space.all_fields()).lines():
        out.write(line + "\n")
    return 0


def cmd_mhs(args, out):
    geo = _geometry(args.geometry)
    if not geo.polytope:
        raise UsageError(f"geometry {geo.name!r} has no polytope")
    rep = VerificationReport(geo.name, {"degree_bound": args.degree_bound, "seed": args.seed})
    rep.extend(mhs_checks(geo, args.degree_bound, args.seed))
    return _emit(rep, args.json, out)


def cmd_bridge(args, out):
    geo = _geometry(args.geometry)
    order = _int_order(args.order)
    rep = VerificationReport(geo.name, {"order": order})
    rep.extend(qseries_checks(geo, order))
    return _emit(rep, args.json, out)


def cmd_verify(args, out):
    geo = _geometry(args.geometry)
    groups = _groups(args.checks)
    order = _int_order(args.order) if "qseries" in groups else args.order
    env = {"checks": ",".join(groups), "field": "Q" if geo.ctx.d is None else f"Q(sqrt({geo.ctx.d}))",
           "order": str(order), "degree_bound": args.degree_bound, "seed": args.seed, "version": __version__}
    rep = VerificationReport(geo.name, env)
    rep.extend(run_checks(geo, groups, order, args.degree_bound, args.seed))
    return _emit(rep, args.json, out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gmlie", description="Gauss-Manin Lie algebra and quasi-modular form checks")
    p.add_argument("--version", action="version", version=f"gmlie {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, order=True, json_flag=True):
        if order:
            sp.add_argument("--order", type=_order, default=Fraction(DEFAULT_ORDER), help="truncation order")
        if json_flag:
            sp.add_argument("--json", action="store_true", help="structured output")

    sp = sub.add_parser("list", help="list built-in geometries")
    sp.set_defaults(func=cmd_list)

    sp = sub.add_parser("expand", help="print a q-expansion (E2, E4, E6, eta, A, B, C, alpha, E)")
    sp.add_argument("form")
    sp.add_argument("--level", choices=["1*", "2", "3"])
    common(sp, json_flag=False)
    sp.set_defaults(func=cmd_expand)

    sp = sub.add_parser("ring", help="check a differential ring on q-expansions or print its commutators")
    sp.add_argument("action", choices=["verify", "table"])
    sp.add_argument("level", choices=["1", "1*", "2", "3"])
    common(sp)
    sp.set_defaults(func=cmd_ring)

    for name, func, text in (("connection", cmd_connection, "Gauss-Manin connection matrices"),
                             ("solve", cmd_solve, "modular and gauge vector fields with their Lie algebra")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("geometry", help="built-in name or TOML file")
        sp.set_defaults(func=func)

    sp = sub.add_parser("mhs", help="mixed-Hodge ranks from the polygon")
    sp.add_argument("geometry")
    sp.add_argument("--degree-bound", type=int, default=6)
    sp.add_argument("--seed", type=int, default=0)
    common(sp, order=False)
    sp.set_defaults(func=cmd_mhs)

    sp = sub.add_parser("bridge", help="q-series identities along the modular flow")
    sp.add_argument("geometry")
    common(sp)
    sp.set_defaults(func=cmd_bridge)

    sp = sub.add_parser("verify", help="full verification report")
    sp.add_argument("geometry")
    sp.add_argument("--checks", help=f"comma-separated subset of {','.join(CHECK_GROUPS)}")
    sp.add_argument("--degree-bound", type=int, default=6)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except (UsageError, SchemaError) as exc:
        sys.stderr.write(f"gmlie: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 mathematical rejection, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from .constructions import (
    as_fraction, assemble_fibred, check_fibred, folner_box, folner_deficiency, folner_family,
    folner_project, l1_distance,
)
from .errors import Rejection
from .groups import box_space
from .profiler import (
    ReportConfig, duplicate_family, emit_report, rows_from_csv, rows_from_json, smin_profile,
    tail_signature,
)
from .space import CoarseUnion, ball, build_graph, diameter, girth
from .witness import DEFAULT_MAX_VARIABLES, check_witness, eps_star

log = logging.getLogger("propa")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _ints(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _frac(text):
    try:
        return as_fraction(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a number or p/q, got {text!r}") from None


def _read_json(path):
    return json.loads(Path(path).read_text())


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_json(path, data):
    _write_text(path, json.dumps(data, indent=2) + "\n")


def load_union(path):
    return CoarseUnion.from_json(_read_json(path), name=Path(path).stem)


# --------------------------------------------------------------------------
# commands


def cmd_space(args):
    if args.action == "build":
        if not args.graph:
            raise UsageError("space build needs at least one --graph")
        union = CoarseUnion([build_graph(g) for g in args.graph])
        _write_json(args.out, union.to_json())
    elif args.action == "girth":
        union = load_union(args.space)
        out = []
        for i, g in enumerate(union.blocks):
            gi = girth(g)
            out.append({"block": i, "name": g.label, "vertices": g.vertex_count,
                        "girth": None if gi == float("inf") else gi, "diameter": diameter(g)})
        _write_json(args.out, {"blocks": out})
    else:
        union = load_union(args.space)
        if args.format == "dot":
            _write_text(args.out, union.to_dot())
        else:
            _write_json(args.out, union.to_json())
    return 0


def cmd_box(args):
    if args.group == "zd":
        if not args.moduli:
            raise UsageError("--group zd needs --moduli")
        fam = box_space("zd", d=args.d, moduli=args.moduli)
    else:
        if not args.targets:
            raise UsageError("--group free needs --targets")
        fam = box_space("free", k=args.k, targets=args.targets.split(","))
    for w in fam.warnings:
        print(f"warning: {w}", file=sys.stderr)
    _write_json(args.out, fam.to_json())
    return 0


def _witness_json(w):
    return {
        "R": w.R,
        "S": w.S,
        "measures": {str(x): [[z, str(v)] for z, v in sorted(m.items())] for x, m in w.measures.items()},
    }


def cmd_epsstar(args):
    union = load_union(args.space)
    if not 0 <= args.block < len(union.blocks):
        raise Rejection(f"block {args.block} out of range (family has {len(union.blocks)})")
    if not 0 <= args.center < union.blocks[args.block].vertex_count:
        raise Rejection(f"center {args.center} is not a vertex of block {args.block}")
    C = ball(union, union.point(args.block, args.center), args.radius)
    method = args.method or ("highs" if args.mode == "float" else "simplex")
    res = eps_star(C, args.R, args.S, mode=args.mode, support=args.support, method=method,
                   max_variables=args.max_variables)
    out = {"value": str(res.value), "float": float(res.value), "subset_size": len(C),
           "subset_diameter": C.diameter, **res.stats}
    _write_json(args.out, out)
    if args.emit_witness:
        _write_json(args.emit_witness, _witness_json(res.witness))
    return 0


def cmd_folner(args):
    fam = box_space("zd", d=args.d, moduli=[args.modulus])
    q = fam.maps[0]
    F = folner_box(args.d, args.box)
    eps = Fraction(2 * args.R, args.box) if args.eps is None else args.eps
    out = {"d": args.d, "box": args.box, "modulus": args.modulus, "R": args.R, "S": F.radius,
           "eps": str(eps), "deficiency": {}}
    for k in range(1, args.R + 1):
        g = (k,) + (0,) * (args.d - 1)
        out["deficiency"][str(k)] = str(folner_deficiency(F, g))
    if args.check:
        w = folner_family(F, q)
        rep = check_witness(w, args.R, eps, F.radius)
        out["check"] = {"passed": rep.passed, "max_variation": str(rep.max_variation),
                        "pairs_checked": rep.pairs_checked, "violations": len(rep.violations)}
        g1 = (1,) + (0,) * (args.d - 1)
        x1 = q.target.index[tuple(c % args.modulus for c in g1)]
        out["neighbor_l1"] = str(l1_distance(folner_project(F, q, 0), folner_project(F, q, x1)))
    _write_json(args.out, out)
    if args.check and not out["check"]["passed"]:
        print("witness check FAILED", file=sys.stderr)
    return 0


def cmd_treewitness(args):
    union = load_union(args.space)
    data = assemble_fibred(union, args.R, args.eps)
    out = data.summary()
    out["K_L"] = {str(L): data.excluded_blocks(L) for L in args.L}
    if args.check_fibred:
        out["checks"] = []
        for L in args.L:
            rep = check_fibred(data, L)
            out["checks"].append(rep.to_json())
            if not rep.passed:
                print(f"fibred check FAILED at L={L}: conditions {rep.kinds()}", file=sys.stderr)
    _write_json(args.report, out)
    return 0


def _config_defaults(path):
    if not path:
        return {}
    cfg = _read_json(path)
    allowed = {"mode", "jobs", "max_variables", "support", "timing"}
    unknown = set(cfg) - allowed
    if unknown:
        raise UsageError(f"unknown config keys {sorted(unknown)}")
    return cfg


def cmd_profile(args):
    union = load_union(args.family)
    rows = smin_profile(union, args.R, args.eps, args.L, mode=args.mode, jobs=args.jobs,
                        timing=args.timing, support=args.support, family=args.name or union.name)
    emit_report(rows, ReportConfig(csv=args.out, json=args.json, svg=args.svg))
    for L in args.L:
        value, first, exceptional = tail_signature(rows, L)
        print(f"L={L}: S_min constant ({value}) from block {first} on; "
              f"exceptional blocks {exceptional} (finite family, not a proof)", file=sys.stderr)
    return 0


def cmd_duplicate(args):
    union = load_union(args.family)
    dup = duplicate_family(union, args.copies)
    data = dup.to_json()
    data["origin"] = [[i, j] for i, j in dup.origin]
    _write_json(args.out, data)
    return 0


def cmd_report(args):
    text = Path(args.csv or args.json_in).read_text()
    rows = rows_from_csv(text) if args.csv else rows_from_json(text)
    emit_report(rows, ReportConfig(json=args.json, svg=args.svg, x_axis=args.x, y_axis=args.y))
    return 0


# --------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="propa", description="Finite computations for coarse amenability witnesses.")
    p.add_argument("--config", help="JSON file with defaults (mode, jobs, max_variables, support, timing)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("space", help="build, inspect and export coarse unions")
    sp.add_argument("action", choices=["build", "girth", "export"])
    sp.add_argument("--graph", action="append", help="block descriptor, e.g. cycle:6 or petersen")
    sp.add_argument("--space", help="space JSON (girth, export)")
    sp.add_argument("--format", choices=["json", "dot"], default="json")
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_space)

    bp = sub.add_parser("box", help="box spaces of Z^d or free groups")
    bp.add_argument("action", choices=["build"])
    bp.add_argument("--group", choices=["zd", "free"], required=True)
    bp.add_argument("--d", type=int, default=1)
    bp.add_argument("--moduli", type=_ints)
    bp.add_argument("--k", type=int, default=2)
    bp.add_argument("--targets", help="comma-separated target groups, e.g. sl2:3,sl2:5")
    bp.add_argument("--out", default="-")
    bp.set_defaults(func=cmd_box)

    ep = sub.add_parser("epsstar", help="optimal variation on a ball")
    ep.add_argument("--space", required=True)
    ep.add_argument("--block", type=int, default=0)
    ep.add_argument("--center", type=int, default=0)
    ep.add_argument("--radius", type=int, required=True)
    ep.add_argument("--R", type=int, default=1)
    ep.add_argument("--S", type=int, required=True)
    ep.add_argument("--mode", choices=["exact", "float"], default="exact")
    ep.add_argument("--support", choices=["ambient", "intrinsic"], default="ambient")
    ep.add_argument("--method", choices=["simplex", "highs"])
    ep.add_argument("--max-variables", type=int, default=DEFAULT_MAX_VARIABLES)
    ep.add_argument("--emit-witness")
    ep.add_argument("--out", default="-")
    ep.set_defaults(func=cmd_epsstar)

    fp = sub.add_parser("folner", help="Følner box projections to Z^d / m")
    fp.add_argument("--d", type=int, default=1)
    fp.add_argument("--box", type=int, required=True)
    fp.add_argument("--modulus", type=int, required=True)
    fp.add_argument("--R", type=int, default=1)
    fp.add_argument("--eps", type=_frac, help="defaults to 2R/box")
    fp.add_argument("--check", action="store_true")
    fp.add_argument("--out", default="-")
    fp.set_defaults(func=cmd_folner)

    tp = sub.add_parser("treewitness", help="fibred data from tree-ray witnesses")
    tp.add_argument("--space", required=True)
    tp.add_argument("--R", type=int, default=1)
    tp.add_argument("--eps", type=_frac, required=True)
    tp.add_argument("--L", type=_ints, default=[1])
    tp.add_argument("--check-fibred", action="store_true")
    tp.add_argument("--report", default="-")
    tp.set_defaults(func=cmd_treewitness)

    pp = sub.add_parser("profile", help="S_min profile of a family")
    pp.add_argument("--family", required=True)
    pp.add_argument("--name")
    pp.add_argument("--R", type=int, default=1)
    pp.add_argument("--eps", type=_frac, required=True)
    pp.add_argument("--L", type=_ints, required=True)
    pp.add_argument("--out", required=True, help="CSV path")
    pp.add_argument("--json")
    pp.add_argument("--svg")
    pp.add_argument("--mode", choices=["exact", "float", "auto"], default="auto")
    pp.add_argument("--support", choices=["ambient", "intrinsic"], default="ambient")
    pp.add_argument("--jobs", type=int, default=1)
    pp.add_argument("--no-timing", dest="timing", action="store_false",
                    help="write runtime_ms as 0 so output is byte-reproducible")
    pp.set_defaults(func=cmd_profile)

    dp = sub.add_parser("duplicate", help="diagonal duplication of a family")
    dp.add_argument("--family", required=True)
    dp.add_argument("--copies", type=int, required=True)
    dp.add_argument("--out", default="-")
    dp.set_defaults(func=cmd_duplicate)

    rp = sub.add_parser("report", help="re-emit a profile as JSON and/or SVG")
    src = rp.add_mutually_exclusive_group(required=True)
    src.add_argument("--csv")
    src.add_argument("--json-in")
    rp.add_argument("--json")
    rp.add_argument("--svg")
    rp.add_argument("--x", choices=["block", "L"], default="block")
    rp.add_argument("--y", choices=["S_min", "max_residual"], default="S_min")
    rp.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return 1
        defaults = _config_defaults(args.config)
        if defaults:
            # config values apply only where the flag was left at its default
            sub = parser._subparsers._group_actions[0].choices[args.command]
            sub.set_defaults(**{k: v for k, v in defaults.items() if hasattr(args, k)})
            args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except Rejection as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

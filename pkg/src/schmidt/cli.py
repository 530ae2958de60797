"""Command-line front end.

Subcommands: gen, render, classgroup, families, cover, pack, stats, chains,
dichotomy.  Exit status is 0 on success, 2 on invalid input and 1 on runtime
failure.  A JSON file given by ``--config`` may supply any flag (keys are the
long flag names with dashes or underscores); flags on the command line win.

Points of K are written ``u,v,q`` meaning (u + v*omega)/q with
omega = (s + sqrt(delta))/2, s = delta mod 2.  Ideals are written ``a,b,c``
for the integral ideal with Hermite basis a, b + c*omega.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

from .arrangement import (
    Arrangement,
    ArrangementSpec,
    Window,
    angle_census,
    dichotomy,
    enumerate_window,
    ghost_d,
    seed_exists,
)
from .classgeom import (
    chain_search,
    covered_classes,
    disc_cover_check,
    families_at,
    family_curvature_congruence,
    generation_consistency,
    InsufficientData,
)
from .classgrp import class_group
from .errors import SchmidtError, ValidationError
from .packing import (
    CosetSpec,
    Packing,
    coset_filter,
    curvature_census,
    immediate_packing,
    verify_packing,
    in_core,
    default_core,
)
from .qfield import FieldCtx, IdealHNF, ideal_from_generators, ideals_of_norm
from .render import PALETTES, RenderStyle, render_svg
from .serialize import read_jsonl, write_census_csv, write_jsonl

log = logging.getLogger("schmidt")


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# value parsers


def _ints(text: str, n: int, what: str) -> list[int]:
    try:
        vals = [int(p) for p in str(text).split(",")]
    except ValueError:
        raise UsageError(f"{what} needs {n} comma-separated integers, got {text!r}") from None
    if len(vals) != n:
        raise UsageError(f"{what} needs {n} comma-separated integers, got {text!r}")
    return vals


def parse_alpha(ctx: FieldCtx, text: str):
    u, v, q = _ints(text, 3, "alpha")
    if q == 0:
        raise UsageError("alpha denominator must be nonzero")
    return ctx.from_basis(u, v, q)


def parse_ideal(ctx: FieldCtx, text: str) -> IdealHNF:
    a, b, c = _ints(text, 3, "ideal")
    if a <= 0 or c <= 0 or a % c or b % c:
        raise UsageError(f"{text!r} is not the Hermite form of an ideal")
    I = ideal_from_generators([ctx.elem(a), ctx.elem(b, c)])
    if (I.a, I.b, I.c, I.den) != (a, b % a, c, 1):
        raise UsageError(f"{text!r} is not the Hermite form of an ideal (closure is {I})")
    return I


def cmax_from_curvature(bound: Fraction, D: int, m: int) -> int:
    """Smallest integer >= bound * sqrt(D/m)."""
    x2 = bound * bound * D / m
    fl = math.isqrt(x2.numerator // x2.denominator)
    return fl if Fraction(fl * fl) == x2 else fl + 1


# ---------------------------------------------------------------------------
# argument wiring


def _add_field(p, d=True):
    p.add_argument("--field", type=int, help="fundamental discriminant delta < 0")
    if d:
        p.add_argument("--d", type=int, help="the parameter D >= 1")


def _add_gen(p):
    _add_field(p)
    p.add_argument("--window", help="x0,y0,x1,y1 (rationals allowed, e.g. 3/2)")
    p.add_argument("--cmax", type=int, help="bound on the curvature index |c|")
    p.add_argument("--max-curv", help="bound on the real curvature; converted to --cmax by ceiling")
    p.add_argument("--in", dest="input", help="read an arrangement from JSONL instead of generating")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="schmidt", description=__doc__.split("\n")[0])
    top.add_argument("--config", help="JSON file supplying default flag values")
    top.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    sub = top.add_subparsers(dest="cmd", parser_class=_Parser)

    p = sub.add_parser("gen", parents=[common], help="enumerate S_D in a window")
    _add_gen(p)
    p.add_argument("--out", help="output JSONL (default stdout)")

    p = sub.add_parser("render", parents=[common], help="draw an arrangement as SVG")
    p.add_argument("--in", dest="input", help="arrangement JSONL")
    p.add_argument("--highlight", help="packing JSONL whose members are drawn highlighted")
    p.add_argument("--view", help="x0,y0,x1,y1 (default: the arrangement window)")
    p.add_argument("--scale", type=float, default=200.0, help="pixels per unit")
    p.add_argument("--min-radius", default="0")
    p.add_argument("--stroke-rule", choices=["constant", "proportional"], default="constant")
    p.add_argument("--stroke-width", type=float, default=0.5)
    p.add_argument("--stroke-cap", type=float, default=2.0)
    p.add_argument("--palette", choices=sorted(PALETTES), default="mono")
    p.add_argument("--out", help="output SVG (default stdout)")

    p = sub.add_parser("classgroup", parents=[common], help="class group structure")
    _add_field(p, d=False)
    p.add_argument("--out")

    p = sub.add_parser("families", parents=[common], help="families of circles through a point")
    _add_field(p)
    p.add_argument("--alpha", help="u,v,q for (u + v*omega)/q")
    p.add_argument("--cmax", type=int)
    p.add_argument("--out")

    p = sub.add_parser("cover", parents=[common], help="disc-cover certificate for ideals")
    _add_field(p)
    p.add_argument("--ideal", help="a,b,c; default: every integral ideal of norm D")
    p.add_argument("--max-depth", type=int, default=12)
    p.add_argument("--out")

    p = sub.add_parser("pack", parents=[common], help="immediate tangency packing")
    _add_gen(p)
    p.add_argument("--seed-key", help="c,b,u,v of the seed; default is the core circle of least positive c, ties by key")
    p.add_argument("--coset-ideal", help="a,b,c: keep members with a in a0 + ideal")
    p.add_argument("--a0", default="0,0", help="u,v of the coset offset")
    p.add_argument("--b-mod", type=int, default=1)
    p.add_argument("--b0", type=int, default=0)
    p.add_argument("--c-mod", type=int, default=1)
    p.add_argument("--c0", type=int, default=0)
    p.add_argument("--out", help="packing JSONL")
    p.add_argument("--coset-out", help="write the filtered ambient arrangement as JSONL")
    p.add_argument("--report", help="verification report JSON")

    p = sub.add_parser("stats", parents=[common], help="curvature census (packing) or pairing census (arrangement)")
    p.add_argument("--in", dest="input")
    p.add_argument("--moduli", default="2,3,4,5,6,8,12")
    p.add_argument("--bound", type=int)
    p.add_argument("--out", help="CSV output (default stdout)")

    p = sub.add_parser("chains", parents=[common], help="curvature-halving chain search")
    _add_gen(p)
    p.add_argument("--nmax", type=int, default=8)
    p.add_argument("--rational-only", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("dichotomy", parents=[common], help="rational or irrational side")
    _add_field(p)
    p.add_argument("--out")
    return top


def _join_negative(argv: list[str]) -> list[str]:
    """Attach values such as -1,0,2,1.5 to their flag so argparse keeps them."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok.startswith("--") and "=" not in tok and nxt and len(nxt) > 1 and nxt[0] == "-" and (nxt[1].isdigit() or nxt[1] == "."):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    first = parser.parse_args(argv)
    if not first.config:
        return first
    try:
        conf = json.loads(Path(first.config).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {first.config}: {e}") from None
    if not isinstance(conf, dict):
        raise UsageError("config must be a JSON object")
    sub = parser._subparsers._group_actions[0].choices.get(first.cmd) if first.cmd else None
    target = sub or parser
    dests = {a.dest for a in target._actions}
    defaults = {}
    for k, v in conf.items():
        dest = "input" if k == "in" else k.replace("-", "_")
        if dest not in dests:
            raise UsageError(f"unknown config key {k!r}")
        defaults[dest] = v
    target.set_defaults(**defaults)
    return parser.parse_args(argv)


# ---------------------------------------------------------------------------
# helpers


def _need(args, *names):
    for n in names:
        if getattr(args, n, None) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required")


def _ctx(args) -> FieldCtx:
    _need(args, "field")
    return FieldCtx(args.field)


def _spec(args) -> ArrangementSpec:
    _need(args, "field", "d", "window")
    ctx = _ctx(args)
    if args.cmax is not None and args.max_curv is not None:
        raise UsageError("give only one of --cmax and --max-curv")
    if args.max_curv is not None:
        try:
            bound = Fraction(str(args.max_curv))
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"bad --max-curv {args.max_curv!r}") from None
        if bound <= 0:
            raise UsageError("--max-curv must be positive")
        cmax = cmax_from_curvature(bound, args.d, ctx.abs_delta)
        log.warning("max-curv %s -> cMax %d (ceiling of %s * sqrt(%d/%d))", bound, cmax, bound, args.d, ctx.abs_delta)
    else:
        _need(args, "cmax")
        cmax = args.cmax
    return ArrangementSpec(ctx, args.d, Window.parse(str(args.window)), cmax)


def _arrangement(args) -> Arrangement:
    if args.input:
        obj = _read(args.input)
        if not isinstance(obj, Arrangement):
            raise UsageError(f"{args.input} holds a packing, not an arrangement")
        return obj
    return enumerate_window(_spec(args))


def _read(path):
    try:
        with open(path) as f:
            return read_jsonl(f)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}") from None


class _Out:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        self.f = open(self.path, "w", newline="\n") if self.path else sys.stdout
        return self.f

    def __exit__(self, *exc):
        if self.path:
            self.f.close()


def _emit_json(obj, path):
    with _Out(path) as f:
        f.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _alpha_text(z) -> str:
    return f"{z.x} + {z.t}*sqrt({z.delta})"


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args):
    A = _arrangement(args)
    with _Out(args.out) as f:
        write_jsonl(A, f)
    log.info("%d circles", len(A))


def cmd_render(args):
    _need(args, "input")
    A = _read(args.input)
    view = args.view
    if view is None:
        spec = A.spec if isinstance(A, Arrangement) else None
        W = spec.window if spec is not None else getattr(A, "core", None)
        if W is None:
            raise UsageError("--view is required when the input has no window")
    else:
        W = Window.parse(view)
    hl = frozenset()
    if args.highlight:
        P = _read(args.highlight)
        members = P.members if isinstance(P, Packing) else P.circles
        hl = frozenset(C.key for C in members)
    style = RenderStyle(
        W,
        scale=args.scale,
        min_radius=Fraction(args.min_radius),
        stroke_rule=args.stroke_rule,
        stroke_width=args.stroke_width,
        stroke_cap=args.stroke_cap,
        highlight=hl,
        palette=args.palette,
    )
    svg = render_svg(A, style)
    with _Out(args.out) as f:
        f.write(svg)


def cmd_classgroup(args):
    ctx = _ctx(args)
    _emit_json({"delta": ctx.delta, **class_group(ctx).to_json()}, args.out)


def cmd_families(args):
    _need(args, "d", "alpha")
    ctx = _ctx(args)
    G = class_group(ctx)
    alpha = parse_alpha(ctx, args.alpha)
    log.warning("alpha = %s", _alpha_text(alpha))
    rep = families_at(G, alpha, args.d, args.cmax)
    out = rep.to_json()
    try:
        cong = family_curvature_congruence(rep)
        out["congruence"] = {"ok": cong.ok, "modulus": cong.modulus}
    except InsufficientData as e:
        out["congruence"] = {"ok": None, "reason": str(e)}
    out["consistent"] = rep.consistent()
    out["covered_classes"] = sorted(covered_classes(G, args.d))
    _emit_json(out, args.out)


def cmd_cover(args):
    ctx = _ctx(args)
    if args.ideal:
        ideals = [parse_ideal(ctx, args.ideal)]
    else:
        _need(args, "d")
        ideals = ideals_of_norm(ctx, args.d)
    reports = [disc_cover_check(ctx, I, max_depth=args.max_depth).to_json() for I in ideals]
    out = {"delta": ctx.delta, "reports": reports}
    if args.d is not None:
        G = class_group(ctx)
        evidence = {"all_covered": all(r["fully_covered"] for r in reports)}
        out["generation"] = generation_consistency(G, args.d, evidence).to_json()
    _emit_json(out, args.out)


def _seed(A: Arrangement, core, key_text):
    if key_text:
        key = tuple(_ints(key_text, 4, "seed-key"))
        for C in A.circles:
            if C.key == key:
                return C
        raise UsageError(f"no member with key {key}")
    # default: smallest positive c among circles inside the core, then key order
    cands = [C for C in A.circles if C.c > 0 and in_core(C, core)]
    if not cands:
        raise UsageError("no circle lies in the window core; give --seed-key")
    return min(cands, key=lambda C: C.key)


def cmd_pack(args):
    A = _arrangement(args)
    if args.coset_ideal:
        ctx = A.spec.ctx if A.spec else FieldCtx(A.circles[0].delta)
        cs = CosetSpec(
            parse_ideal(ctx, args.coset_ideal),
            tuple(_ints(args.a0, 2, "a0")),
            args.b_mod,
            args.b0,
            args.c_mod,
            args.c0,
        )
        A = coset_filter(A, cs)
        A.meta.setdefault("header_extra", {})["coset"] = A.meta["coset"]
        if args.coset_out:
            with _Out(args.coset_out) as f:
                write_jsonl(A, f)
    core = default_core(A)
    seed = _seed(A, core, args.seed_key)
    P = immediate_packing(A, seed, core=core)
    if A.spec is not None:
        P.meta["cMax"] = A.spec.cMax
    rep = verify_packing(P, A, core=core)
    with _Out(args.out) as f:
        write_jsonl(P, f)
    if args.report:
        _emit_json({"members": len(P), "seed": list(seed.key), **rep.to_json()}, args.report)
    log.info("%d members, verify %s", len(P), "ok" if rep.ok else "FAILED")


def cmd_stats(args):
    _need(args, "input")
    obj = _read(args.input)
    with _Out(args.out) as f:
        if isinstance(obj, Packing):
            moduli = [int(x) for x in args.moduli.split(",")]
            write_census_csv(curvature_census(obj, moduli, args.bound), f)
        else:
            f.write("n,count\n")
            for n, k in sorted(angle_census(obj).items()):
                f.write(f"{n},{k}\n")


def cmd_chains(args):
    A = _arrangement(args)
    rep = chain_search(A, args.nmax, rational_only=args.rational_only)
    _emit_json(rep.to_json(), args.out)


def cmd_dichotomy(args):
    _need(args, "d")
    ctx = _ctx(args)
    label, h = dichotomy(ctx, args.d)
    seed = seed_exists(ctx, args.d)
    out = {"delta": ctx.delta, "D": args.d, "side": label, "hilbert": h, "seed": seed.to_json()}
    try:
        out["ghost_D"] = ghost_d(ctx)
    except SchmidtError:
        out["ghost_D"] = None
    _emit_json(out, args.out)


COMMANDS = {
    "gen": cmd_gen,
    "render": cmd_render,
    "classgroup": cmd_classgroup,
    "families": cmd_families,
    "cover": cmd_cover,
    "pack": cmd_pack,
    "stats": cmd_stats,
    "chains": cmd_chains,
    "dichotomy": cmd_dichotomy,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.WARNING, format="schmidt: %(message)s", stream=sys.stderr)
    try:
        args = _apply_config(build_parser(), _join_negative(argv))
        if args.verbose:
            log.setLevel(logging.INFO)
        if not args.cmd:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        COMMANDS[args.cmd](args)
    except ValidationError as e:
        print(f"schmidt: error: {e}", file=sys.stderr)
        return 2
    except SchmidtError as e:
        print(f"schmidt: failed: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 = the property holds / the computation succeeded,
1 = the property fails (a witness is printed), 2 = usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import fileio, formulas, urysohn
from .cuts import (
    find_qe_witness,
    format_value,
    is_triangle,
    parse_value,
    star_add,
    star_diff,
    triangle_interval,
)
from .errors import (
    AmalgamationFailure,
    CarrierViolation,
    FormulaSyntaxError,
    PreconditionError,
    UnsupportedOperation,
)
from .monoid import (
    builtin,
    builtin_names,
    check_associativity,
    check_magma_axioms,
    check_sum_complete,
    classify_monoid,
    is_distance_monoid,
)
from .spaces import (
    disjoint_amalgam,
    four_values_check,
    four_values_search,
    approximately_metric_check,
    validate_metric,
)


class _Exit2(Exception):
    pass


def _load_spec(args):
    if getattr(args, "builtin", None):
        try:
            return builtin(args.builtin)
        except CarrierViolation as exc:
            raise _Exit2(str(exc))
    if getattr(args, "monoid", None):
        return fileio.load_monoid(args.monoid)
    raise _Exit2("pass --builtin NAME or --monoid FILE")


class Report:
    """Collects text lines plus a JSON payload; emitted per --format."""

    def __init__(self, command: str):
        self.command = command
        self.lines = []
        self.payload = {"command": command}

    def line(self, text: str):
        self.lines.append(text)

    def set(self, **kv):
        self.payload.update(kv)

    def emit(self, fmt: str, exit_code: int):
        self.payload["exit_code"] = exit_code
        if fmt == "json":
            print(json.dumps(self.payload, indent=2, sort_keys=True))
        else:
            for line in self.lines:
                print(line)
        return exit_code


def _cmd_check_monoid(args, rep: Report) -> int:
    spec = _load_spec(args)
    ok = True
    magma = check_magma_axioms(spec, seed=args.seed)
    rep.set(magma_axioms={k: [str(t) for t in v] for k, v in magma.violations.items()})
    for line in magma.lines():
        rep.line(f"magma {line}")
    ok &= magma.passed
    if not spec.is_finite_kind():
        sc = check_sum_complete(spec.carrier)
        rep.set(sum_complete=sc.passed, sum_complete_witness=_s(sc.witness))
        rep.line(f"sum-complete: {'pass' if sc.passed else f'FAIL witness {sc.witness}'}")
        if not sc.passed:
            rep.line("associativity: skipped (operation not total)")
            rep.set(associative=None)
            return 1
    assoc = check_associativity(spec, seed=args.seed)
    rep.set(associative=assoc.passed, associativity_witness=_s(assoc.witness),
            exhaustive=assoc.exhaustive)
    rep.line(
        "associativity: "
        + ("pass" if assoc.passed else f"FAIL witness {assoc.witness}")
        + ("" if assoc.exhaustive else " (critical points + sampling)")
    )
    ok &= assoc.passed
    if ok:
        flags = classify_monoid(spec)
        rep.set(right_closed=flags.right_closed, ultrametric=flags.ultrametric,
                group_like=flags.group_like)
        rep.line(
            f"classification: right_closed={flags.right_closed} "
            f"ultrametric={flags.ultrametric} group_like={flags.group_like}"
        )
    return 0 if ok else 1


def _s(x) -> Optional[str]:
    if x is None:
        return None
    if isinstance(x, tuple):
        return "(" + ", ".join(str(v) for v in x) + ")"
    return str(x)


def _cmd_value_op(args, rep: Report) -> int:
    spec = _load_spec(args)
    a = parse_value(spec, args.values[0])
    b = parse_value(spec, args.values[1])
    if args.op == "star-add":
        out = format_value(spec, star_add(spec, a, b))
        rep.line(out)
        rep.set(result=out)
    elif args.op == "star-diff":
        out = format_value(spec, star_diff(spec, a, b))
        rep.line(out)
        rep.set(result=out)
    else:  # triangle
        if len(args.values) == 3:
            c = parse_value(spec, args.values[2])
            ok = is_triangle(spec, a, b, c)
            rep.line("triangle" if ok else "not a triangle")
            rep.set(result=ok)
            return 0 if ok else 1
        lo, hi = triangle_interval(spec, a, b)
        out = f"[{format_value(spec, lo)}, {format_value(spec, hi)}]"
        rep.line(out)
        rep.set(result={"lo": format_value(spec, lo), "hi": format_value(spec, hi)})
    return 0


def _cmd_four_values(args, rep: Report) -> int:
    spec = _load_spec(args)
    if args.quad:
        u1, u2, v1, v2, s = args.quad
        t = four_values_check(spec, u1, u2, v1, v2, s)
        if t is None:
            rep.line("no linking value")
            rep.set(result=None)
            return 1
        rep.line(str(t))
        rep.set(result=str(t))
        return 0
    report = four_values_search(spec, seed=args.seed)
    rep.set(passed=report.passed, witness=_s(report.witness), decisive=report.decisive)
    if report.passed:
        rep.line("four-values: pass" + ("" if report.decisive else " (sampled, semi-decision)"))
        return 0
    rep.line(f"four-values: FAIL witness (u1,u2,v1,v2;s) = {_s(report.witness)}")
    return 1


def _cmd_amalgamate(args, rep: Report) -> int:
    spec = _load_spec(args)
    if not args.space or len(args.space) != 2:
        raise _Exit2("pass --space FILE twice (the two factors)")
    x1 = fileio.load_space(args.space[0], spec=spec)
    x2 = fileio.load_space(args.space[1], spec=spec)
    try:
        out = disjoint_amalgam(spec, x1, x2)
    except AmalgamationFailure as exc:
        rep.line(f"amalgamation failure: quadruple {exc.quadruple}")
        rep.set(failure=str(exc.quadruple))
        return 1
    rep.set(space=fileio.space_to_dict(out, include_monoid=False))
    for line in _space_lines(out):
        rep.line(line)
    return 0


def _space_lines(space):
    out = []
    for i, a in enumerate(space.points):
        for b in space.points[i + 1 :]:
            out.append(f"d({a},{b}) = {format_value(space.monoid, space.d(a, b))}")
    return out


def _cmd_approx_check(args, rep: Report) -> int:
    spec = _load_spec(args)
    if not args.space:
        raise _Exit2("pass --space FILE")
    space = fileio.load_space(args.space[0], spec=spec)
    if not args.approx:
        raise _Exit2("pass --approx FILE")
    phi = fileio.approximation_from_dict(spec, fileio.load_json(args.approx))
    res = approximately_metric_check(spec, space, phi)
    if res.feasible:
        rep.line("realizable")
        for line in _space_lines(res.space):
            rep.line(line)
        rep.set(feasible=True, space=fileio.space_to_dict(res.space, include_monoid=False))
        return 0
    rep.line("infeasible")
    rep.set(feasible=False)
    return 1


def _cmd_grow(args, rep: Report) -> int:
    spec = _load_spec(args)
    result = urysohn.grow_generic(
        spec,
        args.size,
        seed=args.seed,
        max_base=args.max_base,
        denominator=args.denominator,
    )
    ok = validate_metric(result.space).passed
    rep.set(
        space=fileio.space_to_dict(result.space, include_monoid=False),
        realized=len(result.realized),
        pending=len(result.pending),
        valid=ok,
    )
    rep.line(
        f"grew {result.space.size()} points; realized {len(result.realized)} obligations, "
        f"{len(result.pending)} pending; metric: {'valid' if ok else 'INVALID'}"
    )
    for line in _space_lines(result.space):
        rep.line(line)
    return 0 if ok else 1


def _cmd_check_extension(args, rep: Report) -> int:
    spec = _load_spec(args)
    if not args.space:
        raise _Exit2("pass --space FILE")
    space = fileio.load_space(args.space[0], spec=spec)
    if not args.scheme:
        raise _Exit2("pass --scheme FILE")
    obj = fileio.load_json(args.scheme)
    base = fileio.space_from_dict(obj.get("base"), path="scheme.base", spec=spec)
    kat = {p: parse_value(spec, str(v)) for p, v in obj.get("katetov", {}).items()}
    from .spaces import katetov_map

    kmap = katetov_map(base, kat)
    if "approx" in obj:
        approx = fileio.approximation_from_dict(spec, obj["approx"], path="scheme.approx")
        scheme = urysohn.ExtensionScheme(base, kmap, approx)
    else:
        scheme = urysohn.canonical_scheme(spec, base, kmap)
    cex = urysohn.check_extension_axiom(space, scheme)
    if cex is None:
        rep.line("holds")
        rep.set(holds=True)
        return 0
    rep.line(f"counterexample tuple: {cex}")
    rep.set(holds=False, counterexample=list(cex))
    return 1


def _cmd_check_qe(args, rep: Report) -> int:
    spec = _load_spec(args)
    decision = urysohn.qe_decision(spec)
    rep.set(answer=decision.answer, reason=decision.reason)
    if decision.answer == "yes":
        rep.line(f"quantifier elimination: yes ({decision.reason})")
        return 0
    if decision.answer == "no":
        w = decision.witness
        text = (
            f"alpha={format_value(spec, w.alpha)} s={w.s} "
            f"lhs={format_value(spec, w.lhs)} rhs={format_value(spec, w.rhs)}"
        )
        rep.line(f"quantifier elimination: no, witness {text}")
        rep.set(witness=text)
        return 1
    rep.line("quantifier elimination: unknown")
    return 1


def _cmd_gen_axioms(args, rep: Report) -> int:
    spec = _load_spec(args)
    axioms = urysohn.generate_axioms(
        spec, size_bound=args.size, denominator=args.denominator
    )
    texts = [formulas.format_formula(spec, a) for a in axioms]
    for t in texts:
        rep.line(t)
    rep.set(axioms=texts, count=len(texts))
    return 0


def _cmd_eval_formula(args, rep: Report) -> int:
    spec = _load_spec(args)
    if not args.space:
        raise _Exit2("pass --space FILE")
    space = fileio.load_space(args.space[0], spec=spec)
    f = formulas.parse_formula(spec, args.formula)
    assignment = {}
    for item in args.assign or []:
        if "=" not in item:
            raise _Exit2(f"bad assignment {item!r}; use var=point")
        var, pt = item.split("=", 1)
        assignment[var.strip()] = pt.strip()
    value = formulas.eval_formula(space, f, assignment)
    rep.line("true" if value else "false")
    rep.set(result=value)
    return 0 if value else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="distmono",
        description="Exact computation with distance monoids, cut completions, "
        "generalized metric spaces, and generic spaces",
    )
    p.add_argument("--format", choices=("text", "json"), default="text")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, space=False):
        sp.add_argument("--builtin", help="catalog name, e.g. " + ", ".join(builtin_names()[:6]))
        sp.add_argument("--monoid", help="monoid JSON file")
        sp.add_argument("--seed", type=int, default=0)
        if space:
            sp.add_argument("--space", action="append", help="space JSON file")

    sp = sub.add_parser("check-monoid", help="axioms, sum-completeness, classification")
    common(sp)

    for op in ("star-add", "star-diff"):
        sp = sub.add_parser(op, help=f"{op.replace('-', ' ')} of two extended values")
        common(sp)
        sp.add_argument("values", nargs=2)
        sp.set_defaults(op=op)

    sp = sub.add_parser("triangle", help="triangle interval of two values, or test three")
    common(sp)
    sp.add_argument("values", nargs="+")
    sp.set_defaults(op="triangle")

    sp = sub.add_parser("four-values", help="search the four-values condition")
    common(sp)
    sp.add_argument("--quad", nargs=5, metavar=("U1", "U2", "V1", "V2", "S"))

    sp = sub.add_parser("amalgamate", help="disjoint amalgam of two spaces")
    common(sp, space=True)

    sp = sub.add_parser("approx-check", help="realizability of an approximation")
    common(sp, space=True)
    sp.add_argument("--approx", help="approximation JSON file")

    sp = sub.add_parser("grow", help="grow a finite piece of the generic space")
    common(sp)
    sp.add_argument("--size", type=int, required=True)
    sp.add_argument("--max-base", type=int, default=3, dest="max_base")
    sp.add_argument("--denominator", type=int)

    sp = sub.add_parser("check-extension", help="model-check an extension axiom")
    common(sp, space=True)
    sp.add_argument("--scheme", help="scheme JSON file")

    sp = sub.add_parser("check-qe", help="decide quantifier elimination")
    common(sp)

    sp = sub.add_parser("gen-axioms", help="emit axiom instances")
    common(sp)
    sp.add_argument("--size", type=int, default=2)
    sp.add_argument("--denominator", type=int)

    sp = sub.add_parser("eval-formula", help="evaluate a formula on a space")
    common(sp, space=True)
    sp.add_argument("formula")
    sp.add_argument("--assign", action="append", metavar="VAR=POINT")

    return p


_HANDLERS = {
    "check-monoid": _cmd_check_monoid,
    "star-add": _cmd_value_op,
    "star-diff": _cmd_value_op,
    "triangle": _cmd_value_op,
    "four-values": _cmd_four_values,
    "amalgamate": _cmd_amalgamate,
    "approx-check": _cmd_approx_check,
    "grow": _cmd_grow,
    "check-extension": _cmd_check_extension,
    "check-qe": _cmd_check_qe,
    "gen-axioms": _cmd_gen_axioms,
    "eval-formula": _cmd_eval_formula,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    rep = Report(args.command)
    try:
        code = _HANDLERS[args.command](args, rep)
    except (_Exit2, CarrierViolation, PreconditionError, UnsupportedOperation,
            FormulaSyntaxError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return rep.emit(args.format, code)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

"""First-order formulas over distance atoms: AST, parser, and evaluator.

Grammar (tightest first):

    atom   := 'd' '(' VAR ',' VAR ')' ('<=' | '>') ELEMENT
            | 'd' '(' VAR ',' VAR ')' 'in' '(' ELEMENT ',' (ELEMENT | 'omega') ']'
            | VAR '=' VAR
            | '(' formula ')'
    neg    := '!' neg | atom
    conj   := neg ('&' neg)*
    disj   := conj ('|' conj)*
    impl   := disj ('->' impl)?
    formula:= ('forall' | 'exists') VAR '.' formula | impl

`d(x,y) > s` is sugar for the negated atom and prints back the same way.
Elements are rationals for interval carriers and labels for finite ones.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .carrier import as_fraction
from .cuts import compare_cuts, embed, omega_value, value_le, zero_value
from .errors import CarrierViolation, FormulaSyntaxError, PreconditionError
from .monoid import DistanceMonoidSpec, ambient_add
from .spaces import ApproxInterval, FiniteMetricSpace, interval_contains


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Le(Formula):
    x: str
    y: str
    bound: object  # carrier element


@dataclass(frozen=True)
class InInterval(Formula):
    x: str
    y: str
    iv: ApproxInterval


@dataclass(frozen=True)
class Eq(Formula):
    x: str
    y: str


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


def conjunction(parts: List[Formula]) -> Optional[Formula]:
    out = None
    for p in parts:
        out = p if out is None else And(out, p)
    return out


def free_variables(f: Formula) -> set:
    if isinstance(f, (Le, InInterval, Eq)):
        return {f.x, f.y}
    if isinstance(f, Not):
        return free_variables(f.body)
    if isinstance(f, (And, Or, Implies)):
        return free_variables(f.left) | free_variables(f.right)
    if isinstance(f, (Forall, Exists)):
        return free_variables(f.body) - {f.var}
    raise PreconditionError(f"unknown formula node {f!r}")


# -- lexer / parser -----------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<le><=)|(?P<gt>>)|(?P<sym>[()\[\],.=!&|])"
    r"|(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*))"
)

_KEYWORDS = {"forall", "exists", "d", "in", "omega"}


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise FormulaSyntaxError(f"unexpected character {stripped[0]!r}", pos)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, spec: DistanceMonoidSpec, text: str):
        self.spec = spec
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            raise FormulaSyntaxError(
                f"expected {value or kind!r}, found {tok[1] or 'end of input'!r}", tok[2]
            )
        return tok

    def element(self):
        tok = self.next()
        if tok[0] not in ("num", "name"):
            raise FormulaSyntaxError("expected a carrier element", tok[2])
        try:
            return self.spec.coerce(tok[1])
        except CarrierViolation as exc:
            raise FormulaSyntaxError(str(exc), tok[2]) from None

    def variable(self):
        tok = self.next()
        if tok[0] != "name" or tok[1] in _KEYWORDS:
            raise FormulaSyntaxError("expected a variable name", tok[2])
        return tok[1]

    def formula(self) -> Formula:
        kind, val, _ = self.peek()
        if kind == "name" and val in ("forall", "exists"):
            self.next()
            var = self.variable()
            self.expect("sym", ".")
            body = self.formula()
            return Forall(var, body) if val == "forall" else Exists(var, body)
        return self.implication()

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek()[0] == "arrow":
            self.next()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        out = self.conjunction()
        while self.peek()[:2] == ("sym", "|"):
            self.next()
            out = Or(out, self.conjunction())
        return out

    def conjunction(self) -> Formula:
        out = self.negation()
        while self.peek()[:2] == ("sym", "&"):
            self.next()
            out = And(out, self.negation())
        return out

    def negation(self) -> Formula:
        if self.peek()[:2] == ("sym", "!"):
            self.next()
            return Not(self.negation())
        return self.atom()

    def atom(self) -> Formula:
        kind, val, pos = self.peek()
        if kind == "sym" and val == "(":
            self.next()
            f = self.formula()
            self.expect("sym", ")")
            return f
        if kind == "name" and val == "d":
            self.next()
            self.expect("sym", "(")
            x = self.variable()
            self.expect("sym", ",")
            y = self.variable()
            self.expect("sym", ")")
            op = self.next()
            if op[0] == "le":
                return Le(x, y, self.element())
            if op[0] == "gt":
                return Not(Le(x, y, self.element()))
            if op[:2] == ("name", "in"):
                self.expect("sym", "(")
                lo = self.element()
                self.expect("sym", ",")
                if self.peek()[:2] == ("name", "omega"):
                    self.next()
                    hi_v = omega_value(self.spec)
                else:
                    hi_v = embed(self.spec, self.element())
                self.expect("sym", "]")
                lo_v = embed(self.spec, lo)
                if compare_cuts(self.spec, lo_v, hi_v) >= 0:
                    raise FormulaSyntaxError("empty interval", pos)
                return InInterval(x, y, ApproxInterval(False, lo_v, hi_v))
            raise FormulaSyntaxError("expected <=, > or in after d(x,y)", op[2])
        if kind == "name" and val not in _KEYWORDS:
            x = self.variable()
            self.expect("sym", "=")
            return Eq(x, self.variable())
        raise FormulaSyntaxError("expected a formula", pos)


def parse_formula(spec: DistanceMonoidSpec, text: str) -> Formula:
    p = _Parser(spec, text)
    f = p.formula()
    tok = p.peek()
    if tok[0] != "end":
        raise FormulaSyntaxError(f"trailing input {tok[1]!r}", tok[2])
    return f


# -- printing -----------------------------------------------------------------

_LVL_TOP, _LVL_IMP, _LVL_OR, _LVL_AND, _LVL_NEG = range(5)


def _element_str(spec, e) -> str:
    return e if spec.is_finite_kind() else str(e)


def _endpoint_str(spec, ev) -> str:
    if ev.point is None:
        return "omega"
    if spec.is_finite_kind():
        return spec.elements[ev.point]
    return str(ev.point)


def _fmt(spec, f: Formula, level: int) -> str:
    if isinstance(f, Le):
        return f"d({f.x},{f.y}) <= {_element_str(spec, f.bound)}"
    if isinstance(f, Not) and isinstance(f.body, Le):
        b = f.body
        return f"d({b.x},{b.y}) > {_element_str(spec, b.bound)}"
    if isinstance(f, InInterval):
        return f"d({f.x},{f.y}) in ({_endpoint_str(spec, f.iv.lo)}, {_endpoint_str(spec, f.iv.hi)}]"
    if isinstance(f, Eq):
        return f"{f.x} = {f.y}"
    if isinstance(f, Not):
        return f"!{_fmt(spec, f.body, _LVL_NEG)}"
    if isinstance(f, And):
        s = f"{_fmt(spec, f.left, _LVL_AND)} & {_fmt(spec, f.right, _LVL_NEG)}"
        return f"({s})" if level > _LVL_AND else s
    if isinstance(f, Or):
        s = f"{_fmt(spec, f.left, _LVL_OR)} | {_fmt(spec, f.right, _LVL_AND)}"
        return f"({s})" if level > _LVL_OR else s
    if isinstance(f, Implies):
        s = f"{_fmt(spec, f.left, _LVL_OR)} -> {_fmt(spec, f.right, _LVL_IMP)}"
        return f"({s})" if level > _LVL_IMP else s
    if isinstance(f, (Forall, Exists)):
        word = "forall" if isinstance(f, Forall) else "exists"
        s = f"{word} {f.var}. {_fmt(spec, f.body, _LVL_TOP)}"
        return f"({s})" if level > _LVL_TOP else s
    raise PreconditionError(f"unknown formula node {f!r}")


def format_formula(spec: DistanceMonoidSpec, f: Formula) -> str:
    return _fmt(spec, f, _LVL_TOP)


# -- evaluation ---------------------------------------------------------------


def eval_formula(space: FiniteMetricSpace, f: Formula, assignment: Optional[Dict[str, str]] = None) -> bool:
    """Satisfaction over a finite colored space; quantifiers range over points."""
    spec = space.monoid
    env = dict(assignment or {})
    missing = free_variables(f) - set(env)
    if missing:
        raise PreconditionError(f"unbound variables: {sorted(missing)}")

    def ev(g: Formula, env) -> bool:
        if isinstance(g, Le):
            return value_le(spec, space.d(env[g.x], env[g.y]), embed(spec, g.bound))
        if isinstance(g, InInterval):
            return interval_contains(spec, g.iv, space.d(env[g.x], env[g.y]))
        if isinstance(g, Eq):
            return env[g.x] == env[g.y]
        if isinstance(g, Not):
            return not ev(g.body, env)
        if isinstance(g, And):
            return ev(g.left, env) and ev(g.right, env)
        if isinstance(g, Or):
            return ev(g.left, env) or ev(g.right, env)
        if isinstance(g, Implies):
            return (not ev(g.left, env)) or ev(g.right, env)
        if isinstance(g, Forall):
            return all(ev(g.body, {**env, g.var: p}) for p in space.points)
        if isinstance(g, Exists):
            return any(ev(g.body, {**env, g.var: p}) for p in space.points)
        raise PreconditionError(f"unknown formula node {g!r}")

    return ev(f, env)


# -- axiom schemes ------------------------------------------------------------


def _iff(a: Formula, b: Formula) -> Formula:
    return And(Implies(a, b), Implies(b, a))


def instantiate_ms_axioms(spec: DistanceMonoidSpec, fragment: Optional[List] = None) -> List[Formula]:
    """All axiom-scheme instances over a finite fragment of the carrier.

    The third scheme pairs (r, s) with the largest fragment element below
    the true sum, so its side condition holds relative to the fragment;
    the bounding axiom is emitted only when the fragment contains the
    carrier's maximum.
    """
    frag = _fragment_elements(spec, fragment)
    zero = frag[0]
    out: List[Formula] = [
        Forall("x", Forall("y", _iff(Le("x", "y", zero), Eq("x", "y"))))
    ]
    for s in frag[1:]:
        out.append(
            Forall("x", Forall("y", _iff(Le("x", "y", s), Le("y", "x", s))))
        )
    for r in frag[1:]:
        for s in frag[1:]:
            t = _largest_below_sum(spec, frag, r, s)
            out.append(
                Forall(
                    "x",
                    Forall(
                        "y",
                        Forall(
                            "z",
                            Implies(
                                And(Le("x", "y", r), Le("y", "z", s)),
                                Le("x", "z", t),
                            ),
                        ),
                    ),
                )
            )
    top = frag[-1]
    if _is_carrier_max(spec, top):
        out.append(Forall("x", Forall("y", Le("x", "y", top))))
    return out


def _fragment_elements(spec, fragment) -> List:
    if fragment is None:
        frag = spec.all_elements()
    else:
        frag = [spec.coerce(e) for e in fragment]
    if not frag:
        raise PreconditionError("fragment must be nonempty")
    if spec.is_finite_kind():
        frag = sorted(set(frag), key=spec.index_of)
    else:
        frag = sorted(set(frag))
    if frag[0] != spec.zero():
        frag = [spec.zero()] + frag
    return frag


def _largest_below_sum(spec, frag, r, s):
    total = ambient_add(spec, r, s)
    best = frag[0]
    for x in frag:
        if spec.le(x, total) and spec.le(best, x):
            best = x
    return best


def _is_carrier_max(spec, e) -> bool:
    if spec.is_finite_kind():
        return spec.index_of(e) == len(spec.elements) - 1
    m = spec.carrier.max_element()
    return m is not None and e == m


def type_formulas(spec: DistanceMonoidSpec, alpha, fragment: List) -> List[Formula]:
    """The fragment restriction of the 2-type determined by a cut.

    Bounded atoms for fragment elements at or above alpha, strict atoms
    for those below.
    """
    frag = _fragment_elements(spec, fragment)
    out: List[Formula] = []
    for s in frag:
        if value_le(spec, alpha, embed(spec, s)):
            out.append(Le("x", "y", s))
        else:
            out.append(Not(Le("x", "y", s)))
    return out

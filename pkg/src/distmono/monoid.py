"""Distance magmas and monoids: finite operation tables and interval carriers.

Three families are supported:

* ``finite`` -- an explicit commutative operation table over labeled
  elements ordered by list position;
* ``interval-truncated-add`` -- a rational interval-union carrier S inside
  (Q>=0, +), with r (+) s = max{x in S : x <= r + s};
* ``interval-max`` -- the same carriers inside (Q>=0, max).
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .carrier import IntervalUnionCarrier, as_fraction, from_points
from .errors import CarrierViolation, PreconditionError, UnsupportedOperation

KIND_FINITE = "finite"
KIND_ADD = "interval-truncated-add"
KIND_MAX = "interval-max"

Element = Union[str, Fraction]


@dataclass(frozen=True)
class DistanceMonoidSpec:
    kind: str
    elements: Optional[Tuple[str, ...]] = None
    table: Optional[Tuple[Tuple[int, ...], ...]] = None
    carrier: Optional[IntervalUnionCarrier] = None

    def __post_init__(self):
        if self.kind == KIND_FINITE:
            if not self.elements or self.table is None:
                raise CarrierViolation("finite spec needs elements and table")
            n = len(self.elements)
            if len(set(self.elements)) != n:
                raise CarrierViolation("element labels must be distinct")
            if len(self.table) != n or any(len(row) != n for row in self.table):
                raise CarrierViolation("operation table must be square")
            for row in self.table:
                for v in row:
                    if not (0 <= v < n):
                        raise CarrierViolation("table entry out of range")
        elif self.kind in (KIND_ADD, KIND_MAX):
            if self.carrier is None:
                raise CarrierViolation("interval spec needs a carrier")
        else:
            raise CarrierViolation(f"unknown kind {self.kind!r}")

    # -- element handling ------------------------------------------------------

    def is_finite_kind(self) -> bool:
        return self.kind == KIND_FINITE

    def index_of(self, label: str) -> int:
        try:
            return self.elements.index(label)
        except ValueError:
            raise CarrierViolation(f"unknown element {label!r}") from None

    def coerce(self, x) -> Element:
        """Validate an element: a label for finite kind, a rational otherwise."""
        if self.is_finite_kind():
            label = str(x)
            self.index_of(label)
            return label
        return self.carrier.require_member(as_fraction(x))

    def all_elements(self) -> List[Element]:
        if self.is_finite_kind():
            return list(self.elements)
        return self.carrier.members()

    def zero(self) -> Element:
        return self.elements[0] if self.is_finite_kind() else Fraction(0)

    def le(self, r: Element, s: Element) -> bool:
        if self.is_finite_kind():
            return self.index_of(r) <= self.index_of(s)
        return as_fraction(r) <= as_fraction(s)


def op_add(spec: DistanceMonoidSpec, r, s) -> Element:
    """The monoid sum; truncated addition can fail on incomplete carriers."""
    r = spec.coerce(r)
    s = spec.coerce(s)
    if spec.is_finite_kind():
        return spec.elements[spec.table[spec.index_of(r)][spec.index_of(s)]]
    if spec.kind == KIND_MAX:
        return max(r, s)
    tag, m = spec.carrier.max_le(r + s)
    if tag != "max":
        raise UnsupportedOperation(
            f"truncated sum of {r} and {s} has no maximum in the carrier",
            witness=(r, s),
        )
    return m


def ambient_add(spec: DistanceMonoidSpec, r: Element, s: Element):
    """Sum in the ambient structure: table for finite kind, + or max otherwise."""
    if spec.is_finite_kind():
        return op_add(spec, r, s)
    return max(r, s) if spec.kind == KIND_MAX else r + s


def ambient_triangle(spec: DistanceMonoidSpec, r, s, t) -> bool:
    """Whether (r, s, t) is a triangle in the ambient structure."""
    return (
        spec.le(r, ambient_add(spec, s, t))
        and spec.le(s, ambient_add(spec, r, t))
        and spec.le(t, ambient_add(spec, r, s))
    )


# -- axiom checking ------------------------------------------------------------


@dataclass
class AxiomReport:
    kind: str
    violations: dict = field(default_factory=dict)
    note: str = ""
    sampled: int = 0

    @property
    def passed(self) -> bool:
        return all(not v for v in self.violations.values())

    def lines(self) -> List[str]:
        out = []
        for axiom, bad in sorted(self.violations.items()):
            status = "pass" if not bad else f"FAIL {bad[:3]}"
            out.append(f"{axiom}: {status}")
        if self.note:
            out.append(self.note)
        return out


def check_magma_axioms(spec: DistanceMonoidSpec, seed: int = 0, samples: int = 200) -> AxiomReport:
    """Verify totality, positivity, order, commutativity and unity.

    Finite tables are checked exhaustively and every violating tuple is
    reported.  Interval kinds hold by construction; a seeded random sample
    backs that claim and the report says so.
    """
    report = AxiomReport(kind=spec.kind)
    v = report.violations
    for name in ("totality", "positivity", "order", "commutativity", "unity"):
        v[name] = []
    if spec.is_finite_kind():
        els = spec.elements
        n = len(els)
        t = spec.table
        for i in range(n):
            if t[0][i] != i or t[i][0] != i:
                v["unity"].append((els[0], els[i]))
            for j in range(n):
                if t[i][j] != t[j][i]:
                    v["commutativity"].append((els[i], els[j]))
                if t[i][j] < max(i, j):
                    v["positivity"].append((els[i], els[j]))
        for i in range(n):
            for j in range(n):
                for k in range(i, n):
                    for l in range(j, n):
                        if t[i][j] > t[k][l]:
                            v["order"].append((els[i], els[j], els[k], els[l]))
        return report
    rng = random.Random(seed)
    pool = sorted(set(spec.carrier.sample_members(rng, samples)))
    checked = 0
    for r in pool:
        for s in pool[: 12]:
            try:
                rs = op_add(spec, r, s)
            except UnsupportedOperation:
                v["totality"].append((r, s))
                continue
            checked += 1
            if rs < max(r, s):
                v["positivity"].append((r, s))
            if op_add(spec, s, r) != rs:
                v["commutativity"].append((r, s))
        if op_add(spec, r, Fraction(0)) != r:
            v["unity"].append((r,))
    for r, s, t2, u in zip(pool, pool[1:], pool[2:], pool[3:]):
        try:
            if spec.le(r, t2) and spec.le(s, u) and not spec.le(op_add(spec, r, s), op_add(spec, t2, u)):
                v["order"].append((r, s, t2, u))
        except UnsupportedOperation:
            pass
    report.sampled = checked
    report.note = (
        "interval operation satisfies the magma axioms by construction; "
        f"{checked} sampled pairs re-checked"
    )
    return report


@dataclass
class AssociativityReport:
    passed: bool
    witness: Optional[tuple] = None
    exhaustive: bool = False

    def __bool__(self):
        return self.passed


def _critical_elements(spec: DistanceMonoidSpec, rng: random.Random, extra: int = 0) -> List[Fraction]:
    car = spec.carrier
    base = set()
    for q in car.boundary_points():
        for cand in (q, q + (car.lattice or 0), q - (car.lattice or 0)):
            if car.member(cand):
                base.add(cand)
        tag, m = car.max_le(q)
        if tag == "max":
            base.add(m)
        tag, m = car.min_ge(q)
        if tag == "min":
            base.add(m)
    mids = []
    for c in car.components:
        if c.hi is not None and c.lo < c.hi:
            mid = (c.lo + c.hi) / 2
            if car.member(mid):
                mids.append(mid)
        elif c.hi is None:
            for cand in (c.lo + 1, c.lo + Fraction(3, 2), 2 * c.lo + 1):
                if car.member(cand):
                    mids.append(cand)
    base.update(mids)
    for a in list(base):
        for b in list(base):
            for cand in (a + b, abs(a - b)):
                tag, m = car.max_le(cand)
                if tag == "max":
                    base.add(m)
    if extra:
        base.update(car.sample_members(rng, extra))
    return sorted(base)[:16]


@lru_cache(maxsize=256)
def check_associativity(spec: DistanceMonoidSpec, seed: int = 0, samples: int = 200) -> AssociativityReport:
    """Search for an associativity failure of the carrier operation.

    Exhaustive on finite tables and finite carriers; on infinite interval
    carriers the check runs over the critical endpoint-derived triples plus
    a seeded random sample.
    """
    if spec.is_finite_kind():
        els = spec.elements
        for r in els:
            for s in els:
                for t in els:
                    if op_add(spec, op_add(spec, r, s), t) != op_add(spec, r, op_add(spec, s, t)):
                        return AssociativityReport(False, (r, s, t), exhaustive=True)
        return AssociativityReport(True, exhaustive=True)
    if spec.kind == KIND_MAX:
        return AssociativityReport(True, exhaustive=True)
    sc = check_sum_complete(spec.carrier)
    if not sc.passed:
        raise PreconditionError(
            f"operation is not total: truncated sum undefined at {sc.witness}"
        )
    rng = random.Random(seed)
    if spec.carrier.is_finite():
        pool = spec.carrier.members()
        exhaustive = True
    else:
        pool = _critical_elements(spec, rng, extra=0)
        exhaustive = False
    for r in pool:
        for s in pool:
            for t in pool:
                if op_add(spec, op_add(spec, r, s), t) != op_add(spec, r, op_add(spec, s, t)):
                    return AssociativityReport(False, (r, s, t), exhaustive=exhaustive)
    if not exhaustive:
        extra = spec.carrier.sample_members(rng, samples)
        for _ in range(samples):
            r, s, t = (extra[rng.randrange(len(extra))] for _ in range(3))
            if op_add(spec, op_add(spec, r, s), t) != op_add(spec, r, op_add(spec, s, t)):
                return AssociativityReport(False, (r, s, t), exhaustive=False)
    return AssociativityReport(True, exhaustive=exhaustive)


@dataclass
class SumCompleteReport:
    passed: bool
    witness: Optional[tuple] = None

    def __bool__(self):
        return self.passed


@lru_cache(maxsize=256)
def check_sum_complete(carrier: IntervalUnionCarrier) -> SumCompleteReport:
    """Decide whether max{x : x <= r + s} exists for all carrier pairs.

    A failure happens exactly when some pair sum lands in the closure of a
    right-open dense component with no carrier point in between; this is
    decided from component endpoints, and a witness pair is produced.
    """
    if carrier.lattice is not None or carrier.is_finite():
        return SumCompleteReport(True)
    bad_ranges = []
    for c in carrier.components:
        if c.hi is None or c.hi_closed or c.is_singleton():
            continue
        h = c.hi
        tag, nxt = carrier.min_ge(h)
        if tag == "min":
            bad_ranges.append((h, nxt, False))  # [h, nxt)
        elif tag == "inf":
            bad_ranges.append((h, nxt, True))  # [h, nxt]
        else:
            bad_ranges.append((h, None, False))  # [h, oo)
    if not bad_ranges:
        return SumCompleteReport(True)
    comps = carrier.components
    for ci in comps:
        for cj in comps:
            lo = ci.lo + cj.lo
            lo_closed = ci.lo_closed and cj.lo_closed
            hi = None if (ci.hi is None or cj.hi is None) else ci.hi + cj.hi
            hi_closed = hi is not None and ci.hi_closed and cj.hi_closed
            for (b_lo, b_hi, b_hi_closed) in bad_ranges:
                t_lo = max(lo, b_lo)
                t_lo_strict = t_lo == lo and not lo_closed
                if b_hi is None:
                    t_hi, t_hi_strict = hi, not hi_closed
                elif hi is None or b_hi < hi or (b_hi == hi and not hi_closed):
                    t_hi, t_hi_strict = b_hi, not b_hi_closed
                else:
                    t_hi, t_hi_strict = hi, not hi_closed
                target = _pick_rational(t_lo, t_lo_strict, t_hi, t_hi_strict)
                if target is None:
                    continue
                pair = _split_sum(carrier, ci, cj, target)
                if pair is not None:
                    return SumCompleteReport(False, witness=pair)
    return SumCompleteReport(True)


def _pick_rational(lo, lo_strict, hi, hi_strict):
    if hi is not None:
        if lo > hi or (lo == hi and (lo_strict or hi_strict)):
            return None
        if lo == hi:
            return lo
        mid = (lo + hi) / 2
    else:
        mid = lo + 1
    if not lo_strict:
        return lo
    n = Fraction(lo.numerator // lo.denominator + 1)
    if n > lo and (hi is None or n < hi or (n == hi and not hi_strict)):
        return n
    return mid


def _split_sum(carrier, ci, cj, target):
    """Find members r in ci, s in cj with r + s = target."""
    lo = max(ci.lo, target - cj.hi) if cj.hi is not None else ci.lo
    lo_strict = (lo == ci.lo and not ci.lo_closed) or (
        cj.hi is not None and lo == target - cj.hi and not cj.hi_closed
    )
    hi = target - cj.lo
    if ci.hi is not None and ci.hi < hi:
        hi, hi_strict = ci.hi, not ci.hi_closed
    else:
        hi_strict = not cj.lo_closed
    r = carrier.pick_in(lo, lo_strict, hi, hi_strict)
    if r is None:
        return None
    s = target - r
    if carrier.member(r) and carrier.member(s):
        return (r, s)
    return None


# -- classification ------------------------------------------------------------


@dataclass(frozen=True)
class MonoidClass:
    right_closed: bool
    ultrametric: bool
    group_like: bool

    def any_flag(self) -> bool:
        return self.right_closed or self.ultrametric or self.group_like


def classify_monoid(spec: DistanceMonoidSpec) -> MonoidClass:
    """Decide the right-closed / ultrametric / group-like flags exactly.

    Requires an associative spec (a distance monoid).
    """
    assoc = check_associativity(spec)
    if not assoc.passed:
        raise PreconditionError(f"not associative, witness {assoc.witness}")
    if spec.is_finite_kind():
        return MonoidClass(
            right_closed=True,
            ultrametric=_finite_ultrametric(spec),
            group_like=_finite_group_like(spec),
        )
    car = spec.carrier
    if car.lattice is not None or car.is_finite():
        right_closed = True
    else:
        right_closed = all(c.is_singleton() for c in car.components)
    if spec.kind == KIND_MAX:
        ultra = True
        if car.is_finite():
            group_like = len([x for x in car.members() if x > 0]) <= 1
        else:
            group_like = False
    else:
        ultra = car.is_finite() and _finite_ultrametric_carrier(spec)
        if car.is_finite() and len(car.members()) <= 24:
            group_like = _finite_group_like(spec)
        else:
            # exactly the carriers {0} u C with C a single convex block,
            # which carry the truncated group structure
            group_like = _positive_component_count(car) == 1
    return MonoidClass(right_closed=right_closed, ultrametric=ultra, group_like=group_like)


def _positive_component_count(car: IntervalUnionCarrier) -> int:
    count = 0
    for c in car.components:
        if c.hi is not None and c.hi == 0:
            continue  # the component {0}
        count += 1
    return count


def _finite_ultrametric(spec) -> bool:
    n = len(spec.elements)
    return all(spec.table[i][j] == max(i, j) for i in range(n) for j in range(n))


def _finite_ultrametric_carrier(spec) -> bool:
    els = spec.carrier.members()
    return all(op_add(spec, r, s) == max(r, s) for r in els for s in els)


def _finite_group_like(spec) -> bool:
    from . import cuts  # deferred: cuts builds on this module

    els = spec.all_elements()
    if len(els) <= 1:
        return True
    inf_pos = cuts.embed(spec, els[1])
    sup = cuts.embed(spec, els[-1])
    for r in els:
        for s in els:
            d = cuts.star_diff(spec, cuts.embed(spec, r), cuts.embed(spec, s))
            if spec.le(s, r) and s != r and cuts.compare_cuts(spec, d, inf_pos) > 0:
                if op_add(spec, _cut_element(spec, d), s) != r:
                    return False
            for x in els:
                if (
                    cuts.compare_cuts(spec, d, cuts.embed(spec, x)) < 0
                    and cuts.compare_cuts(spec, cuts.embed(spec, r), sup) < 0
                    and not (spec.le(r, op_add(spec, x, s)) and r != op_add(spec, x, s))
                ):
                    return False
    return True


def _cut_element(spec, v):
    # finite kinds: every cut is principal, so this is total there
    return spec.elements[v.point] if spec.is_finite_kind() else v.point


def is_distance_monoid(spec: DistanceMonoidSpec) -> bool:
    """Total, all magma axioms, and associative."""
    try:
        if spec.is_finite_kind():
            return check_magma_axioms(spec).passed and check_associativity(spec).passed
        if spec.kind == KIND_ADD and not check_sum_complete(spec.carrier).passed:
            return False
        return check_associativity(spec).passed
    except (PreconditionError, UnsupportedOperation):
        return False


# -- builtin catalog -----------------------------------------------------------


def _truncated_table(values: Sequence[Fraction]) -> Tuple[Tuple[int, ...], ...]:
    vals = list(values)
    table = []
    for r in vals:
        row = []
        for s in vals:
            best = max(i for i, x in enumerate(vals) if x <= r + s)
            row.append(best)
        table.append(tuple(row))
    return tuple(table)


def finite_rational_spec(points: Sequence, kind: str = KIND_ADD) -> DistanceMonoidSpec:
    """A finite rational carrier viewed inside (Q>=0, +) or (Q>=0, max)."""
    return DistanceMonoidSpec(kind=kind, carrier=from_points(points))


def _make_Rn(n: int) -> DistanceMonoidSpec:
    vals = [Fraction(i) for i in range(n + 1)]
    return DistanceMonoidSpec(
        kind=KIND_FINITE,
        elements=tuple(str(i) for i in range(n + 1)),
        table=_truncated_table(vals),
    )


def _make_Sn(n: int) -> DistanceMonoidSpec:
    return DistanceMonoidSpec(
        kind=KIND_ADD,
        carrier=IntervalUnionCarrier([(0, True, 1, True)], lattice=Fraction(1, n)),
    )


_FIXED_BUILTINS = {
    "Q1": lambda: DistanceMonoidSpec(
        kind=KIND_ADD, carrier=IntervalUnionCarrier([(0, True, 1, True)])
    ),
    "Q": lambda: DistanceMonoidSpec(
        kind=KIND_ADD, carrier=IntervalUnionCarrier([(0, True, None, False)])
    ),
    "N": lambda: DistanceMonoidSpec(
        kind=KIND_ADD,
        carrier=IntervalUnionCarrier([(0, True, None, False)], lattice=1),
    ),
    "noQE": lambda: DistanceMonoidSpec(
        kind=KIND_ADD,
        carrier=IntervalUnionCarrier(
            [(0, True, 0, True), (2, True, None, False)], excluded=[3]
        ),
    ),
    "twoThree": lambda: DistanceMonoidSpec(
        kind=KIND_ADD,
        carrier=IntervalUnionCarrier([(0, True, 2, False), (3, True, None, False)]),
    ),
    "twoFour": lambda: DistanceMonoidSpec(
        kind=KIND_ADD,
        carrier=IntervalUnionCarrier([(0, True, 2, False), (4, False, None, False)]),
    ),
    "chain2": lambda: DistanceMonoidSpec(kind=KIND_MAX, carrier=from_points([0, 1, 2])),
    "chain3": lambda: DistanceMonoidSpec(kind=KIND_MAX, carrier=from_points([0, 1, 2, 3])),
    "maxQ1": lambda: DistanceMonoidSpec(
        kind=KIND_MAX, carrier=IntervalUnionCarrier([(0, True, 1, True)])
    ),
    "nonassoc72": lambda: finite_rational_spec([0, 1, 2, Fraction(7, 2)]),
}


def builtin(name: str) -> DistanceMonoidSpec:
    """Catalog of ready-made specs; Rn and Sn follow the obvious patterns."""
    m = re.fullmatch(r"R(\d+)", name)
    if m and int(m.group(1)) >= 1:
        return _make_Rn(int(m.group(1)))
    m = re.fullmatch(r"S(\d+)", name)
    if m and int(m.group(1)) >= 1:
        return _make_Sn(int(m.group(1)))
    try:
        return _FIXED_BUILTINS[name]()
    except KeyError:
        raise CarrierViolation(
            f"unknown builtin {name!r}; available: R<n>, S<n>, "
            + ", ".join(sorted(_FIXED_BUILTINS))
        ) from None


def builtin_names() -> List[str]:
    return ["R1", "R2", "R3", "S2", "S3"] + sorted(_FIXED_BUILTINS)

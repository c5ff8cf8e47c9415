"""Finite generalized metric spaces, approximations, and amalgamation."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import linear
from .carrier import as_fraction
from .cuts import (
    ExtendedValue,
    compare_cuts,
    density_pick,
    embed,
    format_value,
    is_omega,
    is_triangle,
    normalize_cut,
    omega_value,
    star_add,
    star_diff,
    value_le,
    zero_value,
)
from .errors import (
    AmalgamationFailure,
    CarrierViolation,
    PreconditionError,
)
from .monoid import (
    KIND_ADD,
    KIND_MAX,
    DistanceMonoidSpec,
    ambient_add,
    ambient_triangle,
    check_associativity,
    check_sum_complete,
    op_add,
)


# -- spaces -------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Points with a symmetric matrix of extended values (zero diagonal).

    Construction does not enforce the triangle inequality; run
    validate_metric for that.  A space whose values are all principal is a
    space over the carrier itself.
    """

    monoid: DistanceMonoidSpec
    points: Tuple[str, ...]
    dist: Tuple[Tuple[ExtendedValue, ...], ...]

    def index(self, label: str) -> int:
        try:
            return self.points.index(label)
        except ValueError:
            raise CarrierViolation(f"unknown point {label!r}") from None

    def d(self, a: str, b: str) -> ExtendedValue:
        return self.dist[self.index(a)][self.index(b)]

    def size(self) -> int:
        return len(self.points)

    def distance_values(self) -> List[ExtendedValue]:
        """Distinct off-diagonal values, ascending; excludes the zero."""
        seen = {}
        for i in range(len(self.points)):
            for j in range(i + 1, len(self.points)):
                v = self.dist[i][j]
                seen[(v.point, v.above)] = v
        vals = list(seen.values())
        vals.sort(key=_value_key)
        return vals

    def restrict(self, labels: Sequence[str]) -> "FiniteMetricSpace":
        idx = [self.index(p) for p in labels]
        return FiniteMetricSpace(
            self.monoid,
            tuple(labels),
            tuple(tuple(self.dist[i][j] for j in idx) for i in idx),
        )

    def with_point(self, label: str, values: Dict[str, ExtendedValue]) -> "FiniteMetricSpace":
        if label in self.points:
            raise CarrierViolation(f"point {label!r} already present")
        n = len(self.points)
        rows = [list(row) for row in self.dist]
        col = [values[p] for p in self.points]
        for i in range(n):
            rows[i] = rows[i] + [col[i]]
        rows.append(col + [zero_value(self.monoid)])
        return FiniteMetricSpace(
            self.monoid, self.points + (label,), tuple(tuple(r) for r in rows)
        )


def _value_key(v: ExtendedValue):
    return (v.point is None, v.point if v.point is not None else 0, v.above)


def _coerce_value(spec, value) -> ExtendedValue:
    if isinstance(value, ExtendedValue):
        return value
    return embed(spec, value)


def make_space(spec: DistanceMonoidSpec, points: Sequence[str], entries: Dict) -> FiniteMetricSpace:
    """Build a space from per-pair entries; symmetric closure, zero diagonal."""
    pts = tuple(points)
    if len(set(pts)) != len(pts):
        raise CarrierViolation("point labels must be distinct")
    zero = zero_value(spec)
    table: Dict[Tuple[str, str], ExtendedValue] = {}
    for (a, b), v in entries.items():
        table[(a, b)] = table[(b, a)] = _coerce_value(spec, v)
    n = len(pts)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == j:
                row.append(zero)
            else:
                key = (pts[i], pts[j])
                if key not in table:
                    raise CarrierViolation(f"missing distance for {key}")
                row.append(table[key])
        rows.append(tuple(row))
    return FiniteMetricSpace(spec, pts, tuple(rows))


@dataclass
class MetricReport:
    violations: List[tuple]

    @property
    def passed(self) -> bool:
        return not self.violations


def validate_metric(space: FiniteMetricSpace) -> MetricReport:
    """Check zero-distance, symmetry, and every triangle, exhaustively."""
    spec = space.monoid
    bad = []
    n = len(space.points)
    zero = zero_value(spec)
    for i in range(n):
        for j in range(n):
            v = space.dist[i][j]
            if (compare_cuts(spec, v, zero) == 0) != (i == j):
                bad.append(("zero", space.points[i], space.points[j]))
            if space.dist[j][i] != v:
                bad.append(("symmetry", space.points[i], space.points[j]))
    for i, j, k in combinations(range(n), 3):
        if not is_triangle(spec, space.dist[i][j], space.dist[j][k], space.dist[i][k]):
            bad.append(("triangle", space.points[i], space.points[j], space.points[k]))
    return MetricReport(bad)


# -- Katetov maps -------------------------------------------------------------


@dataclass(frozen=True)
class KatetovMap:
    """A one-point-extension distance profile over a base space."""

    base: FiniteMetricSpace
    values: Tuple[Tuple[str, ExtendedValue], ...]

    def value(self, label: str) -> ExtendedValue:
        for p, v in self.values:
            if p == label:
                return v
        raise CarrierViolation(f"no value for point {label!r}")


def katetov_map(base: FiniteMetricSpace, values: Dict[str, object]) -> KatetovMap:
    spec = base.monoid
    vals = tuple((p, _coerce_value(spec, values[p])) for p in base.points)
    return KatetovMap(base, vals)


def check_katetov(space: FiniteMetricSpace, values: Dict[str, object]) -> Optional[tuple]:
    """First pair (a, b) where (d(a,b), f(a), f(b)) fails, or None."""
    spec = space.monoid
    f = {p: _coerce_value(spec, values[p]) for p in space.points}
    zero = zero_value(spec)
    for p, v in f.items():
        if compare_cuts(spec, v, zero) == 0:
            raise PreconditionError(f"value at {p!r} must be nonzero")
    for a, b in combinations(space.points, 2):
        if not is_triangle(spec, space.d(a, b), f[a], f[b]):
            return (a, b)
    return None


def extend_by_katetov(space: FiniteMetricSpace, label: str, values: Dict[str, object]) -> FiniteMetricSpace:
    spec = space.monoid
    f = {p: _coerce_value(spec, values[p]) for p in space.points}
    return space.with_point(label, f)


# -- approximations -----------------------------------------------------------


@dataclass(frozen=True)
class ApproxInterval:
    """{0}, or the half-open interval (lo, hi] with carrier endpoints."""

    zero: bool
    lo: Optional[ExtendedValue] = None
    hi: Optional[ExtendedValue] = None


def interval(spec, lo, hi) -> ApproxInterval:
    """(lo, hi]; hi may be the string "omega" for an unbounded upper end."""
    lo_v = _coerce_value(spec, lo)
    hi_v = omega_value(spec) if hi == "omega" else _coerce_value(spec, hi)
    if compare_cuts(spec, lo_v, hi_v) >= 0:
        raise CarrierViolation("interval endpoints must satisfy lo < hi")
    return ApproxInterval(False, lo_v, hi_v)


def zero_interval() -> ApproxInterval:
    return ApproxInterval(True)


def interval_contains(spec, iv: ApproxInterval, v: ExtendedValue) -> bool:
    if iv.zero:
        return compare_cuts(spec, v, zero_value(spec)) == 0
    return compare_cuts(spec, iv.lo, v) < 0 and value_le(spec, v, iv.hi)


def interval_refines(spec, a: ApproxInterval, b: ApproxInterval) -> bool:
    if a.zero:
        return b.zero or compare_cuts(spec, b.lo, zero_value(spec)) < 0
    if b.zero:
        return False
    return value_le(spec, b.lo, a.lo) and value_le(spec, a.hi, b.hi)


class Approximation:
    """Interval assignment keyed by distance values or by point pairs."""

    def __init__(self, spec: DistanceMonoidSpec, kind: str, table: Dict = None):
        if kind not in ("values", "pairs"):
            raise CarrierViolation("approximation kind must be 'values' or 'pairs'")
        self.spec = spec
        self.kind = kind
        self.table: Dict = dict(table or {})

    @staticmethod
    def value_key(v: ExtendedValue):
        return (v.point, v.above)

    @staticmethod
    def pair_key(a: str, b: str):
        return (a, b) if a <= b else (b, a)

    def set_value(self, v: ExtendedValue, iv: ApproxInterval):
        self.table[self.value_key(v)] = (v, iv)

    def set_pair(self, a: str, b: str, iv: ApproxInterval):
        self.table[self.pair_key(a, b)] = ((a, b), iv)

    def get_value(self, v: ExtendedValue) -> ApproxInterval:
        if v.is_zero():
            return zero_interval()
        try:
            return self.table[self.value_key(v)][1]
        except KeyError:
            raise CarrierViolation(f"no interval assigned to {v}") from None

    def get_pair(self, a: str, b: str) -> ApproxInterval:
        if a == b:
            return zero_interval()
        try:
            return self.table[self.pair_key(a, b)][1]
        except KeyError:
            raise CarrierViolation(f"no interval assigned to pair {(a, b)}") from None

    def items(self):
        return [self.table[k] for k in sorted(self.table, key=repr)]

    def refines(self, other: "Approximation") -> bool:
        if self.kind != other.kind:
            raise PreconditionError("cannot compare approximations of different kinds")
        for key, (_, iv) in other.table.items():
            mine = self.table.get(key)
            if mine is None or not interval_refines(self.spec, mine[1], iv):
                return False
        return True

    def hat(self, space: FiniteMetricSpace) -> "Approximation":
        """Collapse a pairwise approximation to the distance set.

        Lower ends take the maximum and upper ends the minimum over the
        pairs carrying each value.
        """
        if self.kind != "pairs":
            raise PreconditionError("hat reduction applies to pairwise approximations")
        spec = self.spec
        out = Approximation(spec, "values")
        for a, b in combinations(space.points, 2):
            v = space.d(a, b)
            iv = self.get_pair(a, b)
            if v.is_zero():
                continue
            cur = out.table.get(out.value_key(v))
            if cur is None:
                out.set_value(v, iv)
            else:
                lo = max((cur[1].lo, iv.lo), key=lambda x: _value_key(x))
                hi = min((cur[1].hi, iv.hi), key=lambda x: _value_key(x))
                if compare_cuts(spec, lo, hi) >= 0:
                    raise CarrierViolation("hat reduction produced an empty interval")
                out.set_value(v, ApproxInterval(False, lo, hi))
        return out


def validate_value_approximation(spec, approx: Approximation, values: Iterable[ExtendedValue]) -> None:
    for v in values:
        if v.is_zero():
            continue
        if not interval_contains(spec, approx.get_value(v), v):
            raise PreconditionError(f"{format_value(spec, v)} lies outside its interval")


def canonical_approximation(spec: DistanceMonoidSpec, space: FiniteMetricSpace) -> Approximation:
    """Per-pair intervals (d(a,b)-, d(a,b)] over a finite carrier.

    Every nonzero element of a finite carrier has an immediate
    predecessor, so this is the tightest approximation of the space.
    """
    elements = _finite_elements(spec)
    out = Approximation(spec, "pairs")
    for a, b in combinations(space.points, 2):
        v = space.d(a, b)
        if v.kind != "principal":
            raise PreconditionError("canonical approximation needs principal distances")
        idx = elements.index(_element_of(spec, v))
        if idx == 0:
            raise PreconditionError("off-diagonal distance cannot be zero")
        out.set_pair(a, b, interval(spec, elements[idx - 1], elements[idx]))
    return out


def _finite_elements(spec) -> list:
    if spec.is_finite_kind():
        return list(spec.elements)
    if spec.carrier.is_finite():
        return spec.carrier.members()
    raise PreconditionError("carrier is not finite")


def _element_of(spec, v: ExtendedValue):
    if v.kind != "principal":
        raise PreconditionError(f"{v} is not a carrier element")
    return spec.elements[v.point] if spec.is_finite_kind() else v.point


# -- the four-values condition -------------------------------------------------


def four_values_check(spec, u1, u2, v1, v2, s):
    """A linking element t with (t,u1,v1) and (t,u2,v2) triangles, or None.

    Preconditions: (s,u1,u2) and (s,v1,v2) are triangles in the ambient
    structure.  Returns the least admissible nonzero t when that set has a
    minimum (zero links only degenerate equal-pair configurations, and a
    positive link always exists alongside it); otherwise a deterministic
    interior choice.
    """
    u1, u2, v1, v2, s = (spec.coerce(x) for x in (u1, u2, v1, v2, s))
    for tri in ((s, u1, u2), (s, v1, v2)):
        if not ambient_triangle(spec, *tri):
            raise PreconditionError(f"{tri} is not a triangle")
    if spec.is_finite_kind():
        for t in spec.elements[1:]:
            if ambient_triangle(spec, t, u1, v1) and ambient_triangle(spec, t, u2, v2):
                return t
        return None
    if spec.kind == KIND_MAX:
        # max-triangles: t must cover unequal pairs and stay under the splits
        hi = min(max(u1, v1), max(u2, v2))
        lo = max(_ultra_lower(u1, v1), _ultra_lower(u2, v2))
    else:
        lo = max(abs(u1 - v1), abs(u2 - v2))
        hi = min(u1 + v1, u2 + v2)
    tag, m = spec.carrier.min_ge(lo)
    if tag == "min" and m == 0:
        tag, m = spec.carrier.min_ge(Fraction(0), strict=True)
    if tag == "min":
        return m if m <= hi else None
    if tag == "inf":
        if m > hi or m == hi:
            return None
        return spec.carrier.pick_in(m, True, hi, False)
    return None


def _ultra_lower(a, b):
    # (t, a, b) is a max-triangle iff t >= max(a,b) when a != b, else t <= ... any
    return max(a, b) if a != b else Fraction(0)


@dataclass
class FourValuesReport:
    passed: bool
    witness: Optional[tuple] = None
    decisive: bool = True

    def __bool__(self):
        return self.passed


def four_values_search(spec: DistanceMonoidSpec, seed: int = 0, samples: int = 400) -> FourValuesReport:
    """Search for a four-values failure.

    Exhaustive over finite carriers; decided through associativity on
    sum-complete infinite carriers; critical-point plus seeded sampling
    (a semi-decision, flagged not decisive) otherwise.
    """
    if spec.is_finite_kind() or (not spec.is_finite_kind() and spec.carrier.is_finite()):
        return _four_values_exhaustive(spec)
    if spec.kind == KIND_MAX:
        return FourValuesReport(True)  # max is associative, carrier sum-complete
    if check_sum_complete(spec.carrier).passed:
        rep = check_associativity(spec)
        if rep.passed:
            return FourValuesReport(True, decisive=rep.exhaustive)
        r, s, t = rep.witness
        quad = _assoc_to_four_values(spec, r, s, t)
        if quad is not None:
            return FourValuesReport(False, witness=quad)
    return _four_values_sampled(spec, seed, samples)


def _four_values_exhaustive(spec) -> FourValuesReport:
    els = spec.all_elements()
    n = len(els)
    tri_mask = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            mask = 0
            for k in range(n):
                if ambient_triangle(spec, els[k], els[i], els[j]):
                    mask |= 1 << k
            tri_mask[i][j] = mask
    for i1 in range(n):
        for i2 in range(n):
            su = tri_mask[i1][i2]
            for j1 in range(n):
                for j2 in range(n):
                    if su & tri_mask[j1][j2]:
                        if not (tri_mask[i1][j1] & tri_mask[i2][j2]):
                            s_idx = (su & tri_mask[j1][j2]).bit_length() - 1
                            return FourValuesReport(
                                False,
                                witness=(els[i1], els[i2], els[j1], els[j2], els[s_idx]),
                            )
    return FourValuesReport(True)


def _assoc_to_four_values(spec, r, s, t):
    u_left = op_add(spec, op_add(spec, r, s), t)
    u_right = op_add(spec, r, op_add(spec, s, t))
    if spec.le(u_left, u_right) and u_left != u_right:
        r, t = t, r
        u_left, u_right = u_right, u_left
    quad = (r, s, u_left, t, op_add(spec, r, s))
    u1, u2, v1, v2, s0 = quad
    try:
        if four_values_check(spec, u1, u2, v1, v2, s0) is None:
            return quad
    except PreconditionError:
        return None
    return None


def _four_values_sampled(spec, seed, samples) -> FourValuesReport:
    rng = random.Random(seed)
    car = spec.carrier
    pool = set()
    for q in car.boundary_points():
        for cand in (q, q / 2, 2 * q):
            if car.member(cand) and cand > 0:
                pool.add(cand)
    for x in sorted(pool):
        for y in sorted(pool):
            for cand in (x + y, abs(x - y), (x + y) / 2):
                if cand > 0 and car.member(cand):
                    pool.add(cand)
    pool = sorted(pool)[:12]
    pool.extend(x for x in car.sample_members(rng, samples) if x > 0)

    def try_quad(u1, u2, v1, v2):
        lo_s = max(abs(u1 - u2), abs(v1 - v2))
        hi_s = min(u1 + u2, v1 + v2)
        s0 = car.pick_in(lo_s, False, hi_s, False)
        if s0 is None:
            return None
        try:
            if four_values_check(spec, u1, u2, v1, v2, s0) is None:
                return (u1, u2, v1, v2, s0)
        except PreconditionError:
            return None
        return None

    k = min(len(pool), 10)
    for u1 in pool[:k]:
        for u2 in pool[:k]:
            for v1 in pool[:k]:
                for v2 in pool[:k]:
                    w = try_quad(u1, u2, v1, v2)
                    if w:
                        return FourValuesReport(False, witness=w)
    for _ in range(samples):
        u1, u2, v1, v2 = (pool[rng.randrange(len(pool))] for _ in range(4))
        w = try_quad(u1, u2, v1, v2)
        if w:
            return FourValuesReport(False, witness=w)
    return FourValuesReport(True, decisive=False)


# -- amalgamation ---------------------------------------------------------------


def _require_principal(space: FiniteMetricSpace):
    for row in space.dist:
        for v in row:
            if v.kind != "principal":
                raise PreconditionError("amalgamation needs distances in the carrier")


def _check_overlap(x1: FiniteMetricSpace, x2: FiniteMetricSpace) -> List[str]:
    shared = sorted(set(x1.points) & set(x2.points))
    if not shared:
        raise PreconditionError("overlap must be nonempty")
    for a, b in combinations(shared, 2):
        if x1.d(a, b) != x2.d(a, b):
            raise PreconditionError(f"distance disagreement on overlap pair ({a}, {b})")
    return shared


def free_amalgam(a: FiniteMetricSpace, b: FiniteMetricSpace) -> FiniteMetricSpace:
    """Union with cross distances min over the overlap of joined sums.

    The result is a colored space; it is a metric space for every pair of
    inputs exactly when the operation is associative.
    """
    spec = a.monoid
    shared = _check_overlap(a, b)
    _require_principal(a)
    _require_principal(b)
    points = list(a.points) + [p for p in b.points if p not in a.points]
    entries = {}
    for p, q in combinations(points, 2):
        in_a = p in a.points and q in a.points
        in_b = p in b.points and q in b.points
        if in_a:
            entries[(p, q)] = a.d(p, q)
        elif in_b:
            entries[(p, q)] = b.d(p, q)
        else:
            x, y = (p, q) if p in a.points else (q, p)
            best = None
            for z in shared:
                cand = op_add(spec, _element_of(spec, a.d(x, z)), _element_of(spec, b.d(z, y)))
                if best is None or _elem_key(spec, cand) < _elem_key(spec, best):
                    best = cand
            entries[(p, q)] = embed(spec, best)
    return make_space(spec, points, entries)


def _elem_key(spec, e):
    return spec.index_of(e) if spec.is_finite_kind() else e


def _ambient_diff_rank(spec, r, s):
    """Key ordering the sets D(r,s) = {x : (x,r,s) ambient triangle} by inclusion."""
    if spec.is_finite_kind():
        return len([x for x in spec.elements if ambient_triangle(spec, x, r, s)])
    if spec.kind == KIND_MAX:
        return -(max(r, s) if r != s else Fraction(0))
    return -abs(r - s)


def one_point_amalgam(
    spec: DistanceMonoidSpec, x1: FiniteMetricSpace, x2: FiniteMetricSpace
) -> FiniteMetricSpace:
    """Amalgamate two spaces each having exactly one point outside the overlap.

    Picks the linking distance through the four-values condition; raises
    AmalgamationFailure carrying the quadruple when none exists.
    """
    shared = _check_overlap(x1, x2)
    new1 = [p for p in x1.points if p not in shared]
    new2 = [p for p in x2.points if p not in shared]
    if len(new1) != 1 or len(new2) != 1:
        raise PreconditionError("each side must contribute exactly one new point")
    _require_principal(x1)
    _require_principal(x2)
    p1, p2 = new1[0], new2[0]
    d1 = {x: _element_of(spec, x1.d(p1, x)) for x in shared}
    d2 = {x: _element_of(spec, x2.d(p2, x)) for x in shared}
    y = min(shared, key=lambda x: (_elem_key(spec, ambient_add(spec, d1[x], d2[x])), x))
    y2 = min(shared, key=lambda x: (_ambient_diff_rank(spec, d1[x], d2[x]), x))
    s0 = _element_of(spec, x1.d(y, y2)) if y != y2 else spec.zero()
    quad = (d1[y], d1[y2], d2[y], d2[y2], s0)
    t = four_values_check(spec, d1[y], d1[y2], d2[y], d2[y2], s0)
    if t is None:
        raise AmalgamationFailure("no admissible linking distance", quadruple=quad)
    if t == spec.zero():
        t = min((d1[y], d1[y2]), key=lambda v: _elem_key(spec, v))
    for x in shared:
        if not ambient_triangle(spec, t, d1[x], d2[x]):  # pragma: no cover
            raise AmalgamationFailure(
                "construction invariant failed", quadruple=quad
            )
    points = list(x1.points) + [p2]
    entries = {}
    for p, q in combinations(points, 2):
        if p in x1.points and q in x1.points:
            entries[(p, q)] = x1.d(p, q)
        elif p in x2.points and q in x2.points:
            entries[(p, q)] = x2.d(p, q)
        else:
            entries[(p, q)] = embed(spec, t)
    return make_space(spec, points, entries)


def disjoint_amalgam(
    spec: DistanceMonoidSpec, x1: FiniteMetricSpace, x2: FiniteMetricSpace
) -> FiniteMetricSpace:
    """Amalgamate over the shared points, one outside point at a time.

    New points of the second space are folded in in label order; inside
    that, distances to the first space's own points are settled one point
    at a time through the one-point case.
    """
    _check_overlap(x1, x2)
    only2 = sorted(p for p in x2.points if p not in x1.points)
    current = x1
    for x in only2:
        known = sorted(set(current.points) & set(x2.points))
        cross: Dict[str, ExtendedValue] = {p: x2.d(x, p) for p in known}
        for u in sorted(set(current.points) - set(known)):
            base_labels = [p for p in current.points if p in cross and p != u]
            a_side = current.restrict(sorted(base_labels + [u]))
            b_entries = {}
            for p, q in combinations(sorted(base_labels), 2):
                b_entries[(p, q)] = current.d(p, q)
            for p in base_labels:
                b_entries[(p, x)] = cross[p]
            b_side = make_space(spec, sorted(base_labels) + [x], b_entries)
            joined = one_point_amalgam(spec, a_side, b_side)
            cross[u] = joined.d(u, x)
        current = current.with_point(x, cross)
    return current


# -- metric refinement (sum-complete carriers) ----------------------------------


def metric_refinement(
    spec: DistanceMonoidSpec, values: Sequence[ExtendedValue], psi: Approximation
) -> Approximation:
    """Refine an approximation of a finite value set to a metric one.

    Upper ends are rebuilt inductively: each s_k is the minimum of the
    given upper end and all admissible sums s_i (+) s_j over pairs whose
    values dominate the k-th value; a preliminary pass shrinks upper ends
    below the next value so the sequence is strictly increasing.
    """
    if spec.kind == KIND_ADD and not check_sum_complete(spec.carrier).passed:
        raise PreconditionError("metric refinement needs a sum-complete carrier")
    if psi.kind != "values":
        raise PreconditionError("metric refinement takes a value-keyed approximation")
    zero = zero_value(spec)
    xs = sorted({(v.point, v.above): v for v in values}.values(), key=_value_key)
    if not xs or compare_cuts(spec, xs[0], zero) != 0:
        xs = [zero] + xs
    omega = omega_value(spec)
    for v in xs[1:]:
        if v.point is None and is_omega(spec, v):
            raise PreconditionError("value set is not bounded by carrier elements")
    lowers = [None] + [psi.get_value(v).lo for v in xs[1:]]
    uppers: List[ExtendedValue] = [zero]
    for v in xs[1:]:
        hi = psi.get_value(v).hi
        if not interval_contains(spec, psi.get_value(v), v):
            raise PreconditionError("given approximation does not contain its value")
        if hi.point is None:
            hi = embed(spec, density_pick(spec, v, omega))
        uppers.append(hi)
    n = len(xs) - 1
    for k in range(1, n):
        if compare_cuts(spec, uppers[k], xs[k + 1]) >= 0:
            t = embed(spec, density_pick(spec, xs[k], xs[k + 1]))
            if compare_cuts(spec, t, uppers[k]) < 0:
                uppers[k] = t
    s_elems = [spec.zero()]
    for k in range(1, n + 1):
        cands = [_element_of(spec, uppers[k])]
        for i in range(1, k):
            for j in range(1, k):
                if value_le(spec, xs[k], star_add(spec, xs[i], xs[j])):
                    cands.append(op_add(spec, s_elems[i], s_elems[j]))
        best = cands[0]
        for c in cands[1:]:
            if spec.le(c, best) and c != best:
                best = c
        s_elems.append(best)
        if not value_le(spec, xs[k], embed(spec, best)):  # pragma: no cover
            raise PreconditionError("refinement invariant failed")
    out = Approximation(spec, "values")
    for k in range(1, n + 1):
        out.set_value(xs[k], ApproxInterval(False, lowers[k], embed(spec, s_elems[k])))
    return out


# -- approximate-metric feasibility ---------------------------------------------


@dataclass
class RealizationResult:
    feasible: bool
    space: Optional[FiniteMetricSpace] = None

    def __bool__(self):
        return self.feasible


def approximately_metric_check(
    spec: DistanceMonoidSpec, space: FiniteMetricSpace, phi: Approximation
) -> RealizationResult:
    """Decide whether some carrier-valued metric realizes the approximation.

    Sum-complete carriers with a valid input metric go through metric
    refinement; otherwise the constraint system is solved directly
    (enumeration over finite carriers, minimax closure for max carriers,
    exact Fourier-Motzkin over the components for dense additive ones).
    """
    if phi.kind != "values":
        raise PreconditionError("expected a value-keyed approximation")
    validate_value_approximation(spec, phi, space.distance_values())
    sum_complete = spec.is_finite_kind() or spec.kind == KIND_MAX or check_sum_complete(spec.carrier).passed
    if sum_complete and validate_metric(space).passed:
        return _realize_by_refinement(spec, space, phi)
    if spec.is_finite_kind() or (not spec.is_finite_kind() and (spec.carrier.is_finite() or spec.carrier.lattice is not None)):
        return _realize_by_enumeration(spec, space, phi)
    if spec.kind == KIND_MAX:
        return _realize_by_minimax(spec, space, phi)
    return _realize_by_elimination(spec, space, phi)


def _realize_by_refinement(spec, space, phi) -> RealizationResult:
    working = space
    phi_work = phi
    omega = omega_value(spec)
    unbounded = [v for v in space.distance_values() if v.point is None]
    if unbounded:
        low = phi.get_value(unbounded[0]).lo
        start = normalize_cut(spec, low.point, above=True)
        for v in space.distance_values():
            if v.point is not None and compare_cuts(spec, v, start) > 0:
                start = v
        t = embed(spec, density_pick(spec, start, omega))
        entries = {}
        for a, b in combinations(space.points, 2):
            v = space.d(a, b)
            entries[(a, b)] = t if v.point is None else v
        working = make_space(spec, space.points, entries)
        phi_work = Approximation(spec, "values")
        for v, iv in (phi.table[k] for k in phi.table):
            phi_work.set_value(v, iv)
        phi_work.set_value(t, phi.get_value(unbounded[0]))
    refined = metric_refinement(spec, working.distance_values(), phi_work)
    entries = {}
    for a, b in combinations(space.points, 2):
        entries[(a, b)] = refined.get_value(working.d(a, b)).hi
    result = make_space(spec, space.points, entries)
    if not validate_metric(result).passed:  # pragma: no cover
        raise PreconditionError("refinement produced a non-metric")
    return RealizationResult(True, result)


def _pair_vars(space):
    pairs = list(combinations(range(len(space.points)), 2))
    return pairs, {p: i for i, p in enumerate(pairs)}


def _realize_by_enumeration(spec, space, phi) -> RealizationResult:
    if spec.is_finite_kind():
        elements = spec.all_elements()
    elif spec.carrier.is_finite():
        elements = spec.carrier.members()
    else:
        cap = spec.carrier.upper_bound()
        hi_pts = [
            phi.get_value(v).hi.point
            for v in space.distance_values()
            if phi.get_value(v).hi.point is not None
        ]
        if cap is None and not hi_pts:
            raise PreconditionError("cannot enumerate an unbounded lattice carrier")
        bound = cap if cap is not None else max(hi_pts)
        elements = spec.carrier.fragment(spec.carrier.lattice.denominator, bound)
    pairs, index = _pair_vars(space)
    domains = []
    for i, j in pairs:
        iv = phi.get_value(space.dist[i][j])
        dom = [e for e in elements if not _is_zero_element(spec, e)
               and interval_contains(spec, iv, embed(spec, e))]
        if not dom:
            return RealizationResult(False)
        domains.append(dom)
    assignment: List = [None] * len(pairs)

    def consistent(k: int) -> bool:
        i, j = pairs[k]
        for m in range(len(space.points)):
            if m == i or m == j:
                continue
            ki = index.get((min(i, m), max(i, m)))
            kj = index.get((min(j, m), max(j, m)))
            a = assignment[ki] if ki is not None and ki < k else None
            b = assignment[kj] if kj is not None and kj < k else None
            if a is not None and b is not None:
                if not ambient_triangle(spec, assignment[k], a, b):
                    return False
        return True

    def search(k: int) -> bool:
        if k == len(pairs):
            return True
        for e in domains[k]:
            assignment[k] = e
            if consistent(k) and search(k + 1):
                return True
        assignment[k] = None
        return False

    if not search(0):
        return RealizationResult(False)
    entries = {}
    for k, (i, j) in enumerate(pairs):
        entries[(space.points[i], space.points[j])] = embed(spec, assignment[k])
    result = make_space(spec, space.points, entries)
    return RealizationResult(True, result)


def _is_zero_element(spec, e) -> bool:
    return e == spec.zero()


def _realize_by_minimax(spec, space, phi) -> RealizationResult:
    car = spec.carrier
    pairs, index = _pair_vars(space)
    uppers, lowers = [], []
    big = None
    for i, j in pairs:
        iv = phi.get_value(space.dist[i][j])
        lo = iv.lo.point
        if iv.hi.point is not None:
            uppers.append(iv.hi.point)
        else:
            if big is None:
                anchor = max(v.lo.point for _, v in phi.items() if not v.zero)
                big = car.pick_in(anchor, True, None, True)
            uppers.append(big)
        lowers.append(lo)
    n = len(space.points)
    d = [[Fraction(0)] * n for _ in range(n)]
    for k, (i, j) in enumerate(pairs):
        d[i][j] = d[j][i] = uppers[k]
    for m in range(n):
        for i in range(n):
            for j in range(n):
                cand = max(d[i][m], d[m][j])
                if i != j and cand < d[i][j]:
                    d[i][j] = d[j][i] = cand
    entries = {}
    for k, (i, j) in enumerate(pairs):
        if d[i][j] <= lowers[k] or not car.member(d[i][j]):
            return RealizationResult(False)
        entries[(space.points[i], space.points[j])] = embed(spec, d[i][j])
    return RealizationResult(True, make_space(spec, space.points, entries))


def _phi_pieces(spec, iv: ApproxInterval):
    """Sub-ranges of the interval cut out by the carrier components."""
    lo = iv.lo.point
    hi = iv.hi.point  # None = unbounded
    pieces = []
    for c in spec.carrier.components:
        p_lo, p_lo_strict = c.lo, not c.lo_closed
        if lo > p_lo or (lo == p_lo and not p_lo_strict):
            p_lo, p_lo_strict = lo, True
        p_hi, p_hi_strict = c.hi, (not c.hi_closed) if c.hi is not None else True
        if hi is not None and (p_hi is None or hi < p_hi or (hi == p_hi and p_hi_strict)):
            p_hi, p_hi_strict = hi, False
        if p_hi is not None:
            if p_lo > p_hi or (p_lo == p_hi and (p_lo_strict or p_hi_strict)):
                continue
        pieces.append((p_lo, p_lo_strict, p_hi, p_hi_strict))
    return pieces


def _realize_by_elimination(spec, space, phi) -> RealizationResult:
    pairs, index = _pair_vars(space)
    nv = len(pairs)
    piece_lists = []
    for i, j in pairs:
        pieces = _phi_pieces(spec, phi.get_value(space.dist[i][j]))
        if not pieces:
            return RealizationResult(False)
        piece_lists.append(pieces)
    tri_rows = []
    for i, j, k in combinations(range(len(space.points)), 3):
        e_ij, e_jk, e_ik = index[(i, j)], index[(j, k)], index[(i, k)]
        for a, b, c in ((e_ik, e_ij, e_jk), (e_ij, e_ik, e_jk), (e_jk, e_ij, e_ik)):
            row = [Fraction(0)] * nv
            row[a] = Fraction(1)
            row[b] -= 1
            row[c] -= 1
            tri_rows.append((tuple(row), False, Fraction(0)))

    def unit(k, sign):
        row = [Fraction(0)] * nv
        row[k] = Fraction(sign)
        return tuple(row)

    def assignments(k: int, chosen):
        if k == nv:
            yield list(chosen)
            return
        for piece in piece_lists[k]:
            chosen.append(piece)
            yield from assignments(k + 1, chosen)
            chosen.pop()

    for combo in assignments(0, []):
        cons = list(tri_rows)
        ok = True
        for k, (p_lo, p_lo_strict, p_hi, p_hi_strict) in enumerate(combo):
            cons.append((unit(k, -1), p_lo_strict, -p_lo))
            if p_hi is not None:
                cons.append((unit(k, 1), p_hi_strict, p_hi))
            if p_lo < 0:
                ok = False
        if not ok:
            continue
        sol = linear.solve(cons, nv)
        if sol is None:
            continue
        entries = {}
        good = True
        for k, (i, j) in enumerate(pairs):
            val = sol[k]
            if not spec.carrier.member(val) or val <= 0:
                good = False
                break
            entries[(space.points[i], space.points[j])] = embed(spec, val)
        if not good:
            continue
        result = make_space(spec, space.points, entries)
        if validate_metric(result).passed:
            return RealizationResult(True, result)
    return RealizationResult(False)

"""Growing generic spaces, extension axioms, and the QE decision."""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Dict, List, Optional, Sequence, Tuple

from . import formulas
from .carrier import IntervalUnionCarrier, as_fraction
from .cuts import (
    ExtendedValue,
    compare_cuts,
    embed,
    find_qe_witness,
    monoid_precondition,
    normalize_cut,
    omega_value,
    star_add,
    star_diff,
    value_le,
    verify_qe_witness,
    zero_value,
)
from .errors import CarrierViolation, PreconditionError
from .monoid import (
    KIND_ADD,
    DistanceMonoidSpec,
    ambient_triangle,
    classify_monoid,
    op_add,
)
from .spaces import (
    Approximation,
    FiniteMetricSpace,
    KatetovMap,
    canonical_approximation,
    check_katetov,
    disjoint_amalgam,
    extend_by_katetov,
    four_values_search,
    interval_contains,
    katetov_map,
    make_space,
    validate_metric,
)

Z_LABEL = "_z"


# -- Katetov enumeration -------------------------------------------------------


def katetov_value_pool(
    spec: DistanceMonoidSpec,
    denominator: Optional[int] = None,
    max_value=None,
) -> List:
    """Nonzero elements available as one-point-extension distances."""
    if spec.is_finite_kind():
        return list(spec.elements[1:])
    if spec.carrier.is_finite():
        return [x for x in spec.carrier.members() if x > 0]
    if denominator is None:
        raise PreconditionError(
            "dense carrier: pass a denominator bound for the value fragment"
        )
    return [x for x in spec.carrier.fragment(denominator, max_value) if x > 0]


def enumerate_katetov(
    spec: DistanceMonoidSpec,
    space: FiniteMetricSpace,
    values: Optional[Sequence] = None,
    denominator: Optional[int] = None,
    max_value=None,
) -> List[KatetovMap]:
    """All one-point-extension profiles with values in the bounded pool."""
    pool = (
        [spec.coerce(v) for v in values]
        if values is not None
        else katetov_value_pool(spec, denominator, max_value)
    )
    out = []
    for combo in product(pool, repeat=space.size()):
        vals = dict(zip(space.points, combo))
        if check_katetov(space, vals) is None:
            out.append(katetov_map(space, vals))
    return out


# -- extension schemes ----------------------------------------------------------


@dataclass(frozen=True)
class ExtensionScheme:
    """A base space, a one-point-extension profile, and pair intervals.

    The approximation covers all pairs of the extended space; the witness
    point carries the reserved label.
    """

    base: FiniteMetricSpace
    katetov: KatetovMap
    approx: Approximation
    z_label: str = Z_LABEL

    def is_standard(self) -> bool:
        for _, iv in self.approx.items():
            if not iv.zero and iv.hi.point is None:
                return False
        return True


def canonical_scheme(
    spec: DistanceMonoidSpec, base: FiniteMetricSpace, kmap: KatetovMap
) -> ExtensionScheme:
    """Scheme with the tightest intervals (finite carriers only)."""
    extended = extend_by_katetov(base, Z_LABEL, dict(kmap.values))
    return ExtensionScheme(base, kmap, canonical_approximation(spec, extended))


def check_extension_axiom(
    space: FiniteMetricSpace, scheme: ExtensionScheme
) -> Optional[tuple]:
    """Bounded model checking of the one-point-extension axiom.

    Every tuple realizing the base's intervals must admit a witness point
    realizing the extension intervals; returns the first tuple with no
    witness, or None when the axiom holds.
    """
    spec = space.monoid
    base = scheme.base
    n = base.size()
    labels = base.points
    for tup in product(space.points, repeat=n):
        ok = True
        for i in range(n):
            for j in range(i + 1, n):
                iv = scheme.approx.get_pair(labels[i], labels[j])
                if not interval_contains(spec, iv, space.d(tup[i], tup[j])):
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        witness = False
        for y in space.points:
            good = True
            for i in range(n):
                iv = scheme.approx.get_pair(labels[i], scheme.z_label)
                if not interval_contains(spec, iv, space.d(tup[i], y)):
                    good = False
                    break
            if good:
                witness = True
                break
        if not witness:
            return tup
    return None


# -- generic-space growth --------------------------------------------------------


@dataclass
class Obligation:
    labels: Tuple[str, ...]
    values: Tuple  # elements aligned with labels


@dataclass
class GrowthResult:
    space: FiniteMetricSpace
    realized: List[Obligation] = field(default_factory=list)
    pending: List[Obligation] = field(default_factory=list)
    max_base: int = 3
    work_spec: Optional[DistanceMonoidSpec] = None

    def scheme_key(self, ob: Obligation):
        """Isomorphism-class key of an obligation: minimal relabeling."""
        spec = self.space.monoid
        idx = [self.space.index(p) for p in ob.labels]
        best = None
        for perm in permutations(range(len(idx))):
            mat = tuple(
                _vkey(self.space.dist[idx[perm[i]]][idx[perm[j]]])
                for i in range(len(idx))
                for j in range(i + 1, len(idx))
            )
            vals = tuple(_ekey(spec, ob.values[perm[i]]) for i in range(len(idx)))
            key = (mat, vals)
            if best is None or key < best:
                best = key
        return (len(idx), best)

    def complete_scheme_classes(self, max_base: Optional[int] = None) -> List[Obligation]:
        """One representative per class whose instances were all realized."""
        bound = max_base if max_base is not None else self.max_base
        pending_keys = {self.scheme_key(ob) for ob in self.pending}
        reps: Dict = {}
        for ob in self.realized:
            if len(ob.labels) > bound:
                continue
            key = self.scheme_key(ob)
            if key not in pending_keys and key not in reps:
                reps[key] = ob
        return [reps[k] for k in sorted(reps)]


def _vkey(v: ExtendedValue):
    return (v.point is None, v.point if v.point is not None else 0, v.above)


def _ekey(spec, e):
    return spec.index_of(e) if spec.is_finite_kind() else e


def _working_spec(
    spec: DistanceMonoidSpec, denominator: Optional[int], max_value
) -> DistanceMonoidSpec:
    """The finite submonoid growth happens over.

    Finite and lattice carriers are used as they stand; a dense carrier is
    restricted to the multiples of 1/denominator up to a bound, which must
    itself be a sum-complete carrier (it is for the supported shapes).
    """
    if spec.is_finite_kind() or spec.carrier.is_finite() or spec.carrier.lattice is not None:
        return spec
    if denominator is None:
        raise PreconditionError(
            "dense carrier: pass a denominator bound for growth"
        )
    cap = max_value if max_value is not None else spec.carrier.upper_bound()
    if cap is None:
        raise PreconditionError("unbounded dense carrier: pass a value bound")
    cap = as_fraction(cap)
    comps = []
    for c in spec.carrier.components:
        hi = cap if (c.hi is None or c.hi > cap) else c.hi
        hi_closed = True if (c.hi is None or c.hi > cap) else c.hi_closed
        comps.append((c.lo, c.lo_closed, hi, hi_closed))
    carrier = IntervalUnionCarrier(comps, lattice=Fraction(1, denominator))
    return DistanceMonoidSpec(kind=spec.kind, carrier=carrier)


def grow_generic(
    spec: DistanceMonoidSpec,
    target_size: int,
    seed: int = 0,
    max_base: int = 3,
    denominator: Optional[int] = None,
    max_value=None,
) -> GrowthResult:
    """Grow a finite piece of the generic space by a fair obligation queue.

    Every (subset, profile) obligation with subset size at most max_base
    is enqueued once its subset exists and processed smallest-subset
    first, first-in-first-out within a size; a dequeued obligation is
    realized by an existing witness or by a fresh point whose remaining
    distances are drawn (seeded) from the admissible triangle ranges.
    After the size budget is reached the queue is drained, so unrealized
    obligations are reported rather than dropped.  Deterministic for
    fixed (spec, target_size, seed, max_base).
    """
    if target_size < 1:
        raise PreconditionError("target size must be positive")
    work = _working_spec(spec, denominator, max_value)
    fv = four_values_search(work)
    if not fv.passed:
        raise PreconditionError(f"carrier fails the four-values condition: {fv.witness}")
    pool = katetov_value_pool(work)
    rng = random.Random(seed)
    space = make_space(work, ["p0"], {})
    queues: Dict[int, deque] = {size: deque() for size in range(1, max_base + 1)}
    result = GrowthResult(space, max_base=max_base, work_spec=work)

    def enqueue_batch(new_point: str):
        others = [p for p in result.space.points if p != new_point]
        for size in range(1, max_base + 1):
            batch = []
            for rest in combinations(others, size - 1):
                labels = tuple(sorted(rest + (new_point,)))
                sub = result.space.restrict(labels)
                for combo in product(pool, repeat=size):
                    vals = dict(zip(labels, combo))
                    if check_katetov(sub, vals) is None:
                        batch.append(Obligation(labels, combo))
            rng.shuffle(batch)
            queues[size].extend(batch)

    def pop() -> Optional[Obligation]:
        for size in range(1, max_base + 1):
            if queues[size]:
                return queues[size].popleft()
        return None

    def satisfied(ob: Obligation) -> bool:
        targets = [embed(work, v) for v in ob.values]
        for y in result.space.points:
            if y in ob.labels:
                continue
            if all(result.space.d(y, p) == t for p, t in zip(ob.labels, targets)):
                return True
        return False

    enqueue_batch("p0")
    while True:
        ob = pop()
        if ob is None:
            if result.space.size() >= target_size:
                break
            # queue drained early: pad with a fresh realization
            ob = Obligation((result.space.points[-1],), (pool[0],))
        elif satisfied(ob):
            result.realized.append(ob)
            continue
        elif result.space.size() >= target_size:
            result.pending.append(ob)
            continue
        label = f"p{result.space.size()}"
        result.space = _extend_with_fill(work, result.space, ob, label, rng, pool)
        result.realized.append(ob)
        enqueue_batch(label)
    if work is not spec:
        entries = {
            (a, b): embed(spec, _element(work, result.space.d(a, b)))
            for a, b in combinations(result.space.points, 2)
        }
        result.space = make_space(spec, result.space.points, entries)
    return result


def _extend_with_fill(work, space, ob: Obligation, label: str, rng, pool) -> FiniteMetricSpace:
    """Add a point with prescribed distances on the obligation's subset.

    Remaining distances are chosen one point at a time from the exact
    admissible range against everything already placed; the four-values
    condition keeps that range nonempty, and the seeded draw keeps runs
    reproducible while spreading the free values.
    """
    cross: Dict[str, ExtendedValue] = {
        p: embed(work, v) for p, v in zip(ob.labels, ob.values)
    }
    for u in sorted(p for p in space.points if p not in cross):
        lo = zero_value(work)
        hi = omega_value(work)
        for w in sorted(cross):
            dv = cross[w]
            dwu = space.d(w, u)
            d_lo = star_diff(work, dv, dwu)
            d_hi = star_add(work, dv, dwu)
            if compare_cuts(work, d_lo, lo) > 0:
                lo = d_lo
            if compare_cuts(work, d_hi, hi) < 0:
                hi = d_hi
        cands = [
            e
            for e in pool
            if value_le(work, lo, embed(work, e)) and value_le(work, embed(work, e), hi)
        ]
        if not cands:  # pragma: no cover - four-values keeps the range nonempty
            raise PreconditionError(f"no admissible distance from {label} to {u}")
        cross[u] = embed(work, rng.choice(cands))
    return space.with_point(label, cross)


# -- the witness construction ----------------------------------------------------


@dataclass
class WitnessFailure:
    condition: str
    detail: tuple

    def __bool__(self):
        return False


def realize_witness(
    spec: DistanceMonoidSpec,
    tuple_space: FiniteMetricSpace,
    targets: Approximation,
    z_label: str = Z_LABEL,
):
    """Distances from a concrete tuple to a new point, within target intervals.

    Checks the two compatibility hypotheses (pair bounds below sums of
    point bounds; lower point bounds reachable past any pair bound); on
    success returns elements s_i with each (d(b_i,b_k), s_i, s_k) a
    triangle and each s_i inside its interval, processing points in
    increasing order of upper bound.
    """
    if targets.kind != "pairs":
        raise PreconditionError("targets must be a pairwise approximation")
    pts = list(tuple_space.points)
    for p in pts:
        iv = targets.get_pair(p, z_label)
        if iv.zero or iv.hi.point is None:
            return WitnessFailure("standard", (p,))
    for a, b in combinations(pts, 2):
        iv = targets.get_pair(a, b)
        if iv.hi.point is None:
            return WitnessFailure("standard", (a, b))
        if not interval_contains(spec, iv, tuple_space.d(a, b)):
            return WitnessFailure("base", (a, b))
    up = {p: _element(spec, targets.get_pair(p, z_label).hi) for p in pts}
    low = {p: _element(spec, targets.get_pair(p, z_label).lo) for p in pts}
    for a in pts:
        for b in pts:
            if a == b:
                continue
            iv = targets.get_pair(a, b)
            hi_ab = _element(spec, iv.hi)
            if not spec.le(hi_ab, op_add(spec, up[a], up[b])):
                return WitnessFailure("(i)", (a, b))
            if _exists_breaking_t(spec, _element(spec, iv.lo), low[a], up[b]):
                return WitnessFailure("(ii)", (a, b))
    order = sorted(pts, key=lambda p: (_ekey(spec, up[p]), p))
    s: Dict[str, object] = {}
    for k, p in enumerate(order):
        best = up[p]
        for q in order[:k]:
            cand = op_add(spec, s[q], _element(spec, tuple_space.d(q, p)))
            if spec.le(cand, best) and cand != best:
                best = cand
        s[p] = best
    for k, p in enumerate(order):
        if not (_lt(spec, low[p], s[p]) and spec.le(s[p], up[p])):  # pragma: no cover
            raise PreconditionError("witness construction broke its bounds")
        for q in order[:k]:
            if not ambient_triangle(
                spec, _element(spec, tuple_space.d(q, p)), s[q], s[p]
            ):  # pragma: no cover
                raise PreconditionError("witness construction broke a triangle")
    return [s[p] for p in pts]


def _element(spec, v: ExtendedValue):
    if v.point is None or v.kind != "principal":
        raise PreconditionError(f"{v} is not a carrier element")
    return spec.elements[v.point] if spec.is_finite_kind() else v.point


def _lt(spec, a, b) -> bool:
    return spec.le(a, b) and a != b


def _exists_breaking_t(spec, pair_lo, point_lo, point_hi) -> bool:
    """Is there t above the pair's lower bound with t + hi(b) <= lo(a)?"""
    if spec.is_finite_kind() or (not spec.is_finite_kind() and spec.carrier.is_finite()):
        for t in spec.all_elements():
            if _lt(spec, pair_lo, t) and spec.le(op_add(spec, t, point_hi), point_lo):
                return True
        return False
    car = spec.carrier
    lo_f, a_f, b_f = pair_lo, point_lo, point_hi
    limit = star_add(spec, normalize_cut(spec, lo_f, above=True), embed(spec, b_f))
    target = embed(spec, a_f)
    cmp = compare_cuts(spec, limit, target)
    if cmp > 0:
        return False
    if cmp < 0:
        return True
    tag, _ = car.min_ge(lo_f, strict=True)
    if tag == "min":
        return True
    if spec.kind == KIND_ADD:
        return not car.dense_above(lo_f + b_f)
    return b_f > lo_f


# -- quantifier-elimination decision ----------------------------------------------


@dataclass
class QEDecision:
    answer: str  # "yes" | "no" | "unknown"
    reason: str
    witness: Optional[object] = None


def qe_decision(spec: DistanceMonoidSpec) -> QEDecision:
    """Decide order-continuity of translations, hence quantifier elimination.

    Classifier flags give fast positive answers; otherwise the witness
    search runs over the carrier's critical cuts, and any witness is
    re-verified before answering no.
    """
    monoid_precondition(spec)
    flags = classify_monoid(spec)
    if flags.right_closed:
        return QEDecision("yes", "right-closed")
    if flags.ultrametric:
        return QEDecision("yes", "ultrametric")
    if flags.group_like:
        return QEDecision("yes", "group-like")
    w = find_qe_witness(spec)
    if w is not None:
        if not verify_qe_witness(spec, w):  # pragma: no cover
            raise PreconditionError("witness failed re-verification")
        return QEDecision("no", "translation discontinuity", witness=w)
    return QEDecision("yes", "continuity verified on critical cuts")


# -- axiom generation --------------------------------------------------------------


def generate_axioms(
    spec: DistanceMonoidSpec,
    size_bound: int = 2,
    fragment: Optional[Sequence] = None,
    denominator: Optional[int] = None,
    max_value=None,
) -> List[formulas.Formula]:
    """Distance-axiom instances plus one-point-extension axioms.

    The extension axioms are emitted over finite carriers only, one per
    isomorphism class of base space (up to size_bound) and profile, using
    the tightest intervals.
    """
    if fragment is None and not spec.is_finite_kind() and not spec.carrier.is_finite():
        if denominator is None:
            raise PreconditionError("dense carrier: pass a fragment or denominator")
        fragment = spec.carrier.fragment(denominator, max_value)
    out = list(formulas.instantiate_ms_axioms(spec, fragment))
    if spec.is_finite_kind() or spec.carrier.is_finite():
        out.extend(extension_axioms(spec, size_bound))
    return out


def extension_axioms(spec: DistanceMonoidSpec, size_bound: int) -> List[formulas.Formula]:
    out = []
    for base in _base_spaces(spec, size_bound):
        for kmap in enumerate_katetov(spec, base):
            scheme = canonical_scheme(spec, base, kmap)
            out.append(scheme_formula(scheme))
    return out


def _base_spaces(spec, size_bound: int) -> List[FiniteMetricSpace]:
    nonzero = (
        list(spec.elements[1:])
        if spec.is_finite_kind()
        else [x for x in spec.carrier.members() if x > 0]
    )
    reps = []
    seen = set()
    for n in range(1, size_bound + 1):
        labels = [f"q{i}" for i in range(n)]
        pair_list = list(combinations(labels, 2))
        for combo in product(nonzero, repeat=len(pair_list)):
            entries = dict(zip(pair_list, combo))
            space = make_space(spec, labels, entries)
            if not validate_metric(space).passed:
                continue
            key = _space_iso_key(spec, space)
            if key in seen:
                continue
            seen.add(key)
            reps.append(space)
    return reps


def _space_iso_key(spec, space):
    n = space.size()
    best = None
    for perm in permutations(range(n)):
        mat = tuple(
            _vkey(space.dist[perm[i]][perm[j]])
            for i in range(n)
            for j in range(i + 1, n)
        )
        if best is None or mat < best:
            best = mat
    return (n, best)


def scheme_formula(scheme: ExtensionScheme) -> formulas.Formula:
    """The one-point-extension sentence of a scheme."""
    base = scheme.base
    n = base.size()
    xs = [f"x{i + 1}" for i in range(n)]
    conj = []
    for i in range(n):
        for j in range(i + 1, n):
            iv = scheme.approx.get_pair(base.points[i], base.points[j])
            conj.append(formulas.InInterval(xs[i], xs[j], iv))
    body_c = formulas.conjunction(conj)
    kparts = [
        formulas.InInterval(xs[i], "y", scheme.approx.get_pair(base.points[i], scheme.z_label))
        for i in range(n)
    ]
    body_k = formulas.Exists("y", formulas.conjunction(kparts))
    body = body_k if body_c is None else formulas.Implies(body_c, body_k)
    for x in reversed(xs):
        body = formulas.Forall(x, body)
    return body

"""Exact interval-union subsets of the nonnegative rationals.

A carrier is a finite union of rational intervals, optionally restricted to
the multiples of a positive rational step ("lattice") and with finitely many
points removed.  All order questions (membership, truncated maxima, infima,
density on either side of a point) are decided exactly from the endpoint
data; no floating point is used anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .errors import CarrierViolation

RationalLike = Union[Fraction, int, str]


def as_fraction(value: RationalLike) -> Fraction:
    """Coerce an exact rational representation; floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise CarrierViolation(f"not an exact rational: {value!r}")


def _floor_multiple(q: Fraction, step: Fraction) -> Fraction:
    n = q / step
    return (n.numerator // n.denominator) * step


def _ceil_multiple(q: Fraction, step: Fraction) -> Fraction:
    n = q / step
    return (-((-n.numerator) // n.denominator)) * step


@dataclass(frozen=True)
class Component:
    """One interval of a carrier; ``hi is None`` means unbounded above."""

    lo: Fraction
    lo_closed: bool
    hi: Optional[Fraction]
    hi_closed: bool

    def is_empty(self) -> bool:
        if self.hi is None:
            return False
        if self.lo > self.hi:
            return True
        if self.lo == self.hi:
            return not (self.lo_closed and self.hi_closed)
        return False

    def is_singleton(self) -> bool:
        return self.hi is not None and self.lo == self.hi

    def contains(self, q: Fraction) -> bool:
        if q < self.lo or (q == self.lo and not self.lo_closed):
            return False
        if self.hi is not None:
            if q > self.hi or (q == self.hi and not self.hi_closed):
                return False
        return True


# Results of the order primitives: a tagged pair.  For max_le:
#   ("max", m)  -- the set has maximum m
#   ("lub", t)  -- nonempty, no maximum, least upper bound t (t may or may
#                  not belong to the carrier)
#   ("empty", None)
# min_ge uses tags "min" / "inf" / "empty" symmetrically.
Extremum = tuple


class IntervalUnionCarrier:
    """Normalized interval-union carrier.

    After normalization the components are sorted, pairwise disjoint,
    nonempty and non-adjacent; excluded points are folded in by splitting
    components at them; lattice components are snapped to closed aligned
    intervals.  0 must belong to the carrier.
    """

    __slots__ = ("components", "lattice")

    def __init__(
        self,
        components: Sequence[Component | tuple],
        lattice: Optional[RationalLike] = None,
        excluded: Sequence[RationalLike] = (),
    ):
        step = as_fraction(lattice) if lattice is not None else None
        if step is not None and step <= 0:
            raise CarrierViolation("lattice step must be positive")
        comps = [self._coerce_component(c) for c in components]
        if step is not None:
            comps = [self._snap(c, step) for c in comps]
        comps = [c for c in comps if c is not None and not c.is_empty()]
        for c in comps:
            if c.lo < 0:
                raise CarrierViolation("carrier endpoints must be nonnegative")
        comps.sort(key=lambda c: (c.lo, not c.lo_closed))
        comps = self._merge(comps, step)
        for e in excluded:
            comps = self._remove_point(comps, as_fraction(e), step)
        comps = self._merge(comps, step)
        self.components: tuple = tuple(comps)
        self.lattice: Optional[Fraction] = step
        if not self.member(Fraction(0)):
            raise CarrierViolation("0 must belong to the carrier")

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _coerce_component(c) -> Component:
        if isinstance(c, Component):
            return c
        lo, lo_closed, hi, hi_closed = c
        hi_f = None if hi is None else as_fraction(hi)
        return Component(as_fraction(lo), bool(lo_closed), hi_f, bool(hi_closed) and hi_f is not None)

    @staticmethod
    def _snap(c: Component, step: Fraction) -> Optional[Component]:
        lo = _ceil_multiple(c.lo, step)
        if lo == c.lo and not c.lo_closed:
            lo += step
        if c.hi is None:
            return Component(lo, True, None, False)
        hi = _floor_multiple(c.hi, step)
        if hi == c.hi and not c.hi_closed:
            hi -= step
        if lo > hi:
            return None
        return Component(lo, True, hi, True)

    @staticmethod
    def _merge(comps, step):
        merged = []
        for c in comps:
            if merged:
                p = merged[-1]
                if p.hi is None:
                    # everything after an unbounded component folds into it
                    continue
                touching = (
                    c.lo < p.hi
                    or (c.lo == p.hi and (c.lo_closed or p.hi_closed))
                    or (step is not None and c.lo <= p.hi + step)
                )
                if touching:
                    hi, hi_closed = c.hi, c.hi_closed
                    if c.hi is not None and p.hi is not None and c.hi < p.hi:
                        hi, hi_closed = p.hi, p.hi_closed
                    merged[-1] = Component(p.lo, p.lo_closed, hi, hi_closed if hi is not None else False)
                    continue
            merged.append(c)
        return merged

    @staticmethod
    def _remove_point(comps, e: Fraction, step):
        out = []
        hit = False
        for c in comps:
            if not c.contains(e) or (step is not None and (e / step).denominator != 1):
                out.append(c)
                continue
            hit = True
            if step is not None:
                left = Component(c.lo, True, e - step, True)
                right = Component(e + step, True, c.hi, c.hi_closed)
            else:
                left = Component(c.lo, c.lo_closed, e, False)
                right = Component(e, False, c.hi, c.hi_closed)
            for piece in (left, right):
                if not piece.is_empty():
                    out.append(piece)
        if not hit:
            raise CarrierViolation(f"excluded point {e} does not lie in the carrier")
        return out

    # -- basic queries ---------------------------------------------------------

    def member(self, q: RationalLike) -> bool:
        q = as_fraction(q)
        if q < 0:
            return False
        if self.lattice is not None and (q / self.lattice).denominator != 1:
            return False
        return any(c.contains(q) for c in self.components)

    def require_member(self, q: RationalLike) -> Fraction:
        q = as_fraction(q)
        if not self.member(q):
            raise CarrierViolation(f"{q} is not in the carrier")
        return q

    def upper_bound(self) -> Optional[Fraction]:
        """Rational supremum of the carrier, or None when unbounded."""
        return self.components[-1].hi

    def max_element(self) -> Optional[Fraction]:
        last = self.components[-1]
        if last.hi is not None and last.hi_closed:
            return last.hi
        return None

    def is_unbounded(self) -> bool:
        return self.components[-1].hi is None

    # -- order primitives ------------------------------------------------------

    def max_le(self, q: Fraction, strict: bool = False) -> Extremum:
        """Supremum data of {x in carrier : x <= q} (or < q when strict)."""
        for c in reversed(self.components):
            below_lo = q < c.lo or (q == c.lo and (strict or not c.lo_closed))
            if below_lo:
                continue
            if self.lattice is not None:
                m = _floor_multiple(q, self.lattice)
                if strict and m == q:
                    m -= self.lattice
                if c.hi is not None and m > c.hi:
                    m = c.hi
                if m < c.lo:
                    continue
                return ("max", m)
            if c.hi is None or c.hi > q:
                # the bound falls inside this component
                if not strict and c.contains(q):
                    return ("max", q)
                if q > c.lo:
                    return ("lub", q)
                continue
            if c.hi == q:
                if strict:
                    if c.lo < q:
                        return ("lub", q)
                    continue
                if c.hi_closed:
                    return ("max", q)
                if c.lo < q:
                    return ("lub", q)
                continue
            # whole component lies below the bound
            if c.hi_closed:
                return ("max", c.hi)
            return ("lub", c.hi)
        return ("empty", None)

    def min_ge(self, q: Fraction, strict: bool = False) -> Extremum:
        """Infimum data of {x in carrier : x >= q} (or > q when strict)."""
        for c in self.components:
            if c.hi is not None:
                above_hi = q > c.hi or (q == c.hi and (strict or not c.hi_closed))
                if above_hi:
                    continue
            if self.lattice is not None:
                m = _ceil_multiple(q, self.lattice)
                if strict and m == q:
                    m += self.lattice
                if m < c.lo:
                    m = c.lo
                if c.hi is not None and m > c.hi:
                    continue
                return ("min", m)
            if c.lo > q:
                # whole component lies above the bound
                if c.lo_closed:
                    return ("min", c.lo)
                return ("inf", c.lo)
            if not strict and c.contains(q):
                return ("min", q)
            # want points strictly above q inside this component
            if c.hi is None or c.hi > q:
                return ("inf", q)
            continue
        return ("empty", None)

    def dense_above(self, q: Fraction) -> bool:
        """True when the carrier has points in (q, q+d) for every d > 0."""
        return self.min_ge(q, strict=True) == ("inf", q)

    def dense_below(self, q: Fraction) -> bool:
        return self.max_le(q, strict=True) == ("lub", q)

    def pick_in(
        self,
        lo: Fraction,
        lo_strict: bool,
        hi: Optional[Fraction],
        hi_strict: bool,
    ) -> Optional[Fraction]:
        """A deterministic carrier member in the given range, or None.

        Prefers the minimum when one exists, then the smallest integer,
        then a midpoint.
        """
        def fits(x: Fraction) -> bool:
            if hi is None:
                return True
            return x < hi or (x == hi and not hi_strict)

        tag, t = self.min_ge(lo, strict=lo_strict)
        if tag == "empty":
            return None
        if tag == "min":
            return t if fits(t) else None
        # dense just above t: locate the component supplying those points
        comp = None
        for c in self.components:
            if (c.hi is None or c.hi > t) and (c.lo < t or c.lo == t):
                if c.contains(t) or (c.lo == t and not c.lo_closed):
                    comp = c
                    break
        if comp is None:  # pragma: no cover - min_ge guarantees existence
            return None
        ub: Optional[Fraction] = comp.hi
        ub_strict = not comp.hi_closed
        if hi is not None and (ub is None or hi < ub or (hi == ub and hi_strict)):
            ub, ub_strict = hi, hi_strict
        if ub is not None and (ub < t or (ub == t)):
            # nothing strictly above t fits under the bound
            return None
        n = Fraction(t.numerator // t.denominator + 1)
        if n > t and (ub is None or n < ub or (n == ub and not ub_strict)):
            if self.member(n):
                return n
        if ub is None:
            cand = t + 1
        else:
            cand = (t + ub) / 2
        return cand if self.member(cand) and fits(cand) else None

    # -- enumeration -----------------------------------------------------------

    def is_finite(self) -> bool:
        if self.is_unbounded():
            return False
        if self.lattice is not None:
            return True
        return all(c.is_singleton() for c in self.components)

    def members(self) -> list:
        """All elements of a finite carrier, ascending."""
        if not self.is_finite():
            raise CarrierViolation("carrier is infinite")
        out = []
        for c in self.components:
            if self.lattice is None:
                out.append(c.lo)
            else:
                x = c.lo
                while x <= c.hi:
                    out.append(x)
                    x += self.lattice
        return out

    def fragment(self, denominator: int, cap: Optional[RationalLike] = None) -> list:
        """Members of the carrier among multiples of 1/denominator up to cap.

        The cap defaults to the carrier's rational supremum and is required
        when the carrier is unbounded.
        """
        if denominator <= 0:
            raise CarrierViolation("denominator must be positive")
        if cap is None:
            cap = self.upper_bound()
            if cap is None:
                raise CarrierViolation("unbounded carrier needs an explicit bound")
        cap = as_fraction(cap)
        step = Fraction(1, denominator)
        out = []
        x = Fraction(0)
        while x <= cap:
            if self.member(x):
                out.append(x)
            x += step
        return out

    def boundary_points(self) -> list:
        """Finite endpoints of all components (plus 0), sorted and deduped."""
        pts = {Fraction(0)}
        for c in self.components:
            pts.add(c.lo)
            if c.hi is not None:
                pts.add(c.hi)
        return sorted(pts)

    def sample_members(self, rng, count: int) -> list:
        """Deterministic pseudo-random members (seeded rng), with repeats."""
        out = []
        comps = self.components
        for _ in range(count):
            c = comps[rng.randrange(len(comps))]
            if self.lattice is not None:
                span = 8 if c.hi is None else int((c.hi - c.lo) / self.lattice)
                out.append(c.lo + self.lattice * rng.randint(0, max(span, 0)))
            elif c.is_singleton():
                out.append(c.lo)
            else:
                hi = c.hi if c.hi is not None else c.lo + 8
                num = rng.randint(1, 63)
                x = c.lo + (hi - c.lo) * Fraction(num, 64)
                out.append(x if self.member(x) else c.lo if c.lo_closed and self.member(c.lo) else x)
        return [x for x in out if self.member(x)]

    # -- misc ------------------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, IntervalUnionCarrier)
            and self.components == other.components
            and self.lattice == other.lattice
        )

    def __hash__(self):
        return hash((self.components, self.lattice))

    def __repr__(self):
        parts = []
        for c in self.components:
            lb = "[" if c.lo_closed else "("
            rb = "]" if c.hi_closed else ")"
            hi = "inf" if c.hi is None else str(c.hi)
            parts.append(f"{lb}{c.lo},{hi}{rb}")
        lat = f" step {self.lattice}" if self.lattice is not None else ""
        return f"Carrier({' u '.join(parts)}{lat})"


def from_points(points: Sequence[RationalLike]) -> IntervalUnionCarrier:
    """Finite rational carrier given by an explicit list of points."""
    pts = sorted({as_fraction(p) for p in points})
    comps = [Component(p, True, p, True) for p in pts]
    return IntervalUnionCarrier(comps)

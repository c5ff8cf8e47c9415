"""Exact Fourier-Motzkin elimination with strict-inequality bookkeeping.

A constraint is (coeffs, strict, rhs) meaning sum(c_i * x_i) <= rhs, or
< rhs when strict.  Everything is Fraction arithmetic; solve() returns a
satisfying rational point or None.  Constraints are normalized and
deduplicated after every elimination step and variables are eliminated in
a cheapest-first order, which keeps the desk-scale systems produced by
the metric solvers small.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Tuple

Constraint = Tuple[Tuple[Fraction, ...], bool, Fraction]


def _normalize(coeffs, strict, rhs) -> Optional[Constraint]:
    """Scale so the first nonzero coefficient is +-1; None if trivial."""
    lead = next((c for c in coeffs if c != 0), None)
    if lead is None:
        if rhs < 0 or (rhs == 0 and strict):
            return ("infeasible",)  # type: ignore[return-value]
        return None
    scale = abs(lead)
    return (tuple(c / scale for c in coeffs), strict, rhs / scale)


def _tighten(table: Dict, c: Constraint) -> bool:
    """Insert keeping only the strongest rhs per coefficient vector."""
    coeffs, strict, rhs = c
    old = table.get(coeffs)
    if old is None or rhs < old[1] or (rhs == old[1] and strict and not old[0]):
        table[coeffs] = (strict, rhs)
    return True


def _eliminate(constraints: List[Constraint], var: int) -> Optional[List[Constraint]]:
    pos, neg, rest = [], [], []
    for c in constraints:
        coeff = c[0][var]
        if coeff > 0:
            pos.append(c)
        elif coeff < 0:
            neg.append(c)
        else:
            rest.append(c)
    table: Dict = {}
    for c in rest:
        _tighten(table, c)
    for cp, sp, bp in pos:
        ap = cp[var]
        for cn, sn, bn in neg:
            an = -cn[var]
            coeffs = tuple(
                cn[i] * ap + cp[i] * an if i != var else Fraction(0)
                for i in range(len(cp))
            )
            norm = _normalize(coeffs, sp or sn, bn * ap + bp * an)
            if norm is None:
                continue
            if norm[0] == "infeasible":
                return None
            _tighten(table, norm)
    return [(coeffs, strict, rhs) for coeffs, (strict, rhs) in table.items()]


def solve(constraints: List[Constraint], nvars: int) -> Optional[List[Fraction]]:
    """Feasibility with witness extraction, or None when inconsistent."""
    current: List[Constraint] = []
    for coeffs, strict, rhs in constraints:
        norm = _normalize(coeffs, strict, rhs)
        if norm is None:
            continue
        if norm[0] == "infeasible":
            return None
        current.append(norm)
    remaining = list(range(nvars))
    stack: List[Tuple[int, List[Constraint]]] = []
    while remaining:
        def cost(v):
            p = sum(1 for c in current if c[0][v] > 0)
            n = sum(1 for c in current if c[0][v] < 0)
            return p * n - p - n
        var = min(remaining, key=cost)
        remaining.remove(var)
        stack.append((var, current))
        current = _eliminate(current, var)
        if current is None:
            return None
    values: List[Optional[Fraction]] = [None] * nvars
    for var, system in reversed(stack):
        lo = hi = None
        lo_strict = hi_strict = False
        for coeffs, strict, rhs in system:
            a = coeffs[var]
            if a == 0:
                continue
            acc = rhs
            usable = True
            for j, cj in enumerate(coeffs):
                if j == var or cj == 0:
                    continue
                if values[j] is None:
                    usable = False
                    break
                acc -= cj * values[j]
            if not usable:  # pragma: no cover - assignment order prevents this
                continue
            bound = acc / a
            if a > 0:
                if hi is None or bound < hi or (bound == hi and strict):
                    hi, hi_strict = bound, strict
            else:
                if lo is None or bound > lo or (bound == lo and strict):
                    lo, lo_strict = bound, strict
        values[var] = _pick(lo, lo_strict, hi, hi_strict)
        if values[var] is None:  # pragma: no cover - elimination guarantees a value
            return None
    return values  # type: ignore[return-value]


def _pick(lo, lo_strict, hi, hi_strict) -> Optional[Fraction]:
    if lo is None and hi is None:
        return Fraction(0)
    if lo is None:
        return hi - 1 if hi_strict else hi
    if hi is None:
        return lo + 1 if lo_strict else lo
    if lo > hi or (lo == hi and (lo_strict or hi_strict)):
        return None
    if not hi_strict:
        return hi
    if not lo_strict:
        return lo
    return (lo + hi) / 2

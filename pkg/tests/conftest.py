"""Shared generators and brute-force oracles for the test suite."""
from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

import pytest

from distmono import cuts, monoid, spaces


def truncated_sum_oracle(points, r, s):
    """max{x in points : x <= r + s} by direct enumeration; None if empty."""
    below = [x for x in points if x <= r + s]
    return max(below) if below else None


def triangle_oracle(r, s, t):
    """Plain rational triangle test in (Q>=0, +)."""
    return r <= s + t and s <= r + t and t <= r + s


def four_values_oracle(points, u1, u2, v1, v2):
    """Definitional check over an explicit rational set inside (Q>=0, +)."""
    has_s = any(triangle_oracle(s, u1, u2) and triangle_oracle(s, v1, v2) for s in points)
    if not has_s:
        return True
    return any(triangle_oracle(t, u1, v1) and triangle_oracle(t, u2, v2) for t in points)


def associativity_oracle(points):
    """Exhaustive associativity of the truncated sum over a rational set."""
    for r in points:
        for s in points:
            for t in points:
                left = truncated_sum_oracle(points, truncated_sum_oracle(points, r, s), t)
                right = truncated_sum_oracle(points, r, truncated_sum_oracle(points, s, t))
                if left != right:
                    return (r, s, t)
    return None


def all_cuts(spec):
    """Every cut of a finite or bounded-lattice carrier (plus omega)."""
    out = [cuts.embed(spec, e) for e in spec.all_elements()]
    om = cuts.omega_value(spec)
    if all(cuts.compare_cuts(spec, v, om) != 0 for v in out):
        out.append(om)
    return out


def star_diff_oracle(spec, a, b):
    """Minimum over all cuts satisfying the defining conditions, by scan."""
    best = None
    for x in all_cuts(spec):
        if cuts.value_le(spec, a, cuts.star_add(spec, b, x)) and cuts.value_le(
            spec, b, cuts.star_add(spec, a, x)
        ):
            if best is None or cuts.compare_cuts(spec, x, best) < 0:
                best = x
    return best


def random_metric_space(spec, labels, rng):
    """A valid random space: random entries tightened by path closure."""
    if spec.is_finite_kind():
        elems = list(spec.elements)
        nonzero = elems[1:]
        idx = {e: i for i, e in enumerate(elems)}
    else:
        elems = spec.carrier.members()
        nonzero = [e for e in elems if e > 0]
    n = len(labels)
    d = [[spec.zero()] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d[i][j] = d[j][i] = rng.choice(nonzero)
    ultra = spec.kind == monoid.KIND_MAX
    for m in range(n):
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                if ultra:
                    cand = max(d[i][m], d[m][j])
                else:
                    cand = monoid.op_add(spec, d[i][m], d[m][j])
                better = (
                    idx[cand] < idx[d[i][j]]
                    if spec.is_finite_kind()
                    else cand < d[i][j]
                )
                if better:
                    d[i][j] = d[j][i] = cand
    entries = {
        (labels[i], labels[j]): d[i][j] for i in range(n) for j in range(i + 1, n)
    }
    return spaces.make_space(spec, labels, entries)


@pytest.fixture
def rng():
    return random.Random(20240811)


FINITE_CORPUS_BASE = [
    Fraction(1, 2),
    Fraction(1),
    Fraction(3, 2),
    Fraction(2),
    Fraction(5, 2),
    Fraction(3),
    Fraction(7, 2),
    Fraction(4),
]


def finite_carrier_corpus(max_extra=4):
    """Every rational carrier {0} u P with P a subset of the base, |P| <= max_extra."""
    out = []
    for k in range(0, max_extra + 1):
        for extra in combinations(FINITE_CORPUS_BASE, k):
            out.append([Fraction(0)] + list(extra))
    return out

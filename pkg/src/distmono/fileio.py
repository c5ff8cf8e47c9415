"""JSON interchange for monoids, spaces, schemes, and approximations.

Rationals travel as strings ("7/2", "3"); an unbounded upper endpoint is
the string "inf".  Validation errors carry a JSON-path-style position.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Dict, List, Optional

from .carrier import IntervalUnionCarrier, as_fraction
from .cuts import format_value, parse_value
from .errors import CarrierViolation
from .monoid import KIND_ADD, KIND_FINITE, KIND_MAX, DistanceMonoidSpec, builtin
from .spaces import Approximation, FiniteMetricSpace, interval, make_space


class SchemaError(CarrierViolation):
    pass


def _fail(path: str, message: str):
    raise SchemaError(f"{path}: {message}")


def _need(obj: dict, key: str, path: str):
    if key not in obj:
        _fail(path, f"missing field {key!r}")
    return obj[key]


def _rational(value, path: str) -> Fraction:
    if not isinstance(value, (str, int)):
        _fail(path, f"expected a rational string, got {type(value).__name__}")
    try:
        return as_fraction(value)
    except (CarrierViolation, ValueError, ZeroDivisionError):
        _fail(path, f"not a rational: {value!r}")


def monoid_from_dict(obj, path: str = "monoid") -> DistanceMonoidSpec:
    if isinstance(obj, str):
        return builtin(obj)
    if not isinstance(obj, dict):
        _fail(path, "expected an object or builtin name")
    kind = _need(obj, "kind", path)
    if kind == KIND_FINITE:
        elements = _need(obj, "elements", path)
        table = _need(obj, "table", path)
        if not isinstance(elements, list) or not all(isinstance(e, str) for e in elements):
            _fail(f"{path}.elements", "expected a list of labels")
        if not isinstance(table, list):
            _fail(f"{path}.table", "expected a matrix of indices")
        rows = []
        for i, row in enumerate(table):
            if not isinstance(row, list) or not all(isinstance(v, int) for v in row):
                _fail(f"{path}.table[{i}]", "expected a list of indices")
            rows.append(tuple(row))
        return DistanceMonoidSpec(kind=KIND_FINITE, elements=tuple(elements), table=tuple(rows))
    if kind in (KIND_ADD, KIND_MAX):
        raw = _need(obj, "intervals", path)
        if not isinstance(raw, list) or not raw:
            _fail(f"{path}.intervals", "expected a nonempty list")
        comps = []
        for i, c in enumerate(raw):
            cpath = f"{path}.intervals[{i}]"
            if not isinstance(c, dict):
                _fail(cpath, "expected an object")
            lo = _rational(_need(c, "lo", cpath), f"{cpath}.lo")
            hi_raw = _need(c, "hi", cpath)
            hi = None if hi_raw == "inf" else _rational(hi_raw, f"{cpath}.hi")
            comps.append(
                (lo, bool(c.get("lo_closed", True)), hi, bool(c.get("hi_closed", hi is not None)))
            )
        lattice = obj.get("lattice")
        if lattice is not None:
            lattice = _rational(lattice, f"{path}.lattice")
        excluded = [
            _rational(e, f"{path}.excluded[{i}]") for i, e in enumerate(obj.get("excluded", []))
        ]
        try:
            carrier = IntervalUnionCarrier(comps, lattice=lattice, excluded=excluded)
        except CarrierViolation as exc:
            _fail(path, str(exc))
        return DistanceMonoidSpec(kind=kind, carrier=carrier)
    _fail(f"{path}.kind", f"unknown kind {kind!r}")


def monoid_to_dict(spec: DistanceMonoidSpec) -> dict:
    if spec.is_finite_kind():
        return {
            "kind": KIND_FINITE,
            "elements": list(spec.elements),
            "table": [list(r) for r in spec.table],
        }
    out = {"kind": spec.kind, "intervals": []}
    for c in spec.carrier.components:
        out["intervals"].append(
            {
                "lo": str(c.lo),
                "lo_closed": c.lo_closed,
                "hi": "inf" if c.hi is None else str(c.hi),
                "hi_closed": c.hi_closed,
            }
        )
    if spec.carrier.lattice is not None:
        out["lattice"] = str(spec.carrier.lattice)
    return out


def load_monoid(path: str) -> DistanceMonoidSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    return monoid_from_dict(obj, path="monoid")


def space_from_dict(obj, path: str = "space", spec: Optional[DistanceMonoidSpec] = None) -> FiniteMetricSpace:
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    if spec is None:
        spec = monoid_from_dict(_need(obj, "monoid", path), f"{path}.monoid")
    points = _need(obj, "points", path)
    if not isinstance(points, list) or not all(isinstance(p, str) for p in points):
        _fail(f"{path}.points", "expected a list of labels")
    raw = _need(obj, "distances", path)
    if not isinstance(raw, list):
        _fail(f"{path}.distances", "expected a list of [a, b, value] triples")
    entries: Dict = {}
    for i, item in enumerate(raw):
        ipath = f"{path}.distances[{i}]"
        if not (isinstance(item, list) and len(item) == 3):
            _fail(ipath, "expected [a, b, value]")
        a, b, v = item
        if a not in points or b not in points:
            _fail(ipath, f"unknown point in {item[:2]}")
        try:
            entries[(a, b)] = parse_value(spec, str(v))
        except CarrierViolation as exc:
            _fail(f"{ipath}[2]", str(exc))
    try:
        return make_space(spec, points, entries)
    except CarrierViolation as exc:
        _fail(path, str(exc))


def load_space(path: str, spec: Optional[DistanceMonoidSpec] = None) -> FiniteMetricSpace:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    return space_from_dict(obj, path="space", spec=spec)


def space_to_dict(space: FiniteMetricSpace, include_monoid: bool = True) -> dict:
    spec = space.monoid
    out = {"points": list(space.points), "distances": []}
    if include_monoid:
        out["monoid"] = monoid_to_dict(spec)
    for i, a in enumerate(space.points):
        for b in space.points[i + 1 :]:
            out["distances"].append([a, b, format_value(spec, space.d(a, b))])
    return out


def approximation_from_dict(spec, obj, path: str = "approx") -> Approximation:
    """{"values": [[value, lo, hi], ...]} or {"pairs": [[a, b, lo, hi], ...]}."""
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    if "values" in obj:
        out = Approximation(spec, "values")
        for i, item in enumerate(obj["values"]):
            ipath = f"{path}.values[{i}]"
            if not (isinstance(item, list) and len(item) == 3):
                _fail(ipath, "expected [value, lo, hi]")
            v, lo, hi = (str(x) for x in item)
            try:
                out.set_value(parse_value(spec, v), _parse_interval(spec, lo, hi))
            except CarrierViolation as exc:
                _fail(ipath, str(exc))
        return out
    if "pairs" in obj:
        out = Approximation(spec, "pairs")
        for i, item in enumerate(obj["pairs"]):
            ipath = f"{path}.pairs[{i}]"
            if not (isinstance(item, list) and len(item) == 4):
                _fail(ipath, "expected [a, b, lo, hi]")
            a, b, lo, hi = (str(x) for x in item)
            try:
                out.set_pair(a, b, _parse_interval(spec, lo, hi))
            except CarrierViolation as exc:
                _fail(ipath, str(exc))
        return out
    _fail(path, "expected a 'values' or 'pairs' field")


def _parse_interval(spec, lo: str, hi: str):
    return interval(spec, _elem(spec, lo), "omega" if hi == "omega" else _elem(spec, hi))


def _elem(spec, text: str):
    return text if spec.is_finite_kind() else as_fraction(text)


def load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from None

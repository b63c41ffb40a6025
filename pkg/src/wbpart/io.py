"""Versioned JSON formats for land instances and solution reports.

Rationals are written as integers when integral and as ``"num/den"``
strings otherwise; floats are rejected on input.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .land import Farmer, LandInstance, LandSolution, Lot
from .model import ModelError, Partition, as_fraction

FORMAT_VERSION = 1


class FormatError(ModelError):
    """Malformed instance or report document."""


def rat(a) -> int | str:
    a = Fraction(a)
    return a.numerator if a.denominator == 1 else f"{a.numerator}/{a.denominator}"


def parse_rat(a) -> Fraction:
    if isinstance(a, bool):
        raise FormatError(f"expected a rational, got {a!r}")
    if isinstance(a, str):
        try:
            return Fraction(a.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"bad rational {a!r}") from exc
    try:
        return as_fraction(a)
    except (ModelError, TypeError) as exc:
        raise FormatError(str(exc)) from exc


def _int(a, what: str) -> int:
    if isinstance(a, bool) or not isinstance(a, int):
        raise FormatError(f"{what} must be an integer, got {a!r}")
    return a


def _get(doc: dict, key: str, what: str):
    if not isinstance(doc, dict) or key not in doc:
        raise FormatError(f"{what}: missing field {key!r}")
    return doc[key]


def instance_to_dict(li: LandInstance) -> dict[str, Any]:
    return {
        "version": FORMAT_VERSION,
        "s": li.s,
        "size_feature_row": li.size_feature_row,
        "units": dict(li.units),
        "farmers": [
            {
                "id": f.id,
                "farmstead": [rat(a) for a in f.farmstead],
                "totals": list(f.totals),
                "deviation": {"lower": [rat(a) for a in f.deviation_lower], "upper": [rat(a) for a in f.deviation_upper]},
            }
            for f in li.farmers
        ],
        "lots": [
            {
                "id": lot.id,
                "location": [rat(a) for a in lot.location],
                "size": lot.size,
                "weight_matrix": [list(row) for row in lot.weight_matrix],
            }
            for lot in li.lots
        ],
        "original": list(li.original.assignment),
    }


def instance_from_dict(doc: dict[str, Any]) -> LandInstance:
    version = _get(doc, "version", "instance")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported instance version {version!r}")
    s = _int(_get(doc, "s", "instance"), "s")
    try:
        farmers = []
        for f in _get(doc, "farmers", "instance"):
            dev = _get(f, "deviation", "farmer")
            farmers.append(
                Farmer(
                    id=_int(_get(f, "id", "farmer"), "farmer id"),
                    farmstead=tuple(parse_rat(a) for a in _get(f, "farmstead", "farmer")),
                    totals=tuple(_int(a, "farmer total") for a in _get(f, "totals", "farmer")),
                    deviation_lower=tuple(parse_rat(a) for a in _get(dev, "lower", "deviation")),
                    deviation_upper=tuple(parse_rat(a) for a in _get(dev, "upper", "deviation")),
                )
            )
        lots = [
            Lot(
                id=_int(_get(lot, "id", "lot"), "lot id"),
                location=tuple(parse_rat(a) for a in _get(lot, "location", "lot")),
                size=_int(_get(lot, "size", "lot"), "lot size"),
                weight_matrix=tuple(tuple(_int(w, "weight") for w in row) for row in _get(lot, "weight_matrix", "lot")),
            )
            for lot in _get(doc, "lots", "instance")
        ]
        if any(len(f.totals) != s for f in farmers):
            raise FormatError(f"farmer totals must have s={s} entries")
        original = Partition(tuple(_int(a, "original entry") for a in _get(doc, "original", "instance")))
        units = tuple(sorted(doc.get("units", {"length": "m", "size": "are"}).items()))
        return LandInstance(
            tuple(lots),
            tuple(farmers),
            original,
            size_feature_row=_int(_get(doc, "size_feature_row", "instance"), "size_feature_row"),
            units=units,
        )
    except TypeError as exc:
        raise FormatError(f"malformed instance: {exc}") from exc


def load_json(path: str) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def dumps(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_instance(path: str) -> LandInstance:
    return instance_from_dict(load_json(path))


def save_instance(li: LandInstance, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(instance_to_dict(li)))


def solution_to_dict(sol: LandSolution) -> dict[str, Any]:
    trace = sol.trace
    return {
        "version": FORMAT_VERSION,
        "objective": sol.objective,
        "model": sol.model,
        "weights": None if sol.weights is None else [rat(w) for w in sol.weights],
        "body": None if sol.body is None else {"inner": sol.body[0], "outer": sol.body[1]},
        "value": rat(sol.value),
        "assignment": list(sol.partition.assignment),
        "per_farmer": [
            {
                "totals": list(f.totals),
                "lower": list(f.lower),
                "upper": list(f.upper),
                "slack_plus": list(f.slack_plus),
                "slack_minus": list(f.slack_minus),
            }
            for f in sol.per_farmer
        ],
        "f2_value": rat(sol.f2_value),
        "approximation_factor": None if sol.approximation_factor is None else rat(sol.approximation_factor),
        "trace_summary": {
            "steps": len(trace.steps),
            "start_objective": rat(trace.start_objective),
            "final_objective": rat(trace.final_objective),
            "graver_basis_size": trace.basis_size,
            "input_bits": sol.input_bits,
        },
        "units": dict(sol.units),
    }

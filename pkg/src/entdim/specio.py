"""Measure spec files: JSON documents with a "type" discriminator.

Schema (see docs/measure_schema.json):
    {"type": "atomic", "positions": [...], "weights": [...]}
    {"type": "grid", "origin": 0.0, "step": 0.001, "values": [...]}
    {"type": "bernoulli", "lambda": 0.25}
    {"type": "mixture", "components": [{"weight": 0.5, "measure": {...}}, ...]}
    {"type": "pushforward", "base": {...},
     "map": {"kind": "affine", "scale": 2.0, "offset": 0.0}}
    map kinds: "affine" (scale, offset), "x_plus_sin" (scale > 1, f = scale*x + sin x)

Round-trips are lossless: dumping a loaded measure reproduces the document.
"""

from __future__ import annotations

import json

import numpy as np

from .measures import (
    Atomic,
    BernoulliConvolution,
    GridDensity,
    LipschitzPushforward,
    MeasureError,
    Mixture,
    map_from_descriptor,
)

__all__ = ["measure_from_dict", "measure_to_dict", "load_measure", "dump_measure"]


def _require(doc, field, types, ctx):
    if field not in doc:
        raise MeasureError(f"{ctx}: missing required field {field!r}")
    value = doc[field]
    if not isinstance(value, types):
        raise MeasureError(f"{ctx}.{field}: expected {types}, got {type(value).__name__}")
    return value


def measure_from_dict(doc, ctx="measure"):
    if not isinstance(doc, dict):
        raise MeasureError(f"{ctx}: expected an object, got {type(doc).__name__}")
    mtype = _require(doc, "type", str, ctx)
    if mtype == "atomic":
        pos = _require(doc, "positions", list, ctx)
        w = _require(doc, "weights", list, ctx)
        return Atomic(np.asarray(pos, dtype=float), np.asarray(w, dtype=float))
    if mtype == "grid":
        origin = _require(doc, "origin", (int, float), ctx)
        step = _require(doc, "step", (int, float), ctx)
        values = _require(doc, "values", list, ctx)
        return GridDensity(float(origin), float(step), np.asarray(values, dtype=float))
    if mtype == "bernoulli":
        lam = _require(doc, "lambda", (int, float), ctx)
        return BernoulliConvolution(float(lam))
    if mtype == "mixture":
        comps = _require(doc, "components", list, ctx)
        parsed = []
        for j, comp in enumerate(comps):
            sub = f"{ctx}.components[{j}]"
            if not isinstance(comp, dict):
                raise MeasureError(f"{sub}: expected an object")
            w = _require(comp, "weight", (int, float), sub)
            parsed.append((float(w), measure_from_dict(_require(comp, "measure", dict, sub), sub)))
        return Mixture(tuple(parsed))
    if mtype == "pushforward":
        base = measure_from_dict(_require(doc, "base", dict, ctx), f"{ctx}.base")
        mp = map_from_descriptor(_require(doc, "map", dict, ctx))
        return LipschitzPushforward(base, mp)
    raise MeasureError(f"{ctx}.type: unknown measure type {mtype!r}")


def measure_to_dict(mu):
    if isinstance(mu, Atomic):
        return {"type": "atomic",
                "positions": [float(x) for x in mu.positions],
                "weights": [float(w) for w in mu.weights]}
    if isinstance(mu, GridDensity):
        return {"type": "grid", "origin": float(mu.origin), "step": float(mu.step),
                "values": [float(v) for v in mu.values]}
    if isinstance(mu, BernoulliConvolution):
        return {"type": "bernoulli", "lambda": float(mu.lam)}
    if isinstance(mu, Mixture):
        return {"type": "mixture",
                "components": [{"weight": float(w), "measure": measure_to_dict(m)}
                               for w, m in mu.components]}
    if isinstance(mu, LipschitzPushforward):
        if mu.map.descriptor is None:
            raise MeasureError("pushforward map has no serializable descriptor")
        return {"type": "pushforward", "base": measure_to_dict(mu.base),
                "map": dict(mu.map.descriptor)}
    raise MeasureError(f"cannot serialize measure type {type(mu).__name__}")


def load_measure(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MeasureError(f"{path}: not valid JSON ({exc})") from exc
    return measure_from_dict(doc)


def dump_measure(mu, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(measure_to_dict(mu), fh, sort_keys=True, indent=2)
        fh.write("\n")

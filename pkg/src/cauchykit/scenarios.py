"""Scenario files: JSON descriptions of runnable experiments.

A scenario names a kind (sf_mas, eigs, sectorial, calderon, cobordism,
continuity), the operator data, and optional pinned expectations.  Matrix
entries are numbers, [re, im] pairs, or x-dependent forms:

* {"poly": [c0, c1, ...]}        sum c_k x^k
* {"trig": [c, [a1, b1], ...]}   c + sum a_m cos(2 pi m x) + b_m sin(2 pi m x)

poly coefficients may be numbers or [re, im]; trig coefficients are real.
"""

from __future__ import annotations

import json
from importlib import resources
from typing import Callable, Optional, Tuple

import jsonschema
import numpy as np

from .errors import ScenarioError
from .symplectic import LagrangianFrame
from .systems import IntervalSystem

KINDS = ("sf_mas", "eigs", "sectorial", "calderon", "cobordism", "continuity")

_ENTRY = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"},
         "minItems": 2, "maxItems": 2},
        {"type": "object", "required": ["poly"],
         "additionalProperties": False,
         "properties": {"poly": {"type": "array",
                                 "items": {"$ref": "#/$defs/scalar"}}}},
        {"type": "object", "required": ["trig"],
         "additionalProperties": False,
         "properties": {"trig": {"type": "array"}}},
    ]
}

SCHEMA = {
    "$defs": {
        "scalar": {"oneOf": [
            {"type": "number"},
            {"type": "array", "items": {"type": "number"},
             "minItems": 2, "maxItems": 2},
        ]},
        "entry": _ENTRY,
        "matrix": {"type": "array",
                   "items": {"type": "array", "items": {"$ref": "#/$defs/entry"}}},
        "system": {
            "type": "object",
            "required": ["n", "j", "b"],
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "j": {"$ref": "#/$defs/matrix"},
                "b": {"$ref": "#/$defs/matrix"},
                "w": {"$ref": "#/$defs/matrix"},
                "symmetric": {"type": "boolean"},
            },
        },
    },
    "type": "object",
    "required": ["name", "kind"],
    "properties": {
        "name": {"type": "string"},
        "kind": {"enum": list(KINDS)},
        "seed": {"type": "integer"},
        "system": {"$ref": "#/$defs/system"},
        "domain": {"oneOf": [{"$ref": "#/$defs/matrix"},
                             {"enum": ["periodic"]}]},
        "direction": {"$ref": "#/$defs/matrix"},
        "coupling": {"type": "object",
                     "properties": {"t0": {"$ref": "#/$defs/matrix"},
                                    "t1": {"$ref": "#/$defs/matrix"}}},
        "b0": {"$ref": "#/$defs/matrix"},
        "j0": {"$ref": "#/$defs/matrix"},
        "t0": {"type": "number"},
        "t1": {"type": "number"},
        "window": {"oneOf": [{"type": "number"},
                             {"type": "array", "items": {"type": "number"},
                              "minItems": 2, "maxItems": 2},
                             {"type": "null"}]},
        "samples": {"type": "integer", "minimum": 3},
        "x_values": {"type": "array", "items": {"type": "number"}},
        "eps": {"type": "array", "items": {"type": "number"}},
        "expect": {"type": "object"},
    },
}


def _scalar(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    return complex(v[0], v[1])


def _entry_fns(e) -> Tuple[Callable, Callable, bool]:
    """(value(x), derivative(x), is_constant) for one matrix entry."""
    if isinstance(e, (int, float)) or (isinstance(e, list)):
        c = _scalar(e)
        return (lambda x: c), (lambda x: 0.0j), True
    if "poly" in e:
        coeffs = np.array([_scalar(c) for c in e["poly"]])
        dcoeffs = coeffs[1:] * np.arange(1, coeffs.size)

        def val(x, c=coeffs):
            return complex(np.polyval(c[::-1], x)) if c.size else 0.0j

        def der(x, c=dcoeffs):
            return complex(np.polyval(c[::-1], x)) if c.size else 0.0j

        return val, der, coeffs.size <= 1
    if "trig" in e:
        terms = e["trig"]
        if not terms or not isinstance(terms[0], (int, float)):
            raise ScenarioError("trig entry needs a leading constant")
        c0 = float(terms[0])
        pairs = [(float(p[0]), float(p[1])) for p in terms[1:]]

        def val(x):
            acc = c0
            for m, (a, b) in enumerate(pairs, start=1):
                acc += a * np.cos(2 * np.pi * m * x) + b * np.sin(2 * np.pi * m * x)
            return complex(acc)

        def der(x):
            acc = 0.0
            for m, (a, b) in enumerate(pairs, start=1):
                w = 2 * np.pi * m
                acc += -a * w * np.sin(w * x) + b * w * np.cos(w * x)
            return complex(acc)

        return val, der, not pairs
    raise ScenarioError(f"unrecognized matrix entry {e!r}")


def matrix_fns(nested, n: int):
    """(fn, dfn, is_constant) for an n x n matrix of entries."""
    if len(nested) != n or any(len(row) != n for row in nested):
        raise ScenarioError(f"matrix is not {n} x {n}")
    table = [[_entry_fns(e) for e in row] for row in nested]
    const = all(c for row in table for _, _, c in row)
    if const:
        m0 = np.array([[v(0.0) for v, _, _ in row] for row in table])
        dz = np.zeros_like(m0)
        return (lambda x: m0), (lambda x: dz), True

    def fn(x):
        return np.array([[v(x) for v, _, _ in row] for row in table])

    def dfn(x):
        return np.array([[d(x) for _, d, _ in row] for row in table])

    return fn, dfn, False


def constant_matrix(nested) -> np.ndarray:
    return np.array([[_scalar(e) for e in row] for row in nested])


def validate(spec: dict):
    try:
        jsonschema.validate(spec, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ScenarioError(f"scenario invalid: {exc.message}") from exc
    kind = spec["kind"]
    needs_system = {"sf_mas": True, "eigs": True, "calderon": True,
                    "continuity": True, "sectorial": False, "cobordism": False}
    if needs_system[kind] and "system" not in spec:
        raise ScenarioError(f"kind {kind} requires a system")
    if kind == "sectorial" and "b0" not in spec:
        raise ScenarioError("sectorial scenarios require b0")
    if kind == "cobordism" and "system" not in spec and (
            "b0" not in spec or "j0" not in spec):
        raise ScenarioError("cobordism scenarios require (j0, b0) or a system")
    if kind in ("sf_mas", "eigs", "continuity") and "domain" not in spec:
        raise ScenarioError(f"kind {kind} requires a domain")
    if kind == "sf_mas" and "direction" not in spec:
        raise ScenarioError("sf_mas scenarios require a direction")
    # randomized kinds must pin their generator
    if kind == "continuity" and "seed" not in spec:
        raise ScenarioError("continuity scenarios require a seed")


def load_scenario(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: not valid JSON ({exc})") from exc
    validate(spec)
    return spec


def bundled_names():
    root = resources.files("cauchykit").joinpath("data/scenarios")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_bundled(name: str) -> dict:
    root = resources.files("cauchykit").joinpath("data/scenarios")
    path = root.joinpath(f"{name}.json")
    if not path.is_file():
        raise ScenarioError(
            f"no bundled scenario {name!r}; available: {', '.join(bundled_names())}"
        )
    spec = json.loads(path.read_text(encoding="utf-8"))
    validate(spec)
    return spec


def build_system(spec: dict) -> IntervalSystem:
    sys_spec = spec["system"]
    n = sys_spec["n"]
    j_fn, dj_fn, _ = matrix_fns(sys_spec["j"], n)
    b_fn, _, _ = matrix_fns(sys_spec["b"], n)
    w_fn = None
    if sys_spec.get("w") is not None:
        w_fn, _, _ = matrix_fns(sys_spec["w"], n)
    return IntervalSystem(
        n=n, j_fn=j_fn, b_fn=b_fn, dj_fn=dj_fn, w_fn=w_fn,
        symmetric=bool(sys_spec.get("symmetric", False)),
        label=spec.get("name", ""))


def build_domain(spec: dict, n: int) -> LagrangianFrame:
    dom = spec["domain"]
    if dom == "periodic":
        eye = np.eye(n)
        return LagrangianFrame.from_columns(np.vstack([eye, eye]) / np.sqrt(2.0))
    frame = constant_matrix(dom)
    if frame.shape != (2 * n, n):
        raise ScenarioError(f"domain frame must be {2 * n} x {n}")
    return LagrangianFrame.from_columns(frame)


def build_direction(spec: dict, n: int):
    fn, _, _ = matrix_fns(spec["direction"], n)
    return fn

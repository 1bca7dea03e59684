"""JSON serialisation of (lab, context, event) triples.

Complex numbers are ``[re, im]`` pairs and matrices are row-major lists of
rows. The document carries ``schema_version: "1"``.
"""

from __future__ import annotations

import json
from typing import Any

import jsonschema
import numpy as np

from ..lab import ConditionedStep, Context, Event, Lab, ReferenceDynamics
from ..linalg import DensityOperator, Factor, KrausChannel, Space
from ..measurement import ReferenceMeasurement

SCHEMA_VERSION = "1"

_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_VECTOR = {"type": "array", "items": _COMPLEX, "minItems": 1}
_MATRIX = {"type": "array", "items": _VECTOR, "minItems": 1}
_FACTOR = {
    "type": "object",
    "required": ["label", "dim"],
    "additionalProperties": False,
    "properties": {
        "label": {"type": "string", "minLength": 1},
        "dim": {"type": "integer", "minimum": 1},
        "sectors": {
            "type": "array",
            "items": {"type": "array", "prefixItems": [{"type": "string"}, {"type": "integer", "minimum": 1}],
                      "items": False, "minItems": 2},
        },
    },
}
_OP = {"oneOf": [_MATRIX, {"type": "object", "required": ["kraus"], "additionalProperties": False,
                            "properties": {"kraus": {"type": "array", "items": _MATRIX, "minItems": 1}}}]}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "labevents scenario file",
    "type": "object",
    "required": ["schema_version", "spaces", "reference", "target", "initial", "event"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "spaces": {"type": "array", "items": _FACTOR, "minItems": 1},
        "environment": {"type": "array", "items": {"type": "string"}},
        "reference": {
            "type": "object",
            "required": ["factor", "labels", "projectors"],
            "additionalProperties": False,
            "properties": {
                "factor": {"type": "string"},
                "labels": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "projectors": {"type": "array", "items": _MATRIX, "minItems": 1},
            },
        },
        "target": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "initial": {
            "type": "object",
            "minProperties": 1,
            "maxProperties": 1,
            "additionalProperties": False,
            "properties": {"matrix": _MATRIX, "vector": _VECTOR},
        },
        "event": {
            "type": "object",
            "required": ["steps"],
            "additionalProperties": False,
            "properties": {
                "name": {"type": "string"},
                "steps": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"oneOf": [
                        {"type": "object", "required": ["kind", "ops"], "additionalProperties": False,
                         "properties": {"kind": {"const": "conditioned"},
                                        "ops": {"type": "object", "additionalProperties": _OP}}},
                        {"type": "object", "required": ["kind", "unitary"], "additionalProperties": False,
                         "properties": {"kind": {"const": "reference_dynamics"}, "unitary": _MATRIX}},
                    ]},
                },
            },
        },
        "continuation": {
            "oneOf": [
                {"type": "null"},
                {"type": "object", "required": ["kraus"], "additionalProperties": False,
                 "properties": {"output_spaces": {"type": "array", "items": _FACTOR, "minItems": 1},
                                "kraus": {"type": "array", "items": _MATRIX, "minItems": 1}}},
            ],
        },
    },
}


class ScenarioFileError(ValueError):
    """Structural problem in a scenario document; ``path`` locates the field."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


def _enc_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _enc_vector(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def _dec(data: list, path: str, ndim: int) -> np.ndarray:
    try:
        arr = np.array(data, dtype=float)
    except ValueError:
        raise ScenarioFileError("ragged array", path) from None
    if arr.ndim != ndim + 1:
        raise ScenarioFileError(f"expected a {'matrix' if ndim == 2 else 'vector'} of [re, im] pairs", path)
    return arr[..., 0] + 1j * arr[..., 1]


def _enc_factor(f: Factor) -> dict:
    out: dict[str, Any] = {"label": f.label, "dim": f.dim}
    if f.sectors:
        out["sectors"] = [[name, size] for name, size in f.sectors]
    return out


def _dec_space(items: list, path: str) -> Space:
    try:
        return Space(tuple(Factor(x["label"], x["dim"], tuple((s[0], s[1]) for s in x.get("sectors", ())))
                           for x in items))
    except ValueError as exc:
        raise ScenarioFileError(str(exc), path) from None


def dump(lab: Lab, ctx: Context, event: Event, name: str = "") -> dict:
    space = ctx.space
    env = [x for x in space.labels if x != lab.reference and x not in lab.target]
    steps = []
    for step in event.steps:
        if isinstance(step, ConditionedStep):
            ops = {}
            for label, op in step.ops.items():
                if isinstance(op, KrausChannel):
                    ops[label] = {"kraus": [_enc_matrix(k) for k in op.kraus]}
                else:
                    ops[label] = _enc_matrix(op)
            steps.append({"kind": "conditioned", "ops": ops})
        else:
            steps.append({"kind": "reference_dynamics", "unitary": _enc_matrix(step.unitary)})
    doc: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "spaces": [_enc_factor(f) for f in space.factors],
        "environment": env,
        "reference": {
            "factor": lab.reference,
            "labels": list(lab.info_set),
            "projectors": [_enc_matrix(p) for p in lab.measurement.projectors],
        },
        "target": list(lab.target),
        "initial": {"matrix": _enc_matrix(ctx.initial.matrix)},
        "event": {"name": event.name, "steps": steps},
        "continuation": None,
    }
    if ctx.continuation is not None:
        doc["continuation"] = {
            "output_spaces": [_enc_factor(f) for f in ctx.continuation.out_space.factors],
            "kraus": [_enc_matrix(k) for k in ctx.continuation.kraus],
        }
    return doc


def dumps(lab: Lab, ctx: Context, event: Event, name: str = "") -> str:
    return json.dumps(dump(lab, ctx, event, name), indent=1)


def validate_schema(doc: Any) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)
        raise ScenarioFileError(err.message if len(err.message) < 300 else err.message[:300] + "...", path)


def load(doc: Any) -> tuple[Lab, Context, Event]:
    """Build the triple; structural problems raise :class:`ScenarioFileError`.

    Numeric invariants (projector family, density operator, channel
    completeness) are checked afterwards and raise ``InvariantError``.
    """
    validate_schema(doc)
    space = _dec_space(doc["spaces"], "$.spaces")
    ref = doc["reference"]
    if ref["factor"] not in space.labels:
        raise ScenarioFileError(f"unknown factor {ref['factor']!r}", "$.reference.factor")
    for i, t in enumerate(doc["target"]):
        if t not in space.labels:
            raise ScenarioFileError(f"unknown factor {t!r}", f"$.target[{i}]")
    if "environment" in doc:
        expected = [x for x in space.labels if x != ref["factor"] and x not in doc["target"]]
        if sorted(doc["environment"]) != sorted(expected):
            raise ScenarioFileError(f"environment must list exactly {expected}", "$.environment")
    projectors = [_dec(p, f"$.reference.projectors[{i}]", 2) for i, p in enumerate(ref["projectors"])]
    dref = space.factor(ref["factor"]).dim
    for i, p in enumerate(projectors):
        if p.shape != (dref, dref):
            raise ScenarioFileError(f"projector shape {p.shape}, reference dim is {dref}",
                                    f"$.reference.projectors[{i}]")
    try:
        measurement = ReferenceMeasurement(ref["factor"], tuple(ref["labels"]), tuple(projectors))
    except ValueError as exc:
        raise ScenarioFileError(str(exc), "$.reference") from None

    init = doc["initial"]
    if "vector" in init:
        vec = _dec(init["vector"], "$.initial.vector", 1)
        if vec.shape != (space.dim,):
            raise ScenarioFileError(f"length {vec.shape[0]}, space dim is {space.dim}", "$.initial.vector")
        initial = DensityOperator.from_vector(space, vec)
    else:
        mat = _dec(init["matrix"], "$.initial.matrix", 2)
        if mat.shape != (space.dim, space.dim):
            raise ScenarioFileError(f"shape {mat.shape}, space dim is {space.dim}", "$.initial.matrix")
        initial = DensityOperator(space, mat)

    dt = int(np.prod([space.factor(t).dim for t in doc["target"]]))
    steps: list = []
    for i, step in enumerate(doc["event"]["steps"]):
        path = f"$.event.steps[{i}]"
        if step["kind"] == "conditioned":
            ops = {}
            for label, op in step["ops"].items():
                opath = f"{path}.ops.{label}"
                if isinstance(op, dict):
                    kraus = [_dec(k, f"{opath}.kraus[{j}]", 2) for j, k in enumerate(op["kraus"])]
                    for j, k in enumerate(kraus):
                        if k.shape != (dt, dt):
                            raise ScenarioFileError(f"shape {k.shape}, target dim is {dt}", f"{opath}.kraus[{j}]")
                    tspace = Space.of(("target", dt))
                    ops[label] = KrausChannel(tspace, tspace, tuple(kraus))
                else:
                    m = _dec(op, opath, 2)
                    if m.shape != (dt, dt):
                        raise ScenarioFileError(f"shape {m.shape}, target dim is {dt}", opath)
                    ops[label] = m
            try:
                steps.append(ConditionedStep(measurement, ops))
            except ValueError as exc:
                raise ScenarioFileError(str(exc), f"{path}.ops") from None
        else:
            u = _dec(step["unitary"], f"{path}.unitary", 2)
            if u.shape != (dref, dref):
                raise ScenarioFileError(f"shape {u.shape}, reference dim is {dref}", f"{path}.unitary")
            steps.append(ReferenceDynamics(u))
    event = Event(tuple(steps), doc["event"].get("name", "O_A"))

    continuation = None
    cont = doc.get("continuation")
    if cont is not None:
        out_space = _dec_space(cont["output_spaces"], "$.continuation.output_spaces") if "output_spaces" in cont \
            else space
        if measurement.factor not in out_space.labels:
            raise ScenarioFileError("continuation output must keep the reference factor",
                                    "$.continuation.output_spaces")
        kraus = [_dec(k, f"$.continuation.kraus[{j}]", 2) for j, k in enumerate(cont["kraus"])]
        for j, k in enumerate(kraus):
            if k.shape != (out_space.dim, space.dim):
                raise ScenarioFileError(f"shape {k.shape}, expected {(out_space.dim, space.dim)}",
                                        f"$.continuation.kraus[{j}]")
        continuation = KrausChannel(space, out_space, tuple(kraus))

    try:
        lab = Lab(measurement, tuple(doc["target"]), {event.name: event}, name=doc.get("name") or "A")
    except ValueError as exc:
        raise ScenarioFileError(str(exc), "$.target") from None
    ctx = Context(initial, continuation)
    validate_numerics(lab, ctx)
    return lab, ctx, event


def validate_numerics(lab: Lab, ctx: Context) -> None:
    lab.measurement.validate()
    ctx.validate()


def loads(text: str) -> tuple[Lab, Context, Event]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFileError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from None
    return load(doc)

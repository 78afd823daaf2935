"""JSON configuration documents: schema, parsing and spec serialization.

Complex numbers are written as ``[re, im]`` pairs. An experiment is either a
preset reference ``{"preset": name, "params": {...}}`` or an explicit
description with ``factor_dims``, ``initial_state``, ``models`` and
``events``. :func:`spec_to_config` emits the explicit form, which
:func:`spec_from_config` reads back to an equal spec.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .engines import ExperimentSpec
from .experiments import PRESETS, build_preset
from .models import (
    LatticeGrid,
    MeasurementModel,
    box_detector_model,
    epsilon_spin_model,
    grw_localization_model,
    kraus_model,
)
from .qcore import ConfigurationError, QuantumState
from .spacetime import SpacetimeEvent

__all__ = [
    "SCHEMA_VERSION",
    "CONFIG_SCHEMA",
    "load_config",
    "validate_config",
    "spec_from_config",
    "spec_to_config",
    "experiments_from_config",
    "encode_complex",
    "decode_complex",
]

SCHEMA_VERSION = 1

_number = {"type": "number"}
_complex = {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}
_matrix = {"type": "array", "items": {"type": "array", "items": _complex}}

_model_schema = {
    "type": "object",
    "required": ["type"],
    "properties": {"type": {"enum": ["epsilon_spin", "box_detector", "grw", "kraus"]}},
    "allOf": [
        {"if": {"properties": {"type": {"const": "epsilon_spin"}}},
         "then": {"required": ["eps"], "additionalProperties": False,
                  "properties": {"type": {}, "eps": _number, "theta": _number,
                                 "variant": {"enum": ["povm", "literal"]}}}},
        {"if": {"properties": {"type": {"const": "box_detector"}}},
         "then": {"required": ["eps"], "additionalProperties": False,
                  "properties": {"type": {}, "eps": _number}}},
        {"if": {"properties": {"type": {"const": "grw"}}},
         "then": {"required": ["a", "x_min", "x_max", "n_points"], "additionalProperties": False,
                  "properties": {"type": {}, "a": _number, "x_min": _number, "x_max": _number,
                                 "n_points": {"type": "integer"}, "floor": _number}}},
        {"if": {"properties": {"type": {"const": "kraus"}}},
         "then": {"required": ["operators"], "additionalProperties": False,
                  "properties": {"type": {}, "operators": {"type": "array", "items": _matrix,
                                                           "minItems": 1},
                                 "labels": {"type": "array", "items": {"type": "string"}},
                                 "rule": {"enum": ["kraus", "effect"]},
                                 "metadata": {"type": "object"}}}},
    ],
}

_event_schema = {
    "type": "object",
    "required": ["id", "t", "x", "factor", "model"],
    "additionalProperties": False,
    "properties": {
        "id": {"type": "string"},
        "t": _number,
        "x": {"oneOf": [_number, {"type": "array", "items": _number, "minItems": 1}]},
        "factor": {"type": "integer", "minimum": 0},
        "model": {"type": "string"},
    },
}

_explicit_schema = {
    "type": "object",
    "required": ["factor_dims", "initial_state", "models", "events"],
    "additionalProperties": False,
    "properties": {
        "label": {"type": "string"},
        "factor_dims": {"type": "array", "items": {"type": "integer", "minimum": 1},
                        "minItems": 1},
        "initial_state": {
            "type": "object",
            "oneOf": [{"required": ["vector"]}, {"required": ["density_matrix"]}],
            "additionalProperties": False,
            "properties": {"vector": {"type": "array", "items": _complex},
                           "density_matrix": _matrix},
        },
        "models": {"type": "object", "additionalProperties": _model_schema},
        "events": {"type": "array", "items": _event_schema},
    },
}

_preset_schema = {
    "type": "object",
    "required": ["preset"],
    "additionalProperties": False,
    "properties": {"preset": {"enum": sorted(PRESETS)}, "params": {"type": "object"}},
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["experiment", "engine", "mode"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "experiment": {"oneOf": [_preset_schema, _explicit_schema]},
        "engine": {"enum": ["causal", "standard", "both"]},
        "mode": {"enum": ["enumerate", "sample"]},
        "runs": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"path": {"type": "string"}, "format": {"enum": ["json", "csv"]}},
        },
    },
    "if": {"properties": {"mode": {"const": "sample"}}},
    "then": {"required": ["runs"]},
}


def _path(error: jsonschema.ValidationError) -> str:
    out = "config"
    for part in error.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    return out


def validate_config(doc: Any) -> None:
    """Raise :class:`ConfigurationError` naming the offending path on any schema error."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        raise ConfigurationError(f"{_path(err)}: {err.message}")


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from None
    return doc


def encode_complex(arr) -> list:
    arr = np.asarray(arr, dtype=np.complex128)
    if arr.ndim == 0:
        return [float(arr.real), float(arr.imag)]
    return [encode_complex(a) for a in arr]


def decode_complex(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def _model_from_config(name: str, cfg: dict, where: str) -> MeasurementModel:
    kind = cfg["type"]
    try:
        if kind == "epsilon_spin":
            return epsilon_spin_model(cfg["eps"], cfg.get("theta", 0.0),
                                      cfg.get("variant", "povm"), name=name)
        if kind == "box_detector":
            return box_detector_model(cfg["eps"], name=name)
        if kind == "grw":
            grid = LatticeGrid(cfg["x_min"], cfg["x_max"], cfg["n_points"])
            return grw_localization_model(cfg["a"], grid, cfg.get("floor", 1e-10), name=name)
        ops = [decode_complex(m) for m in cfg["operators"]]
        return kraus_model(name, ops, cfg.get("labels"), cfg.get("rule", "kraus"),
                           cfg.get("metadata"))
    except ConfigurationError as exc:
        raise ConfigurationError(f"{where}: {exc}") from None
    except ValueError as exc:
        raise ConfigurationError(f"{where}: malformed operator data ({exc})") from None


def spec_from_config(exp: dict, engine: str = "causal") -> ExperimentSpec:
    """Build a spec from an explicit experiment description."""
    dims = exp["factor_dims"]
    st = exp["initial_state"]
    try:
        if "vector" in st:
            state = QuantumState.from_vector(decode_complex(st["vector"]), dims, normalize=False)
        else:
            state = QuantumState.from_density_matrix(decode_complex(st["density_matrix"]), dims)
        state.validate()
    except (ConfigurationError, ValueError) as exc:
        raise ConfigurationError(f"config.experiment.initial_state: {exc}") from None
    models = {name: _model_from_config(name, cfg, f"config.experiment.models.{name}")
              for name, cfg in exp["models"].items()}
    events = [SpacetimeEvent(e["id"], e["t"], e["x"], e["factor"], e["model"])
              for e in exp["events"]]
    try:
        return ExperimentSpec(state, events, models, engine, exp.get("label", ""))
    except ConfigurationError as exc:
        raise ConfigurationError(f"config.experiment: {exc}") from None


def _model_to_config(model: MeasurementModel) -> dict:
    return {
        "type": "kraus",
        "operators": [encode_complex(op.matrix) for op in model.outcomes],
        "labels": list(model.labels),
        "rule": model.rule,
        "metadata": dict(model.metadata),
    }


def spec_to_config(spec: ExperimentSpec) -> dict:
    """Explicit, JSON-ready description of a spec (engine not included)."""
    state = spec.initial_state
    key = "vector" if state.is_pure else "density_matrix"
    return {
        "label": spec.label,
        "factor_dims": list(spec.factor_dims),
        "initial_state": {key: encode_complex(state.data)},
        "models": {name: _model_to_config(m) for name, m in spec.models.items()},
        "events": [{"id": e.id, "t": e.t, "x": list(e.x), "factor": e.factor_index,
                    "model": e.model} for e in spec.events],
    }


def experiments_from_config(doc: dict, engine: str = "causal") -> dict[str, ExperimentSpec]:
    """Specs named by label; a CHSH preset yields one spec per setting pair."""
    exp = doc["experiment"]
    if "preset" not in exp:
        spec = spec_from_config(exp, engine)
        return {spec.label or "experiment": spec}
    try:
        built = build_preset(exp["preset"], exp.get("params"), engine)
    except (ConfigurationError, TypeError) as exc:
        raise ConfigurationError(f"config.experiment.params: {exc}") from None
    if isinstance(built, dict):
        return {f"chsh[{a},{b}]": spec for (a, b), spec in built.items()}
    return {built.label: built}

"""JSON config schemas and validated loading for the CLI."""

from __future__ import annotations

import hashlib
import json

import jsonschema

from .errors import UsageError

_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

_REMAINDER_TERM = {
    "type": "object",
    "oneOf": [
        {
            "properties": {
                "type": {"const": "algebraic"},
                "z0": _COMPLEX,
                "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "prefactor": _COMPLEX,
                "h": {"type": "array", "items": {"type": "number"}, "minItems": 1},
            },
            "required": ["type", "z0", "alpha"],
        },
        {
            "properties": {
                "type": {"const": "rational"},
                "num": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "den": {"type": "array", "items": {"type": "number"}, "minItems": 1},
            },
            "required": ["type", "num"],
        },
    ],
}

_RATIONAL = {
    "type": "object",
    "properties": {
        "num": {"type": "array", "minItems": 1},
        "den": {"type": "array", "minItems": 1},
    },
    "required": ["num"],
}

MODEL_SCHEMA = {
    "type": "object",
    "oneOf": [
        {
            "properties": {
                "type": {"const": "pole_pair"},
                "gamma": {"type": "number"},
                "t_r": {"type": "number"},
                "t_c": {"type": "number", "exclusiveMinimum": 0},
                "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "remainder": {"type": "array", "items": _REMAINDER_TERM},
                "domain": {"type": "array", "items": {"type": "number"},
                           "minItems": 2, "maxItems": 2},
                "anchor_t": {"type": ["number", "null"]},
                "anchor_value": {"type": "number"},
            },
            "required": ["type", "gamma", "t_c"],
        },
        {
            "properties": {
                "type": {"const": "landau_zener"},
                "delta": {"type": "number", "exclusiveMinimum": 0},
                "s_domain": {"type": "array", "items": {"type": "number"},
                             "minItems": 2, "maxItems": 2},
                "table_points": {"type": "integer", "minimum": 64},
            },
            "required": ["type"],
        },
        {
            "properties": {
                "type": {"const": "rational_xz"},
                "X": _RATIONAL,
                "Z": _RATIONAL,
                "s_r": {"type": "number"},
                "critical_points": {"type": "array"},
                "s_domain": {"type": "array", "items": {"type": "number"},
                             "minItems": 2, "maxItems": 2},
                "table_points": {"type": "integer", "minimum": 64},
            },
            "required": ["type", "X", "Z"],
        },
    ],
}

COUPLING_SCHEMA = {
    "type": "object",
    "properties": {
        "model": MODEL_SCHEMA,
        "epsilons": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                     "minItems": 1},
        "t_values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "ratio_bound": {"type": "number", "exclusiveMinimum": 1},
        "prefactor_rtol": {"type": "number", "exclusiveMinimum": 0},
        "constancy_band": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["model", "epsilons", "t_values"],
    "additionalProperties": True,
}

BOUNDS_SCHEMA = {
    "type": "object",
    "properties": {
        "theta_norms": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                        "minItems": 1},
        "max_n": {"type": "integer", "minimum": 4},
        "M": {"type": "number", "exclusiveMinimum": 0},
        "search_minimal_M": {"type": "boolean"},
    },
    "required": ["theta_norms", "max_n"],
}

DARBOUX_SCHEMA = {
    "type": "object",
    "properties": {
        "function": {
            "type": "object",
            "properties": {
                "type": {"enum": ["geometric", "inverse_sqrt", "pole_pair_theta"]},
                "gamma": {"type": "number"},
                "t_r": {"type": "number"},
                "t_c": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["type"],
        },
        "n_min": {"type": "integer", "minimum": 1},
        "n_max": {"type": "integer", "minimum": 2},
        "n_step": {"type": "integer", "minimum": 1},
    },
    "required": ["function", "n_min", "n_max"],
}

SIMULATE_SCHEMA = {
    "type": "object",
    "properties": {
        "model": MODEL_SCHEMA,
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "epsilon_over_tc": {"type": "number", "exclusiveMinimum": 0},
        "span_sigmas": {"type": "number", "exclusiveMinimum": 1},
        "tolerance": {"type": "number", "minimum": 1e-13},
        "n_output": {"type": "integer", "minimum": 16},
        "frame": {"enum": ["adiabatic", "superadiabatic", "lab"]},
    },
    "required": ["model"],
}

REPARAM_SCHEMA = {
    "type": "object",
    "properties": {
        "model": MODEL_SCHEMA,
        "samples": {"type": "array", "items": {"type": "number"}},
    },
    "required": ["model"],
}

NORMS_SCHEMA = {
    "type": "object",
    "properties": {
        "model": MODEL_SCHEMA,
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "t_c": {"type": "number", "exclusiveMinimum": 0},
        "interval": {"type": "array", "items": {"type": "number"},
                     "minItems": 2, "maxItems": 2},
        "order_cap": {"type": "integer", "minimum": 0},
        "grid_density": {"type": "integer", "minimum": 1},
    },
    "required": ["model", "alpha", "t_c", "interval"],
}

SCHEMAS = {
    "coupling": COUPLING_SCHEMA,
    "bounds": BOUNDS_SCHEMA,
    "darboux": DARBOUX_SCHEMA,
    "simulate": SIMULATE_SCHEMA,
    "reparam": REPARAM_SCHEMA,
    "norms": NORMS_SCHEMA,
}


class ConfigError(UsageError):
    """Configuration failed schema validation (CLI exit code 2)."""


def validate_config(cfg: dict, kind: str) -> dict:
    schema = SCHEMAS.get(kind)
    if schema is None:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    try:
        jsonschema.validate(cfg, schema)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config invalid for {kind!r}: {exc.message}") from exc
    return cfg


def load_config(path: str, kind: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return validate_config(cfg, kind)


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]

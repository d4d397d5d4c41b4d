"""Run configuration documents, CSV series files and output manifests.

Configs are YAML mappings tagged with ``schema: tvstable/1`` and validated
against the JSON schemas below before anything runs. Unknown keys are
rejected and every config must carry an integer ``seed``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import platform
from importlib import metadata
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from .params import CurveLayout, ModelTemplate
from .stable import StableParams
from .tvarma import TvArmaModel

__all__ = [
    "SCHEMA_TAG",
    "ConfigError",
    "load_config",
    "validate_config",
    "model_from_config",
    "template_from_config",
    "stable_from_config",
    "read_series",
    "write_series",
    "write_columns",
    "write_json",
    "file_sha256",
    "write_manifest",
]

SCHEMA_TAG = "tvstable/1"


class ConfigError(ValueError):
    """The configuration document is malformed or fails validation."""


_NUM = {"type": "number"}
_COEFFS = {"type": "array", "items": _NUM, "minItems": 1}
_CURVE = {"oneOf": [_NUM, _COEFFS]}
_ALPHA = {"type": "number", "exclusiveMinimum": 0, "maximum": 2}
_BETA = {"type": "number", "minimum": -1, "maximum": 1}
_POS_INT = {"type": "integer", "minimum": 1}
_NONNEG_INT = {"type": "integer", "minimum": 0}

_MODEL = {
    "type": "object",
    "additionalProperties": False,
    "required": ["gamma", "alpha"],
    "properties": {
        "ar": {"type": "array", "items": _CURVE},
        "ma": {"type": "array", "items": _CURVE},
        "gamma": _CURVE,
        "alpha": _ALPHA,
        "beta": _BETA,
    },
}

_TEMPLATE = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "p": _NONNEG_INT,
        "q": _NONNEG_INT,
        "ar_degree": _NONNEG_INT,
        "ma_degree": _NONNEG_INT,
        "gamma_degree": _NONNEG_INT,
        "alpha": {"oneOf": [_ALPHA, {"type": "null"}]},
        "beta": _BETA,
    },
}

_STABLE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["alpha"],
    "properties": {
        "alpha": _ALPHA,
        "beta": _BETA,
        "sigma": {"type": "number", "exclusiveMinimum": 0},
        "mu": _NUM,
    },
}

_BASE = {
    "schema": {"const": SCHEMA_TAG},
    "command": {"type": "string"},
    "seed": {"type": "integer", "minimum": 0},
}


def _command_schema(name: str, props: dict, required: list[str]) -> dict:
    return {
        "type": "object",
        "additionalProperties": False,
        "required": ["schema", "command", "seed", *required],
        "properties": {**_BASE, "command": {"const": name}, **props},
    }


SCHEMAS = {
    "simulate": _command_schema(
        "simulate",
        {"model": _MODEL, "T": _POS_INT, "burn_in": _NONNEG_INT},
        ["model", "T"],
    ),
    "estimate": _command_schema(
        "estimate",
        {
            "method": {"enum": ["indirect", "bwe", "auxiliary"]},
            "template": _TEMPLATE,
            "indirect": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "S": _POS_INT,
                    "burn_in": _NONNEG_INT,
                    "max_iter": _POS_INT,
                    "alpha0": _ALPHA,
                    "theta0": {"type": "array", "items": _NUM},
                },
            },
            "bwe": {
                "type": "object",
                "additionalProperties": False,
                "properties": {"N": {"type": "integer", "minimum": 3}, "shift": _POS_INT, "max_iter": _POS_INT},
            },
        },
        ["method", "template"],
    ),
    "mc": _command_schema(
        "mc",
        {
            "preset": {"type": "string"},
            "scenario": {
                "type": "object",
                "additionalProperties": False,
                "required": ["template", "theta"],
                "properties": {
                    "id": {"type": "string"},
                    "title": {"type": "string"},
                    "template": _TEMPLATE,
                    "theta": {"type": "array", "items": _NUM, "minItems": 1},
                    "methods": {"type": "array", "items": {"enum": ["indirect", "bwe"]}, "minItems": 1},
                },
            },
            "T": {"oneOf": [_POS_INT, {"type": "array", "items": _POS_INT, "minItems": 1}]},
            "R": _POS_INT,
            "S": _POS_INT,
            "burn_in": _NONNEG_INT,
            "full_scale": {"type": "boolean"},
        },
        [],
    ),
    "diagnose": _command_schema(
        "diagnose",
        {
            "stable": {"oneOf": [_STABLE, {"const": "ecf"}]},
            "variogram": {
                "type": "object",
                "additionalProperties": False,
                "properties": {"max_lag": _POS_INT, "difference": {"type": "boolean"}},
            },
            "models": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["name", "model"],
                    "properties": {"name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"}, "model": _MODEL},
                },
            },
            "n_ref": {"type": "integer", "minimum": 100000},
        },
        [],
    ),
    "predict": _command_schema(
        "predict",
        {"model": _MODEL, "h": _POS_INT, "J": _POS_INT},
        ["model", "h"],
    ),
}


def validate_config(doc, command: str | None = None) -> dict:
    """Validate a parsed config; returns it unchanged or raises ConfigError."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    if doc.get("schema") != SCHEMA_TAG:
        raise ConfigError(f"config must declare schema: {SCHEMA_TAG}")
    cmd = doc.get("command", command)
    if command is not None and cmd != command:
        raise ConfigError(f"config is for command {cmd!r}, not {command!r}")
    if cmd not in SCHEMAS:
        raise ConfigError(f"unknown command {cmd!r}")
    validator = jsonschema.Draft202012Validator(SCHEMAS[cmd])
    errors = sorted(validator.iter_errors(doc), key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {e.message}")
    if cmd == "mc" and ("preset" in doc) == ("scenario" in doc):
        raise ConfigError("mc config needs exactly one of 'preset' or 'scenario'")
    return doc


def load_config(path, command: str | None = None) -> dict:
    """Read and validate a YAML config. OSError propagates for missing files."""
    text = Path(path).read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from exc
    return validate_config(doc, command)


def _coeffs(c) -> tuple[float, ...]:
    return (float(c),) if isinstance(c, (int, float)) else tuple(float(v) for v in c)


def model_from_config(m: dict) -> TvArmaModel:
    try:
        return TvArmaModel.from_coeffs(
            ar=[_coeffs(c) for c in m.get("ar", [])],
            ma=[_coeffs(c) for c in m.get("ma", [])],
            gamma=_coeffs(m["gamma"]),
            alpha=float(m["alpha"]),
            beta=float(m.get("beta", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc


def template_from_config(t: dict) -> ModelTemplate:
    try:
        layout = CurveLayout(
            p=t.get("p", 1),
            q=t.get("q", 0),
            ar_degree=t.get("ar_degree", 1),
            ma_degree=t.get("ma_degree", 1),
            gamma_degree=t.get("gamma_degree", 0),
        )
    except ValueError as exc:
        raise ConfigError(f"template: {exc}") from exc
    alpha = t.get("alpha", None)
    return ModelTemplate(layout, alpha=None if alpha is None else float(alpha), beta=float(t.get("beta", 0.0)))


def stable_from_config(s: dict) -> StableParams:
    try:
        return StableParams(float(s["alpha"]), float(s.get("beta", 0.0)), float(s.get("sigma", 1.0)), float(s.get("mu", 0.0)))
    except ValueError as exc:
        raise ConfigError(f"stable: {exc}") from exc


# ---------------------------------------------------------------- files


def read_series(path) -> np.ndarray:
    """Single-column CSV with a header row. Raises ValueError on bad content."""
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    if not body:
        raise ValueError(f"{path}: no data rows")
    try:
        x = np.array([float(r[0]) for r in body])
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric value ({exc})") from exc
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{path}: non-finite values")
    return x


def write_columns(path, header: list[str], columns) -> None:
    cols = [np.asarray(c) for c in columns]
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([_cell(v) for v in row])


def _cell(v):
    if isinstance(v, (np.integer, int)) and not isinstance(v, bool):
        return int(v)
    if isinstance(v, (np.floating, float)):
        return repr(float(v))
    return v


def write_series(path, x, name: str = "x") -> None:
    write_columns(path, [name], [np.asarray(x, dtype=float)])


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(Path(path), "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _versions() -> dict[str, str]:
    from . import __version__

    out = {"python": platform.python_version(), "tvstable": __version__}
    for pkg in ("numpy", "scipy", "numba"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = "unknown"
    return out


def write_manifest(out_dir, command: str, config: dict, config_path, inputs=(), seed: int | None = None) -> dict:
    """Write manifest.json listing the config hash, seed, versions and outputs."""
    out_dir = Path(out_dir)
    outputs = sorted(p.name for p in out_dir.iterdir() if p.is_file() and p.name != "manifest.json")
    manifest = {
        "command": command,
        "config_file": Path(config_path).name,
        "config_sha256": file_sha256(config_path),
        "config": config,
        "seed": config.get("seed") if seed is None else seed,
        "inputs": {Path(p).name: file_sha256(p) for p in inputs},
        "outputs": {name: file_sha256(out_dir / name) for name in outputs},
        "versions": _versions(),
    }
    write_json(out_dir / "manifest.json", manifest)
    return manifest

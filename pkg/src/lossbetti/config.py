"""Experiment configuration: one JSON document, schema-validated, no env vars."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema

from .network import DatasetSmall, read_dataset_csv
from .pfaffian import ACTIVATIONS, Architecture, LossSpec, get_activation

DEFAULTS = {
    "skip_connections": False,
    "biases": True,
    "l2_lambda": 0.0,
    "quantiles": 16,
    "exact_bit_cap": 10_000_000,
    "mode": "theorem",
    "homology": "auto",
    "out_dir": ".",
    "out_format": "json",
    "workers": 1,
}

_ACT_NAMES = sorted(ACTIVATIONS)

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["architecture", "loss", "dataset", "slice"],
    "properties": {
        "architecture": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n0", "hidden_widths", "activation", "last_layer"],
            "properties": {
                "n0": {"type": "integer", "minimum": 1},
                "hidden_widths": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "activation": {"enum": _ACT_NAMES},
                "last_layer": {"enum": ["linear"] + _ACT_NAMES},
                "skip_connections": {"type": "boolean"},
                "biases": {"type": "boolean"},
            },
        },
        "loss": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["MSE", "BCE"]},
                "l2_lambda": {"type": "number", "minimum": 0},
            },
        },
        "dataset": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "path": {"type": "string"},
                "inline": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "minItems": 2, "items": {"type": "number"}},
                },
            },
            "oneOf": [{"required": ["path"]}, {"required": ["inline"]}],
        },
        "slice": {
            "type": "object",
            "additionalProperties": False,
            "required": ["axes"],
            "properties": {
                "axes": {
                    "type": "array",
                    "minItems": 2,
                    "maxItems": 3,
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["index", "min", "max", "count"],
                        "properties": {
                            "index": {"type": "integer", "minimum": 0},
                            "min": {"type": "number"},
                            "max": {"type": "number"},
                            "count": {"type": "integer", "minimum": 2},
                        },
                    },
                },
                "base_point": {"type": ["array", "null"], "items": {"type": "number"}},
            },
        },
        "thresholds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "quantiles": {"type": "integer", "minimum": 0},
                "extra": {"type": "array", "items": {"type": "number"}},
            },
        },
        "bound": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "exact_bit_cap": {"type": "integer", "minimum": 1},
                "mode": {"enum": ["theorem", "corollary"]},
            },
        },
        "homology": {"enum": ["auto", "fast", "gf2"]},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "format": {"enum": ["json", "csv"]},
            },
        },
        "workers": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
    },
}


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ExperimentConfig:
    arch: Architecture
    loss: LossSpec
    dataset: DatasetSmall
    axes: list[dict]
    base_point: Optional[list[float]] = None
    seed: Optional[int] = None
    quantiles: int = DEFAULTS["quantiles"]
    extra_thresholds: list[float] = field(default_factory=list)
    exact_bit_cap: int = DEFAULTS["exact_bit_cap"]
    mode: str = DEFAULTS["mode"]
    homology: str = DEFAULTS["homology"]
    out_dir: str = DEFAULTS["out_dir"]
    out_format: str = DEFAULTS["out_format"]
    workers: int = DEFAULTS["workers"]
    dataset_source: str = "inline"


def _path_of(err) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def validate(doc) -> list[str]:
    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = [f"{_path_of(e)}: {e.message}"
              for e in sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))]
    if errors:
        return errors
    arch = doc["architecture"]
    L = len(arch["hidden_widths"]) + 1
    if L < 2:
        errors.append(f"architecture/hidden_widths: L = {L}; the format theorems need L >= 2")
    if doc["loss"]["kind"] == "BCE" and arch["last_layer"] == "linear":
        errors.append("loss/kind: BCE requires a nonlinear last layer")
    base = doc["slice"].get("base_point")
    if base is None and "seed" not in doc:
        errors.append("seed: required when slice/base_point is omitted (randomized default)")
    idx = [a["index"] for a in doc["slice"]["axes"]]
    if len(set(idx)) != len(idx):
        errors.append(f"slice/axes: varied indices must be distinct, got {idx}")
    for i, a in enumerate(doc["slice"]["axes"]):
        if not a["min"] < a["max"]:
            errors.append(f"slice/axes/{i}: min must be < max")
    if "inline" in doc["dataset"]:
        rows = doc["dataset"]["inline"]
        if any(len(r) != arch["n0"] + 1 for r in rows):
            errors.append(f"dataset/inline: every row needs n0 + 1 = {arch['n0'] + 1} numbers")
    return errors


def build_config(doc: dict, base_dir=".") -> ExperimentConfig:
    errors = validate(doc)
    if errors:
        raise ConfigError(errors)
    a = doc["architecture"]
    try:
        arch = Architecture(
            n0=a["n0"],
            hidden_widths=tuple(a["hidden_widths"]),
            activation=get_activation(a["activation"]),
            output=None if a["last_layer"] == "linear" else get_activation(a["last_layer"]),
            skip_connections=a.get("skip_connections", DEFAULTS["skip_connections"]),
            biases=a.get("biases", DEFAULTS["biases"]),
        )
    except ValueError as exc:
        raise ConfigError([f"architecture: {exc}"]) from None
    loss = LossSpec(doc["loss"]["kind"], float(doc["loss"].get("l2_lambda", DEFAULTS["l2_lambda"])))

    ds = doc["dataset"]
    if "inline" in ds:
        rows = ds["inline"]
        dataset = DatasetSmall([r[:-1] for r in rows], [r[-1] for r in rows])
        source = "inline"
    else:
        path = Path(base_dir) / ds["path"]
        try:
            dataset = read_dataset_csv(path)
        except (OSError, ValueError) as exc:
            raise ConfigError([f"dataset/path: {exc}"]) from None
        source = str(ds["path"])
    if dataset.n0 != arch.n0:
        raise ConfigError([f"dataset: inputs have width {dataset.n0}, architecture n0 = {arch.n0}"])
    if loss.kind == "BCE" and not dataset.is_binary():
        raise ConfigError(["dataset: BCE targets must be 0 or 1"])

    thr = doc.get("thresholds", {})
    bound = doc.get("bound", {})
    out = doc.get("output", {})
    return ExperimentConfig(
        arch=arch,
        loss=loss,
        dataset=dataset,
        axes=[dict(ax) for ax in doc["slice"]["axes"]],
        base_point=doc["slice"].get("base_point"),
        seed=doc.get("seed"),
        quantiles=thr.get("quantiles", DEFAULTS["quantiles"]),
        extra_thresholds=list(thr.get("extra", [])),
        exact_bit_cap=bound.get("exact_bit_cap", DEFAULTS["exact_bit_cap"]),
        mode=bound.get("mode", DEFAULTS["mode"]),
        homology=doc.get("homology", DEFAULTS["homology"]),
        out_dir=out.get("dir", DEFAULTS["out_dir"]),
        out_format=out.get("format", DEFAULTS["out_format"]),
        workers=doc.get("workers", DEFAULTS["workers"]),
        dataset_source=source,
    )


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError([f"{path}: file not found"]) from None
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: invalid JSON ({exc})"]) from None
    return build_config(doc, base_dir=path.parent)

"""Versioned JSON configuration documents.

Every document carries ``schema_version`` (currently 1) and a ``kind``:
``experiment`` (the default), ``assessment``, ``assets``, ``metric_record``
or ``formula_metrics``. Unknown fields are rejected everywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from jsonschema import Draft202012Validator

from resilnet.cascade import CfSpec, SimulationError
from resilnet.montecarlo import EXPLICIT, FIXED_COUNT, RANDOM_FRACTION, ConfigError, EventModel, ExperimentConfig, SweepGrid
from resilnet.network import ModelParams, NetworkSpec, NodeId, SupplyLink

SCHEMA_VERSION = 1

DEFAULTS = {
    "event": {"kind": RANDOM_FRACTION, "d": 0.1},
    "steps": 20,
    "cf": {"mode": "fraction_all"},
    "runs": 1000,
    "seed": 0,
}

_prob = {"type": "number", "minimum": 0, "maximum": 1}
_count = {"type": "integer", "minimum": 0}
_node = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2}
_values = {"type": "array", "items": {"type": "number"}}
_names = {"type": "array", "items": {"type": "string"}}
_rating = {"type": "string", "enum": ["low", "moderate", "high", "Low", "Moderate", "High", "LOW", "MODERATE", "HIGH"]}


def _obj(properties: dict, required=()) -> dict:
    return {"type": "object", "properties": properties, "required": list(required), "additionalProperties": False}


_header = {"schema_version": {"const": SCHEMA_VERSION}, "kind": {"type": "string"}}

EXPERIMENT_SCHEMA = _obj(
    {
        **_header,
        "network": _obj(
            {
                "levels": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                "requires": {
                    "type": "object",
                    "patternProperties": {"^[0-9]+$": {"type": "array", "items": {"type": "integer", "minimum": 1}}},
                    "additionalProperties": False,
                },
                "links": {
                    "type": "array",
                    "items": _obj(
                        {"source": _node, "target": _node, "status": {"enum": ["active", "potential"]}},
                        ["source", "target", "status"],
                    ),
                },
            },
            ["levels"],
        ),
        "params": _obj({"p_m": _prob, "p_s": _prob, "t_r": _count}, ["p_m", "p_s", "t_r"]),
        "event": _obj(
            {
                "kind": {"enum": [RANDOM_FRACTION, FIXED_COUNT, EXPLICIT]},
                "d": _prob,
                "k": _count,
                "sets": {"type": "array", "items": {"type": "array", "items": _node}},
            },
            ["kind"],
        ),
        "steps": {"type": "integer", "minimum": 1},
        "cf": _obj(
            {
                "mode": {"enum": ["fraction_all", "fraction_bottom", "weighted"]},
                "weights": {"type": "array", "items": {"type": "number", "minimum": 0}},
            },
            ["mode"],
        ),
        "runs": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "sweep": _obj(
            {
                "p_m": {"type": "array", "items": _prob, "minItems": 1},
                "p_s": {"type": "array", "items": _prob, "minItems": 1},
                "t_r": {"type": "array", "items": _count, "minItems": 1},
            }
        ),
    },
    ["schema_version", "network", "params"],
)

_entry = _obj(
    {
        "id": {"type": "string"},
        "description": {"type": "string"},
        "score": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
        "weight": {"type": "number", "minimum": 0},
    },
    ["id"],
)

ASSESSMENT_SCHEMA = _obj(
    {
        **_header,
        "role": {"enum": ["current", "target"]},
        "cells": {
            "type": "array",
            "items": _obj(
                {
                    "stage": {"enum": ["plan_prepare", "absorb", "recover", "adapt"]},
                    "domain": {"enum": ["physical", "information", "cognitive", "social"]},
                    "entries": {"type": "array", "items": _entry},
                },
                ["stage", "domain"],
            ),
        },
        "weights": {
            "type": "array",
            "items": _obj(
                {"stage": {"type": "string"}, "domain": {"type": "string"}, "weight": {"type": "number", "minimum": 0}},
                ["stage", "domain", "weight"],
            ),
        },
    },
    ["schema_version", "kind", "cells"],
)

ASSETS_SCHEMA = _obj(
    {
        **_header,
        "assets": {
            "type": "array",
            "items": _obj(
                {
                    "name": {"type": "string"},
                    "loss": _obj(
                        {"confidentiality": _rating, "integrity": _rating, "availability": _rating},
                        ["confidentiality", "integrity", "availability"],
                    ),
                    "threat": _rating,
                },
                ["name", "loss", "threat"],
            ),
        },
    },
    ["schema_version", "kind", "assets"],
)

_text = {"type": "string"}
METRIC_RECORD_SCHEMA = _obj(
    {
        **_header,
        "record": _obj(
            {
                k: _text
                for k in (
                    "title",
                    "purpose",
                    "relates_to",
                    "formula",
                    "frequency",
                    "who_measures",
                    "who_acts",
                    "what_they_do",
                    "source_of_data",
                )
            }
        ),
    },
    ["schema_version", "kind", "record"],
)

_nonneg = {"type": "array", "items": {"type": "number", "minimum": 0}}
FORMULA_METRICS_SCHEMA = _obj(
    {
        **_header,
        "unit": {"type": "string"},
        "mttid": _nonneg,
        "mttir": _nonneg,
        "mtbsi": _values,
        "cost_of_incidents": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
        "vulnerability_exposure": {
            "type": "array",
            "items": _obj({"id": {"type": "string"}, "days": {"type": "number", "minimum": 0}}, ["id", "days"]),
        },
        "rogue_change_days": _nonneg,
        "root_privilege_count": _names,
        "component_test_count": _names,
    },
    ["schema_version", "kind"],
)

SCHEMAS = {
    "experiment": EXPERIMENT_SCHEMA,
    "assessment": ASSESSMENT_SCHEMA,
    "assets": ASSETS_SCHEMA,
    "metric_record": METRIC_RECORD_SCHEMA,
    "formula_metrics": FORMULA_METRICS_SCHEMA,
}


class ConfigValidationError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("\n".join(violations))


@dataclass
class ConfigDocument:
    kind: str
    data: dict[str, Any]


def _path(parts) -> str:
    return ".".join(str(p) for p in parts) or "(root)"


def _message(err) -> str:
    path = _path(err.absolute_path)
    if err.validator == "additionalProperties":
        allowed = set(err.schema.get("properties", {}))
        extra = sorted(k for k in err.instance if k not in allowed)
        if err.schema.get("patternProperties"):
            extra = [k for k in extra if not k.isdigit()]
        return f"{path}: unknown field {', '.join(repr(e) for e in extra)}"
    if err.validator in ("minimum", "maximum") and "minimum" in err.schema and "maximum" in err.schema:
        lo, hi = err.schema["minimum"], err.schema["maximum"]
        return f"{path}: out of range [{lo},{hi}]"
    if err.validator == "minimum":
        return f"{path}: must be >= {err.schema['minimum']}"
    if err.validator == "required":
        return f"{path}: {err.message}"
    if err.validator == "const" and err.absolute_path and err.absolute_path[-1] == "schema_version":
        return f"{path}: unsupported schema version {err.instance!r} (expected {SCHEMA_VERSION})"
    return f"{path}: {err.message}"


def validate_document(doc: Any) -> ConfigDocument:
    """Check ``doc`` against the schema for its kind and fill documented defaults."""
    if not isinstance(doc, dict):
        raise ConfigValidationError(["(root): expected a JSON object"])
    violations = []
    kind = doc.get("kind", "experiment")
    schema = SCHEMAS.get(kind)
    if schema is None:
        raise ConfigValidationError([f"kind: unknown document kind {kind!r}"])
    validator = Draft202012Validator(schema)
    for err in sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message)):
        violations.append(_message(err))
    if violations:
        raise ConfigValidationError(violations)
    data = json.loads(json.dumps(doc))
    data["kind"] = kind
    if kind == "experiment":
        for key, value in DEFAULTS.items():
            data.setdefault(key, json.loads(json.dumps(value)))
        _check_experiment_semantics(data)
    return ConfigDocument(kind, data)


def _check_experiment_semantics(data: dict) -> None:
    problems = []
    ev = data["event"]
    needed = {RANDOM_FRACTION: "d", FIXED_COUNT: "k", EXPLICIT: "sets"}[ev["kind"]]
    if needed not in ev:
        problems.append(f"event.{needed}: required for event kind {ev['kind']!r}")
    for other in {"d", "k", "sets"} - {needed}:
        if other in ev:
            problems.append(f"event.{other}: not used by event kind {ev['kind']!r}")
    cf = data["cf"]
    if cf["mode"] == "weighted" and "weights" not in cf:
        problems.append("cf.weights: required for weighted mode")
    if cf["mode"] != "weighted" and "weights" in cf:
        problems.append("cf.weights: only used in weighted mode")
    if problems:
        raise ConfigValidationError(problems)
    try:
        experiment_from_dict(data)
    except (ConfigError, SimulationError, ValueError) as exc:
        raise ConfigValidationError([f"(root): {exc}"]) from None


def load_json(path: str | Path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def parse_config(path: str | Path) -> ConfigDocument:
    """Read and validate a config document.

    Raises ``OSError`` for unreadable files and :class:`ConfigValidationError`
    (with one ``json.path: message`` line per problem) for invalid content.
    """
    try:
        doc = load_json(path)
    except json.JSONDecodeError as exc:
        raise ConfigValidationError([f"(root): invalid JSON: {exc}"]) from None
    return validate_document(doc)


def experiment_from_dict(data: dict) -> ExperimentConfig:
    net = data["network"]
    links = None
    if "links" in net:
        links = tuple(SupplyLink(NodeId(*ln["source"]), NodeId(*ln["target"]), ln["status"]) for ln in net["links"])
    requires = {int(k): tuple(v) for k, v in net["requires"].items()} if "requires" in net else None
    p = data["params"]
    spec = NetworkSpec(tuple(net["levels"]), ModelParams(float(p["p_m"]), float(p["p_s"]), int(p["t_r"])), requires, links)

    ev = data.get("event", DEFAULTS["event"])
    if ev["kind"] == RANDOM_FRACTION:
        event = EventModel(RANDOM_FRACTION, fraction=float(ev["d"]))
    elif ev["kind"] == FIXED_COUNT:
        event = EventModel(FIXED_COUNT, count=int(ev["k"]))
    else:
        event = EventModel(EXPLICIT, sets=tuple(tuple(tuple(n) for n in s) for s in ev["sets"]))

    cf_doc = data.get("cf", DEFAULTS["cf"])
    weights = tuple(cf_doc["weights"]) if "weights" in cf_doc else None
    cf = CfSpec(cf_doc["mode"], weights)
    return ExperimentConfig(
        spec,
        event,
        int(data.get("steps", DEFAULTS["steps"])),
        cf,
        int(data.get("runs", DEFAULTS["runs"])),
        int(data.get("seed", DEFAULTS["seed"])),
    )


def sweep_from_dict(data: dict, cfg: ExperimentConfig | None = None) -> SweepGrid:
    cfg = cfg or experiment_from_dict(data)
    p = cfg.network.params
    sweep = data.get("sweep", {})
    return SweepGrid(
        cfg,
        tuple(float(v) for v in sweep.get("p_m", [p.p_m])),
        tuple(float(v) for v in sweep.get("p_s", [p.p_s])),
        tuple(int(v) for v in sweep.get("t_r", [p.t_r])),
    )


def experiment_to_document(cfg: ExperimentConfig, grid: SweepGrid | None = None) -> dict:
    doc = {"kind": "experiment", **cfg.to_dict()}
    if grid is not None:
        doc["sweep"] = {"p_m": list(grid.p_m), "p_s": list(grid.p_s), "t_r": list(grid.t_r)}
    return doc


def dump_json(doc: Any, path: str | Path | None = None) -> str:
    text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text

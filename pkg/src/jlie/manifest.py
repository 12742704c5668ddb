"""Loading and validating JSON manifests of Jacobi structures."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import jsonschema

from .jacobi import JacobiStructure, check_jacobi
from .multivec import Multivector
from .scalar import Chart, Expr, parse_expr

FIXTURES = ("heisenberg", "sl2", "riccati_r1", "riccati_r4", "rectified")

_MULTIVECTOR = {
    "type": "object",
    "required": ["degree"],
    "properties": {
        "degree": {"type": "integer", "minimum": -1},
        "components": {
            "type": "object",
            "propertyNames": {"pattern": r"^(\d+(,\d+)*)?$"},
            "additionalProperties": {"type": "string"},
        },
    },
    "additionalProperties": False,
}

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["chart", "lambda", "reeb"],
    "properties": {
        "name": {"type": "string"},
        "chart": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "lambda": _MULTIVECTOR,
        "reeb": _MULTIVECTOR,
        "fields": {"type": "object", "additionalProperties": _MULTIVECTOR},
        "functions": {"type": "object", "additionalProperties": {"type": "string"}},
        "annotations": {"type": "array", "items": {"type": "string"}},
    },
    "additionalProperties": False,
}


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class Manifest:
    name: str
    chart: Chart
    bivector: Multivector
    reeb: Multivector
    fields: dict[str, Multivector] = field(default_factory=dict)
    functions: dict[str, Expr] = field(default_factory=dict)
    annotations: tuple[str, ...] = ()
    source: str = ""

    def structure(self, seed: int = 0) -> JacobiStructure:
        return check_jacobi(self.bivector, self.reeb, seed, self.annotations)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "chart": list(self.chart.coords),
            "lambda": self.bivector.to_json(),
            "reeb": self.reeb.to_json(),
            "fields": {k: v.to_json() for k, v in self.fields.items()},
            "functions": {k: str(v) for k, v in self.functions.items()},
            "annotations": list(self.annotations),
        }


def parse_manifest(data: Mapping[str, Any], name: str = "manifest", source: str = "") -> Manifest:
    try:
        jsonschema.validate(data, MANIFEST_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ManifestError(f"schema error: {exc.message}") from None
    chart = Chart(data.get("name", name), tuple(data["chart"]))
    bivector = Multivector.from_json(data["lambda"], chart)
    reeb = Multivector.from_json(data["reeb"], chart)
    if bivector.degree != 2 or reeb.degree != 1:
        raise ManifestError("lambda must have degree 2 and reeb degree 1")
    fields = {k: Multivector.from_json(v, chart) for k, v in data.get("fields", {}).items()}
    for k, v in fields.items():
        if v.degree != 1:
            raise ManifestError(f"field {k} is not a vector field")
    functions = {k: parse_expr(v, chart) for k, v in data.get("functions", {}).items()}
    return Manifest(
        data.get("name", name),
        chart,
        bivector,
        reeb,
        fields,
        functions,
        tuple(data.get("annotations", ())),
        source,
    )


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise ManifestError(f"unknown fixture {name!r}")
    return resources.files("jlie.fixtures").joinpath(f"{name}.json").read_text()


def load_fixture(name: str) -> Manifest:
    return parse_manifest(json.loads(fixture_text(name)), name, f"fixture:{name}")


def read_manifest_text(path: str | Path) -> tuple[str, str]:
    """Return ``(text, source)``; built-in fixture names are resolved too.

    ``fixtures/heisenberg.json`` falls back to the packaged fixture when no
    such file exists on disk.
    """
    p = Path(path)
    if p.is_file():
        return p.read_text(), str(p)
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    if stem in FIXTURES:
        return fixture_text(stem), f"fixture:{stem}"
    raise ManifestError(f"no such manifest: {path}")


def load_manifest(path: str | Path) -> Manifest:
    text, source = read_manifest_text(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"invalid JSON: {exc}") from None
    return parse_manifest(data, Path(str(path)).stem, source)

"""Application profile catalog.

A catalog holds a variable registry, the operational conditions profiles were
collected under, and one entry per application with its controlled parameters
and per-condition distributions (ECDFs or category counts). Catalogs are
immutable; ``with_application`` returns a new value.
"""

from __future__ import annotations

import json
import os
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import IO, Any, Union

import jsonschema

from .errors import CatalogError, MissingConditionError, UnknownApplicationError
from .statdist import CategoricalDist, Ecdf

Distribution = Union[Ecdf, CategoricalDist]


class VarKind(str, Enum):
    PARAMETER = "parameter"
    KPM = "kpm"


class ValueType(str, Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class VariableId:
    """A registered variable. ``range`` optionally pins the INT integration interval."""

    name: str
    kind: VarKind
    value_type: ValueType = ValueType.NUMERIC
    unit: str | None = None
    range: tuple[float, float] | None = None

    @property
    def is_parameter(self) -> bool:
        return self.kind is VarKind.PARAMETER


@dataclass(frozen=True)
class OperationalCondition:
    id: str
    descriptors: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class StatisticalProfile:
    condition: str
    distributions: Mapping[str, Distribution]

    @property
    def sample_count(self) -> dict[str, int]:
        return {name: dist.n for name, dist in self.distributions.items()}

    def __getitem__(self, name: str) -> Distribution:
        return self.distributions[name]

    def __contains__(self, name: object) -> bool:
        return name in self.distributions


@dataclass(frozen=True)
class ApplicationProfile:
    app: str
    parameter_set: frozenset[str]
    profiles: Mapping[str, StatisticalProfile]
    priority: float = 0.0


class Catalog:
    def __init__(
        self,
        variables: Mapping[str, VariableId],
        conditions: Mapping[str, OperationalCondition],
        applications: Mapping[str, ApplicationProfile],
        metadata: Mapping[str, Any] | None = None,
    ):
        self.metadata = dict(metadata or {})
        self._variables = MappingProxyType(dict(variables))
        self._conditions = MappingProxyType(dict(conditions))
        self._applications = MappingProxyType(dict(applications))

    @property
    def variables(self) -> Mapping[str, VariableId]:
        return self._variables

    @property
    def conditions(self) -> Mapping[str, OperationalCondition]:
        return self._conditions

    @property
    def applications(self) -> Mapping[str, ApplicationProfile]:
        return self._applications

    @property
    def app_ids(self) -> list[str]:
        return sorted(self._applications)

    def __len__(self) -> int:
        return len(self._applications)

    def __contains__(self, app: object) -> bool:
        return app in self._applications

    def variable(self, name: str) -> VariableId:
        try:
            return self._variables[name]
        except KeyError:
            raise CatalogError(f"unknown variable {name!r}") from None

    def application(self, app: str) -> ApplicationProfile:
        try:
            return self._applications[app]
        except KeyError:
            raise UnknownApplicationError(f"unknown application {app!r}") from None

    def controlled_parameters(self, app: str) -> frozenset[str]:
        return self.application(app).parameter_set

    def profile_of(self, app: str, condition: str) -> StatisticalProfile:
        entry = self.application(app)
        try:
            return entry.profiles[condition]
        except KeyError:
            raise MissingConditionError(
                f"application {app!r} has no profile for condition {condition!r}; "
                "run the sandbox profiler for it first"
            ) from None

    def priority(self, app: str) -> float:
        return self.application(app).priority

    def with_application(self, entry: ApplicationProfile, replace: bool = True) -> Catalog:
        """Return a new catalog containing ``entry``, merging profiles per condition."""
        apps = dict(self._applications)
        old = apps.get(entry.app)
        if old is not None and not replace:
            raise CatalogError(f"duplicate application id {entry.app!r}")
        if old is not None and old.parameter_set == entry.parameter_set:
            merged = {**old.profiles, **entry.profiles}
            entry = ApplicationProfile(entry.app, entry.parameter_set, merged, entry.priority)
        apps[entry.app] = entry
        conditions = dict(self._conditions)
        for cond in entry.profiles:
            conditions.setdefault(cond, OperationalCondition(cond))
        cat = Catalog(self._variables, conditions, apps, self.metadata)
        _check_application(cat, entry, f"applications[{entry.app}]")
        return cat

    def with_variables(self, variables: list[VariableId]) -> Catalog:
        """Register missing variables; existing entries of the same kind are kept as is."""
        reg = dict(self._variables)
        for v in variables:
            old = reg.get(v.name)
            if old is None:
                reg[v.name] = v
            elif (old.kind, old.value_type) != (v.kind, v.value_type):
                raise CatalogError(f"variable {v.name!r} already registered as {old.kind.value}/{old.value_type.value}")
        return Catalog(reg, self._conditions, self._applications, self.metadata)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Catalog):
            return NotImplemented
        return dump_catalog(self) == dump_catalog(other)

    def __repr__(self) -> str:
        return f"Catalog(apps={self.app_ids!r}, variables={len(self._variables)}, conditions={sorted(self._conditions)!r})"


# -- document schema -------------------------------------------------------------

_NUMBER_PAIR = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

PROFILE_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["variables", "applications"],
    "properties": {
        "variables": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "kind"],
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "kind": {"enum": [k.value for k in VarKind]},
                    "value_type": {"enum": [t.value for t in ValueType]},
                    "unit": {"type": ["string", "null"]},
                    "range": _NUMBER_PAIR,
                },
                "additionalProperties": False,
            },
        },
        "conditions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "descriptors": {"type": "object", "additionalProperties": {"type": "string"}},
                },
                "additionalProperties": False,
            },
        },
        "applications": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "parameters", "profiles"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "parameters": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                    "priority": {"type": "number", "minimum": 0},
                    "profiles": {
                        "type": "object",
                        "additionalProperties": {
                            "type": "object",
                            "required": ["distributions"],
                            "properties": {
                                "distributions": {
                                    "type": "object",
                                    "additionalProperties": {"$ref": "#/$defs/distribution"},
                                },
                            },
                            "additionalProperties": False,
                        },
                    },
                },
                "additionalProperties": False,
            },
        },
        "metadata": {"type": "object"},
    },
    "additionalProperties": False,
    "$defs": {
        "distribution": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["type", "points", "n"],
                    "properties": {
                        "type": {"const": "ecdf"},
                        "points": {"type": "array", "items": _NUMBER_PAIR, "minItems": 1},
                        "n": {"type": "integer", "minimum": 1},
                    },
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "required": ["type", "counts"],
                    "properties": {
                        "type": {"const": "categorical"},
                        "counts": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}},
                    },
                    "additionalProperties": False,
                },
            ]
        }
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(PROFILE_SCHEMA)


def _read_document(source) -> dict:
    if isinstance(source, Mapping):
        return dict(source)
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return json.load(fh)
    return json.load(source)


def load_catalog(source: Mapping | str | os.PathLike | IO[str]) -> Catalog:
    """Parse and validate a profile document (a path, open file, or decoded dict)."""
    doc = _read_document(source)
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise CatalogError(f"schema violation: {err.message}", location=err.json_path)

    variables: dict[str, VariableId] = {}
    for i, v in enumerate(doc["variables"]):
        if v["name"] in variables:
            raise CatalogError(f"duplicate variable name {v['name']!r}", location=f"$.variables[{i}]")
        rng = v.get("range")
        if rng is not None and not rng[0] < rng[1]:
            raise CatalogError(f"range {rng} must have lo < hi", location=f"$.variables[{i}].range")
        variables[v["name"]] = VariableId(
            name=v["name"],
            kind=VarKind(v["kind"]),
            value_type=ValueType(v.get("value_type", "numeric")),
            unit=v.get("unit"),
            range=tuple(rng) if rng is not None else None,
        )

    conditions: dict[str, OperationalCondition] = {}
    for i, c in enumerate(doc.get("conditions", [])):
        if c["id"] in conditions:
            raise CatalogError(f"duplicate condition id {c['id']!r}", location=f"$.conditions[{i}]")
        conditions[c["id"]] = OperationalCondition(c["id"], MappingProxyType(dict(c.get("descriptors", {}))))

    apps: dict[str, ApplicationProfile] = {}
    for i, a in enumerate(doc["applications"]):
        loc = f"$.applications[{i}]"
        if a["id"] in apps:
            raise CatalogError(f"duplicate application id {a['id']!r}", location=loc)
        profiles = {}
        for cond, body in a["profiles"].items():
            if cond not in conditions:
                raise CatalogError(f"profile for undeclared condition {cond!r}", location=f"{loc}.profiles")
            dists = {}
            for name, d in body["distributions"].items():
                dloc = f"{loc}.profiles.{cond}.distributions.{name}"
                try:
                    dists[name] = _parse_distribution(d)
                except ValueError as exc:
                    raise CatalogError(str(exc), location=dloc) from None
            profiles[cond] = StatisticalProfile(cond, MappingProxyType(dists))
        entry = ApplicationProfile(
            app=a["id"],
            parameter_set=frozenset(a["parameters"]),
            profiles=MappingProxyType(profiles),
            priority=float(a.get("priority", 0.0)),
        )
        apps[entry.app] = entry

    catalog = Catalog(variables, conditions, apps, doc.get("metadata"))
    for i, entry in enumerate(apps.values()):
        _check_application(catalog, entry, f"$.applications[{i}]")
    return catalog


def _parse_distribution(d: Mapping) -> Distribution:
    if d["type"] == "ecdf":
        return Ecdf(d["points"], n=d["n"])
    return CategoricalDist(d["counts"])


def _check_application(catalog: Catalog, entry: ApplicationProfile, loc: str) -> None:
    if not entry.parameter_set:
        raise CatalogError("parameter set must be non-empty", location=f"{loc}.parameters")
    for p in sorted(entry.parameter_set):
        var = catalog.variables.get(p)
        if var is None:
            raise CatalogError(f"parameter {p!r} is not in the variable registry", location=f"{loc}.parameters")
        if not var.is_parameter:
            raise CatalogError(f"{p!r} is a KPM, not a parameter", location=f"{loc}.parameters")
    for cond, prof in entry.profiles.items():
        ploc = f"{loc}.profiles.{cond}"
        measured_params = set()
        for name, dist in prof.distributions.items():
            var = catalog.variables.get(name)
            if var is None:
                raise CatalogError(f"distribution for unregistered variable {name!r}", location=ploc)
            expects_ecdf = var.value_type is ValueType.NUMERIC
            if expects_ecdf != isinstance(dist, Ecdf):
                raise CatalogError(f"{name!r} is {var.value_type.value} but stored as {type(dist).__name__}", location=ploc)
            if var.is_parameter:
                measured_params.add(name)
        if measured_params != set(entry.parameter_set):
            raise CatalogError(
                f"parameter distributions {sorted(measured_params)} do not match "
                f"the declared parameter set {sorted(entry.parameter_set)}",
                location=ploc,
            )


def dump_catalog(catalog: Catalog) -> dict:
    """Serialize to the document form accepted by ``load_catalog``."""
    variables = []
    for v in catalog.variables.values():
        item: dict[str, Any] = {"name": v.name, "kind": v.kind.value, "value_type": v.value_type.value}
        if v.unit is not None:
            item["unit"] = v.unit
        if v.range is not None:
            item["range"] = list(v.range)
        variables.append(item)
    conditions = [{"id": c.id, "descriptors": dict(c.descriptors)} for c in catalog.conditions.values()]
    apps = []
    for a in catalog.applications.values():
        profiles = {}
        for cond, prof in a.profiles.items():
            dists = {}
            for name, d in prof.distributions.items():
                if isinstance(d, Ecdf):
                    dists[name] = {"type": "ecdf", "points": [list(p) for p in d.points], "n": d.n}
                else:
                    dists[name] = {"type": "categorical", "counts": dict(d.counts)}
            profiles[cond] = {"distributions": dists}
        apps.append({"id": a.app, "parameters": sorted(a.parameter_set), "priority": a.priority, "profiles": profiles})
    doc: dict[str, Any] = {"variables": variables, "conditions": conditions, "applications": apps}
    if catalog.metadata:
        doc["metadata"] = catalog.metadata
    return doc


def save_catalog(catalog: Catalog, path: str | os.PathLike) -> None:
    Path(path).write_text(json.dumps(dump_catalog(catalog), indent=1) + "\n", encoding="utf-8")

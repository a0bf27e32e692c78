"""Dependency graphs and conflict detection.

The base graph has parameter nodes and KPM nodes. A parameter edge ``(p, q)``
says ``p`` influences ``q``; a KPM edge ``(p, k)`` says ``p`` influences ``k``.
The augmented graph adds one node per application with an edge to each
parameter it controls. Detection counts edges only; nothing is closed
transitively, and cycles among parameters are allowed.
"""

from __future__ import annotations

import json
import os
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .catalog import Catalog, VarKind
from .errors import CatalogError, GraphError


@dataclass(frozen=True)
class ConflictGraph:
    params: frozenset[str]
    kpms: frozenset[str]
    param_edges: frozenset[tuple[str, str]] = frozenset()
    kpm_edges: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self) -> None:
        for name in ("params", "kpms", "param_edges", "kpm_edges"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        if self.params & self.kpms:
            raise GraphError(f"nodes used as both parameter and KPM: {sorted(self.params & self.kpms)}")
        for src, dst in self.param_edges:
            if src not in self.params or dst not in self.params:
                raise GraphError(f"parameter edge ({src}, {dst}) references an unknown parameter")
            if src == dst:
                raise GraphError(f"explicit self edge on {src!r}; identity influence is implicit")
        for src, dst in self.kpm_edges:
            if src not in self.params:
                raise GraphError(f"KPM edge ({src}, {dst}) starts at an unknown parameter")
            if dst not in self.kpms:
                raise GraphError(f"KPM edge ({src}, {dst}) ends at an unknown KPM")

    def influencers_of(self, param: str) -> set[str]:
        return {src for src, dst in self.param_edges if dst == param}

    def feeders_of(self, kpm: str) -> set[str]:
        return {src for src, dst in self.kpm_edges if dst == kpm}

    def to_dict(self) -> dict:
        return {
            "params": sorted(self.params),
            "kpms": sorted(self.kpms),
            "param_edges": sorted(list(e) for e in self.param_edges),
            "kpm_edges": sorted(list(e) for e in self.kpm_edges),
        }


@dataclass(frozen=True)
class AugmentedGraph:
    apps: frozenset[str]
    control_edges: frozenset[tuple[str, str]]
    base: ConflictGraph

    def controllers(self, param: str) -> frozenset[str]:
        return frozenset(a for a, p in self.control_edges if p == param)

    @property
    def controlled(self) -> frozenset[str]:
        return frozenset(p for _, p in self.control_edges)

    def to_dict(self) -> dict:
        return {
            "apps": sorted(self.apps),
            "control_edges": sorted(list(e) for e in self.control_edges),
            **self.base.to_dict(),
        }


@dataclass(frozen=True)
class DetectionResult:
    """Conflicting variables mapped to the applications involved.

    ``parameter_influencers`` lists, for each parameter conflict, the apps
    controlling the influencing parameters. It is auxiliary data, not part of
    the conflict sets themselves.
    """

    direct: Mapping[str, frozenset[str]] = field(default_factory=dict)
    parameter: Mapping[str, frozenset[str]] = field(default_factory=dict)
    kpm: Mapping[str, frozenset[str]] = field(default_factory=dict)
    parameter_influencers: Mapping[str, frozenset[str]] = field(default_factory=dict)

    @property
    def has_conflicts(self) -> bool:
        return bool(self.direct or self.parameter or self.kpm)

    def apps_in_conflict(self) -> frozenset[str]:
        out: set[str] = set()
        for section in (self.direct, self.parameter, self.kpm, self.parameter_influencers):
            for apps in section.values():
                out |= apps
        return frozenset(out)

    def to_dict(self) -> dict:
        def section(m):
            return {k: sorted(v) for k, v in sorted(m.items())}

        return {
            "direct": section(self.direct),
            "parameter": section(self.parameter),
            "kpm": section(self.kpm),
            "aux_parameter_influencers": section(self.parameter_influencers),
        }


def build_augmented(catalog: Catalog, graph: ConflictGraph, apps: Iterable[str]) -> AugmentedGraph:
    apps = frozenset(apps)
    edges = set()
    for app in sorted(apps):
        for p in catalog.controlled_parameters(app):
            if p not in graph.params:
                raise GraphError(f"application {app!r} controls {p!r}, which is not in the parameter graph")
            edges.add((app, p))
    return AugmentedGraph(apps, frozenset(edges), graph)


def augment_from_sets(param_sets: Mapping[str, Iterable[str]], graph: ConflictGraph) -> AugmentedGraph:
    """Like ``build_augmented`` but from explicit ``app -> parameters`` sets."""
    edges = set()
    for app, params in param_sets.items():
        for p in params:
            if p not in graph.params:
                raise GraphError(f"application {app!r} controls {p!r}, which is not in the parameter graph")
            edges.add((app, p))
    return AugmentedGraph(frozenset(param_sets), frozenset(edges), graph)


def detect_direct(aug: AugmentedGraph) -> dict[str, frozenset[str]]:
    out = {}
    for p in aug.controlled:
        owners = aug.controllers(p)
        if len(owners) > 1:
            out[p] = owners
    return out


def _parameter_counts(aug: AugmentedGraph) -> dict[str, set[str]]:
    """Foreign controlled parameters with an edge into each controlled parameter."""
    controlled = aug.controlled
    incoming: dict[str, set[str]] = {p: set() for p in controlled}
    for src, dst in aug.base.param_edges:
        if src in controlled and dst in controlled:
            incoming[dst].add(src)
    return incoming


def detect_parameter(aug: AugmentedGraph) -> tuple[dict[str, frozenset[str]], dict[str, frozenset[str]]]:
    """Parameter conflicts and, separately, who controls the influencing parameters.

    A controlled parameter counts its own control as one incoming influence,
    so one edge from another controlled parameter is enough to flag it.
    """
    conflicts, influencers = {}, {}
    for p, sources in _parameter_counts(aug).items():
        if 1 + len(sources) > 1:
            conflicts[p] = aug.controllers(p)
            influencers[p] = frozenset().union(*(aug.controllers(s) for s in sources))
    return conflicts, influencers


def detect_kpm(aug: AugmentedGraph) -> dict[str, frozenset[str]]:
    controlled = aug.controlled
    feeders: dict[str, set[str]] = {}
    for p, k in aug.base.kpm_edges:
        if p in controlled:
            feeders.setdefault(k, set()).add(p)
    out = {}
    for k, ps in feeders.items():
        if len(ps) > 1:
            out[k] = frozenset().union(*(aug.controllers(p) for p in ps))
    return out


def detect_all(aug: AugmentedGraph) -> DetectionResult:
    parameter, influencers = detect_parameter(aug)
    return DetectionResult(
        direct=detect_direct(aug),
        parameter=parameter,
        kpm=detect_kpm(aug),
        parameter_influencers=influencers,
    )


def load_graph(source, catalog: Catalog | None = None) -> ConflictGraph:
    """Read a graph document ``{"param_edges": [...], "kpm_edges": [...]}``.

    Node sets come from optional ``params``/``kpms`` lists, else from the
    catalog registry, else from the edge endpoints. With a catalog, every
    endpoint must be registered with the matching kind.
    """
    if isinstance(source, Mapping):
        doc = dict(source)
    elif isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = json.load(source)
    try:
        param_edges = {(str(a), str(b)) for a, b in doc.get("param_edges", [])}
        kpm_edges = {(str(a), str(b)) for a, b in doc.get("kpm_edges", [])}
    except (TypeError, ValueError):
        raise GraphError("edges must be two-element lists") from None

    if catalog is not None:
        for a, b in param_edges:
            _check_kind(catalog, a, VarKind.PARAMETER)
            _check_kind(catalog, b, VarKind.PARAMETER)
        for a, b in kpm_edges:
            _check_kind(catalog, a, VarKind.PARAMETER)
            _check_kind(catalog, b, VarKind.KPM)

    if "params" in doc:
        params = set(doc["params"])
    elif catalog is not None:
        params = {n for n, v in catalog.variables.items() if v.kind is VarKind.PARAMETER}
    else:
        params = {x for e in param_edges for x in e} | {a for a, _ in kpm_edges}
    if "kpms" in doc:
        kpms = set(doc["kpms"])
    elif catalog is not None:
        kpms = {n for n, v in catalog.variables.items() if v.kind is VarKind.KPM}
    else:
        kpms = {b for _, b in kpm_edges}
    return ConflictGraph(frozenset(params), frozenset(kpms), frozenset(param_edges), frozenset(kpm_edges))


def _check_kind(catalog: Catalog, name: str, kind: VarKind) -> None:
    try:
        var = catalog.variable(name)
    except CatalogError:
        raise GraphError(f"graph references unregistered variable {name!r}") from None
    if var.kind is not kind:
        raise GraphError(f"graph uses {name!r} as a {kind.value} but it is registered as a {var.kind.value}")

"""Pairwise distance vectors, severity indexes and the conflict report."""

from __future__ import annotations

import csv
import io
import itertools
import json
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

from .catalog import Catalog, ValueType
from .errors import EvaluationError
from .graph import ConflictGraph, DetectionResult, build_augmented, detect_all
from .statdist import DistanceValue, Ecdf, Metric, chi_distance, int_distance, ks_distance

Pair = tuple[str, str]


def canonical_pair(a: str, b: str) -> Pair:
    return (a, b) if a <= b else (b, a)


class Scope(str, Enum):
    PARAMETERS = "parameters"
    KPMS = "kpms"


@dataclass(frozen=True)
class DistanceVector:
    """Per-variable distances between two applications under one condition.

    Numeric variables carry both KS and INT; categorical ones carry CHI.
    """

    pair: Pair
    condition: str
    entries: Mapping[str, Mapping[Metric, DistanceValue]]

    def values(self, metric: Metric = Metric.INT, variables: Iterable[str] | None = None) -> dict[str, float]:
        """Distances under ``metric``; categorical entries always use CHI."""
        names = self.entries if variables is None else variables
        out = {}
        for name in names:
            try:
                per = self.entries[name]
            except KeyError:
                raise EvaluationError(f"variable {name!r} not in distance vector for {self.pair}") from None
            out[name] = (per[metric] if metric in per else per[Metric.CHI]).value
        return out

    def to_dict(self) -> dict:
        return {name: {m.value: d.value for m, d in sorted(per.items(), key=lambda kv: kv[0].value)}
                for name, per in sorted(self.entries.items())}


def distance_vector(
    catalog: Catalog,
    a: str,
    b: str,
    condition: str,
    variables: Iterable[str],
    ranges: Mapping[str, tuple[float, float]] | None = None,
) -> DistanceVector:
    """Distances between ``a`` and ``b`` for each variable.

    INT uses, in order of preference, ``ranges[name]``, the registry range of
    the variable, then the pooled support.
    """
    prof_a = catalog.profile_of(a, condition)
    prof_b = catalog.profile_of(b, condition)
    ranges = ranges or {}
    entries = {}
    for name in sorted(set(variables)):
        var = catalog.variable(name)
        for app, prof in ((a, prof_a), (b, prof_b)):
            if name not in prof:
                raise EvaluationError(f"{name!r} is not profiled for {app!r} under {condition!r}")
        da, db = prof_a[name], prof_b[name]
        if var.value_type is ValueType.CATEGORICAL:
            entries[name] = {Metric.CHI: chi_distance(da, db)}
        else:
            rng = ranges.get(name, var.range)
            try:
                entries[name] = {Metric.KS: ks_distance(da, db), Metric.INT: int_distance(da, db, rng)}
            except ValueError as exc:
                raise EvaluationError(f"{name!r}: {exc}") from None
    return DistanceVector(canonical_pair(a, b), condition, entries)


class AggKind(str, Enum):
    MEAN = "mean"
    MEDIAN = "median"
    MAX = "max"


@dataclass(frozen=True)
class Aggregator:
    kind: AggKind = AggKind.MEAN
    weights: Mapping[str, float] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", AggKind(self.kind))
        if self.weights is not None:
            if any(w < 0 for w in self.weights.values()):
                raise EvaluationError("weights must be non-negative")
            if not any(w > 0 for w in self.weights.values()):
                raise EvaluationError("at least one weight must be positive")

    def __call__(self, values: Mapping[str, float]) -> float:
        if not values:
            raise EvaluationError("cannot aggregate an empty focus set")
        names = sorted(values)
        xs = [values[n] for n in names]
        if self.kind is AggKind.MAX:
            return max(xs)
        if self.kind is AggKind.MEDIAN:
            return sorted(xs)[(len(xs) - 1) // 2]
        if self.weights is None:
            return sum(xs) / len(xs)
        missing = [n for n in names if n not in self.weights]
        if missing:
            raise EvaluationError(f"no weight given for {missing}")
        ws = [self.weights[n] for n in names]
        total = sum(ws)
        if total <= 0:
            raise EvaluationError("weights over the focus set sum to zero")
        return sum(w * x for w, x in zip(ws, xs)) / total

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "weights": dict(sorted(self.weights.items())) if self.weights else None}


@dataclass(frozen=True)
class SeverityIndex:
    pair: Pair
    condition: str
    scope: Scope
    value: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise EvaluationError(f"severity {self.value} outside [0, 1]")


def severity(
    vector: DistanceVector,
    focus: Iterable[str],
    agg: Aggregator = Aggregator(),
    metric: Metric = Metric.INT,
    scope: Scope = Scope.KPMS,
) -> SeverityIndex:
    focus = sorted(set(focus))
    if not focus:
        raise EvaluationError("severity needs a non-empty focus set")
    value = agg(vector.values(metric, focus))
    return SeverityIndex(vector.pair, vector.condition, scope, min(1.0, max(0.0, value)))


class SeverityMatrix:
    """Symmetric pairwise severities with an implicit zero diagonal.

    ``components`` optionally keeps the per-variable distances behind each
    entry so per-KPM thresholds can be checked.
    """

    def __init__(
        self,
        apps: Iterable[str],
        values: Mapping[Pair, float],
        components: Mapping[Pair, Mapping[str, float]] | None = None,
    ):
        self.apps = sorted(set(apps))
        self._values: dict[Pair, float] = {}
        for (a, b), v in values.items():
            key = canonical_pair(a, b)
            if a == b:
                continue
            if key in self._values and self._values[key] != v:
                raise EvaluationError(f"asymmetric severity for {key}: {self._values[key]} vs {v}")
            self._values[key] = float(v)
        self.components = {canonical_pair(*k): dict(v) for k, v in (components or {}).items()}

    def __getitem__(self, pair: Pair) -> float:
        a, b = pair
        if a == b:
            return 0.0
        try:
            return self._values[canonical_pair(a, b)]
        except KeyError:
            raise EvaluationError(f"no severity for pair ({a}, {b})") from None

    def __contains__(self, pair: object) -> bool:
        a, b = pair
        return a == b or canonical_pair(a, b) in self._values

    def pairs(self) -> list[Pair]:
        return sorted(self._values)

    def items(self):
        return sorted(self._values.items())

    def __len__(self) -> int:
        return len(self._values)

    def to_dict(self) -> dict:
        out = {"apps": self.apps, "pairs": [[a, b, v] for (a, b), v in self.items()]}
        if self.components:
            out["components"] = [[a, b, dict(sorted(c.items()))] for (a, b), c in sorted(self.components.items())]
        return out

    @classmethod
    def from_dict(cls, doc: Mapping) -> SeverityMatrix:
        values = {(a, b): v for a, b, v in doc["pairs"]}
        comps = {(a, b): c for a, b, c in doc.get("components", [])}
        apps = doc.get("apps") or sorted({x for p in values for x in p})
        return cls(apps, values, comps)

    def rows(self) -> list[list[float]]:
        return [[self[(a, b)] for b in self.apps] for a in self.apps]


def severity_matrix(
    catalog: Catalog,
    apps: Iterable[str],
    condition: str,
    focus: Iterable[str],
    agg: Aggregator = Aggregator(),
    metric: Metric = Metric.INT,
    scope: Scope = Scope.KPMS,
    ranges: Mapping[str, tuple[float, float]] | None = None,
    workers: int | None = None,
) -> SeverityMatrix:
    """All unordered-pair severities; ``workers`` > 1 spreads pairs over threads."""
    apps = sorted(set(apps))
    focus = sorted(set(focus))
    pairs = list(itertools.combinations(apps, 2))

    def one(pair: Pair) -> tuple[float, dict[str, float]]:
        vec = distance_vector(catalog, pair[0], pair[1], condition, focus, ranges)
        return severity(vec, focus, agg, metric, scope).value, vec.values(metric, focus)

    if workers and workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, pairs))
    else:
        results = [one(p) for p in pairs]
    return SeverityMatrix(
        apps,
        {p: r[0] for p, r in zip(pairs, results)},
        {p: r[1] for p, r in zip(pairs, results)},
    )


@dataclass(frozen=True)
class KpmFocus:
    params_of_interest: frozenset[str] = frozenset()
    kpms_of_interest: frozenset[str] = frozenset()


@dataclass
class ConflictReport:
    app_set: list[str]
    condition: str
    detection: DetectionResult
    distance_vectors: list[DistanceVector]
    param_severity: SeverityMatrix
    kpm_severity: SeverityMatrix
    graphs: dict
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "existence": self.detection.to_dict(),
            "severity": {
                "parameters": self.param_severity.to_dict(),
                "kpms": self.kpm_severity.to_dict(),
                "distances": [
                    {"pair": list(v.pair), "entries": v.to_dict()} for v in self.distance_vectors
                ],
            },
            "graphs": self.graphs,
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def generate_report(
    catalog: Catalog,
    graph: ConflictGraph,
    apps: Iterable[str],
    condition: str,
    focus: KpmFocus,
    agg: Aggregator = Aggregator(),
    metric: Metric = Metric.INT,
    ranges: Mapping[str, tuple[float, float]] | None = None,
    workers: int | None = None,
) -> ConflictReport:
    """Detection sets, both severity matrices and the augmented graph for ``apps``.

    Parameter severity for a pair is taken over the focused parameters both
    applications profile; a pair sharing none of them scores 0. KPM severity
    requires every focused KPM to be profiled by every application.
    """
    apps = sorted(set(apps))
    if not focus.kpms_of_interest:
        raise EvaluationError("the KPM focus set is empty")
    aug = build_augmented(catalog, graph, apps)
    detection = detect_all(aug)

    params_focus = sorted(focus.params_of_interest) or sorted(
        set().union(*(catalog.controlled_parameters(a) for a in apps)) if apps else set()
    )
    kpms_focus = sorted(focus.kpms_of_interest)
    pairs = list(itertools.combinations(apps, 2))

    def one(pair: Pair):
        a, b = pair
        pa, pb = catalog.profile_of(a, condition), catalog.profile_of(b, condition)
        shared = [p for p in params_focus if p in pa and p in pb]
        vec = distance_vector(catalog, a, b, condition, set(shared) | set(kpms_focus), ranges)
        sig_p = severity(vec, shared, agg, metric, Scope.PARAMETERS).value if shared else 0.0
        sig_k = severity(vec, kpms_focus, agg, metric, Scope.KPMS).value
        return vec, sig_p, sig_k, vec.values(metric, shared), vec.values(metric, kpms_focus)

    if workers and workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, pairs))
    else:
        results = [one(p) for p in pairs]

    focus_all = set(params_focus) | set(kpms_focus)
    kinds = {catalog.variable(n).value_type for n in focus_all}
    metadata = {
        "condition": condition,
        "apps": apps,
        "metric": metric.value,
        "aggregator": agg.to_dict(),
        "focus": {"parameters": params_focus, "kpms": kpms_focus},
        "ranges": {k: list(v) for k, v in sorted((ranges or {}).items())},
        "mixed_value_types": len(kinds) > 1,
    }
    return ConflictReport(
        app_set=apps,
        condition=condition,
        detection=detection,
        distance_vectors=[r[0] for r in results],
        param_severity=SeverityMatrix(apps, {p: r[1] for p, r in zip(pairs, results)},
                                      {p: r[3] for p, r in zip(pairs, results)}),
        kpm_severity=SeverityMatrix(apps, {p: r[2] for p, r in zip(pairs, results)},
                                    {p: r[4] for p, r in zip(pairs, results)}),
        graphs={"augmented": aug.to_dict()},
        metadata=metadata,
    )


def ecdf_curves_csv(catalog: Catalog, apps: Sequence[str], condition: str, variables: Sequence[str]) -> str:
    """Step points of each (app, variable) ECDF as CSV rows ``app,variable,x,F``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["app", "variable", "x", "F"])
    for app in apps:
        prof = catalog.profile_of(app, condition)
        for name in variables:
            dist = prof[name] if name in prof else None
            if not isinstance(dist, Ecdf):
                continue
            for x, f in dist.points:
                writer.writerow([app, name, repr(x), repr(f)])
    return buf.getvalue()

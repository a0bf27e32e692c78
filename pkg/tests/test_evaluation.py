import random

import pytest

from ranconflict.catalog import load_catalog
from ranconflict.errors import EvaluationError
from ranconflict.evaluation import (
    AggKind,
    Aggregator,
    DistanceVector,
    KpmFocus,
    Scope,
    SeverityMatrix,
    distance_vector,
    ecdf_curves_csv,
    generate_report,
    severity,
    severity_matrix,
)
from ranconflict.graph import ConflictGraph
from ranconflict.statdist import DistanceValue, Metric

from conftest import APPS, CONDITION

EMBB_KPMS = ["embb_buffer", "embb_throughput"]


def vector(values: dict, metric=Metric.INT) -> DistanceVector:
    return DistanceVector(("a", "b"), "c", {k: {metric: DistanceValue(metric, v)} for k, v in values.items()})


class TestAggregator:
    def test_mean_examples(self):
        assert severity(vector({"buffer": 0.29, "throughput": 0.13}), ["buffer", "throughput"]).value == pytest.approx(0.21)
        assert severity(vector({"buffer": 0.78, "throughput": 0.41}), ["buffer", "throughput"]).value == pytest.approx(0.595)

    def test_max_and_lower_median(self):
        v = vector({"x": 0.1, "y": 0.9})
        assert severity(v, ["x", "y"], Aggregator(AggKind.MAX)).value == 0.9
        assert severity(v, ["x", "y"], Aggregator(AggKind.MEDIAN)).value == 0.1
        v3 = vector({"x": 0.1, "y": 0.9, "z": 0.5})
        assert severity(v3, ["x", "y", "z"], Aggregator(AggKind.MEDIAN)).value == 0.5

    def test_weighted_mean_normalises(self):
        v = vector({"x": 0.2, "y": 0.8})
        agg = Aggregator(AggKind.MEAN, {"x": 3, "y": 1})
        assert severity(v, ["x", "y"], agg).value == pytest.approx(0.35)
        scaled = Aggregator(AggKind.MEAN, {"x": 300, "y": 100})
        assert severity(v, ["x", "y"], scaled).value == pytest.approx(0.35)

    def test_weight_errors(self):
        with pytest.raises(EvaluationError):
            Aggregator(AggKind.MEAN, {"x": -1})
        with pytest.raises(EvaluationError):
            Aggregator(AggKind.MEAN, {"x": 0})
        with pytest.raises(EvaluationError, match="no weight"):
            severity(vector({"x": 0.1, "y": 0.2}), ["x", "y"], Aggregator(AggKind.MEAN, {"x": 1}))

    def test_empty_focus(self):
        with pytest.raises(EvaluationError):
            severity(vector({"x": 0.1}), [])

    def test_max_dominates_mean(self):
        rng = random.Random(0)
        for _ in range(500):
            vals = {f"v{i}": rng.random() for i in range(rng.randint(1, 6))}
            v = vector(vals)
            mx = severity(v, vals, Aggregator(AggKind.MAX)).value
            mean = severity(v, vals).value
            assert mx >= mean - 1e-15 >= -1e-15


class TestDistanceVector:
    def test_fixture_ks_entries(self, slicing_catalog):
        v = distance_vector(slicing_catalog, "a1", "a2", CONDITION, ["embb_prbs"])
        assert v.values(Metric.KS)["embb_prbs"] == pytest.approx(0.47, abs=0.01)

    def test_identity(self, slicing_catalog):
        names = list(slicing_catalog.profile_of("a3", CONDITION).distributions)
        v = distance_vector(slicing_catalog, "a3", "a3", CONDITION, names)
        for per in v.entries.values():
            assert all(d.value == 0.0 for d in per.values())

    def test_missing_variable_is_error(self, toy_catalog):
        with pytest.raises(EvaluationError, match="p1"):
            distance_vector(toy_catalog, "a1", "a2", "toy", ["p1"])

    def test_registry_range_used(self, slicing_catalog):
        v = distance_vector(slicing_catalog, "a1", "a5", CONDITION, ["embb_prbs"])
        assert v.values()["embb_prbs"] == pytest.approx(0.81, abs=0.01)
        pooled = distance_vector(slicing_catalog, "a1", "a5", CONDITION, ["embb_prbs"], {"embb_prbs": (0, 33)})
        assert pooled.values()["embb_prbs"] > 0.84

    def test_categorical_uses_chi(self):
        doc = {
            "variables": [{"name": "sched", "kind": "parameter", "value_type": "categorical"}],
            "conditions": [{"id": "c"}],
            "applications": [
                {"id": app, "parameters": ["sched"],
                 "profiles": {"c": {"distributions": {"sched": {"type": "categorical", "counts": counts}}}}}
                for app, counts in (("x", {"WF": 100, "RR": 0}), ("y", {"WF": 0, "RR": 100}))
            ],
        }
        cat = load_catalog(doc)
        v = distance_vector(cat, "y", "x", "c", ["sched"])
        assert v.pair == ("x", "y")
        assert Metric.CHI in v.entries["sched"]
        assert v.values(Metric.INT)["sched"] >= 0.999


class TestMatrix:
    def test_symmetry_and_zero_diagonal(self, slicing_catalog):
        m = severity_matrix(slicing_catalog, APPS, CONDITION, EMBB_KPMS)
        assert len(m) == 10
        for a in APPS:
            assert m[(a, a)] == 0.0
            for b in APPS:
                assert m[(a, b)] == m[(b, a)]

    def test_parallel_matches_serial(self, slicing_catalog):
        serial = severity_matrix(slicing_catalog, APPS, CONDITION, EMBB_KPMS)
        parallel = severity_matrix(slicing_catalog, APPS, CONDITION, EMBB_KPMS, workers=4)
        assert serial.to_dict() == parallel.to_dict()

    def test_singleton(self, slicing_catalog):
        assert len(severity_matrix(slicing_catalog, ["a1"], CONDITION, EMBB_KPMS)) == 0

    def test_round_trip_and_asymmetry(self):
        m = SeverityMatrix(["a", "b"], {("a", "b"): 0.3})
        assert SeverityMatrix.from_dict(m.to_dict()).to_dict() == m.to_dict()
        with pytest.raises(EvaluationError, match="asymmetric"):
            SeverityMatrix(["a", "b"], {("a", "b"): 0.3, ("b", "a"): 0.4})
        with pytest.raises(EvaluationError):
            m[("a", "c")]


class TestReport:
    def test_toy_report(self, toy_catalog, toy_graph):
        r = generate_report(toy_catalog, toy_graph, ["a2", "a1"], "toy", KpmFocus(kpms_of_interest=frozenset({"k1", "k2"})))
        d = r.to_dict()
        assert set(d) == {"existence", "severity", "graphs", "metadata"}
        assert d["existence"]["direct"] == {"p2": ["a1", "a2"]}
        assert d["existence"]["parameter"] == {"p3": ["a2"]}
        assert d["existence"]["kpm"] == {"k1": ["a1", "a2"]}
        # only p2 is profiled by both apps
        assert r.metadata["focus"]["parameters"] == ["p1", "p2", "p3"]
        assert r.param_severity.components[("a1", "a2")].keys() == {"p2"}
        assert 0 < r.kpm_severity[("a1", "a2")] <= 1

    def test_deterministic_bytes(self, slicing_catalog):
        g = ConflictGraph(frozenset({"embb_prbs", "mmtc_prbs", "urllc_prbs"}), frozenset(EMBB_KPMS))
        focus = KpmFocus(kpms_of_interest=frozenset(EMBB_KPMS))
        one = generate_report(slicing_catalog, g, APPS, CONDITION, focus).to_json()
        two = generate_report(slicing_catalog, g, list(reversed(APPS)), CONDITION, focus, workers=3).to_json()
        assert one == two

    def test_no_conflict_case(self):
        doc = {
            "variables": [
                {"name": "p", "kind": "parameter"}, {"name": "q", "kind": "parameter"}, {"name": "k", "kind": "kpm"},
            ],
            "conditions": [{"id": "c"}],
            "applications": [
                {"id": "x", "parameters": ["p"], "profiles": {"c": {"distributions": {
                    "p": {"type": "ecdf", "points": [[1, 1.0]], "n": 3},
                    "k": {"type": "ecdf", "points": [[1, 0.5], [2, 1.0]], "n": 3}}}}},
                {"id": "y", "parameters": ["q"], "profiles": {"c": {"distributions": {
                    "q": {"type": "ecdf", "points": [[5, 1.0]], "n": 3},
                    "k": {"type": "ecdf", "points": [[2, 1.0]], "n": 3}}}}},
            ],
        }
        cat = load_catalog(doc)
        g = ConflictGraph(frozenset({"p", "q"}), frozenset({"k"}))
        r = generate_report(cat, g, ["x", "y"], "c", KpmFocus(kpms_of_interest=frozenset({"k"})))
        assert not r.detection.has_conflicts
        assert r.param_severity[("x", "y")] == 0.0
        assert r.kpm_severity[("x", "y")] == pytest.approx(0.5 ** 0.5)

    def test_empty_kpm_focus(self, toy_catalog, toy_graph):
        with pytest.raises(EvaluationError):
            generate_report(toy_catalog, toy_graph, ["a1", "a2"], "toy", KpmFocus())

    def test_scope_field(self, slicing_catalog):
        v = distance_vector(slicing_catalog, "a1", "a2", CONDITION, ["embb_prbs"])
        assert severity(v, ["embb_prbs"], scope=Scope.PARAMETERS).scope is Scope.PARAMETERS

    def test_curves_csv(self, slicing_catalog):
        text = ecdf_curves_csv(slicing_catalog, ["a1"], CONDITION, ["embb_prbs"])
        lines = text.strip().splitlines()
        assert lines[0] == "app,variable,x,F"
        assert lines[1:] == ["a1,embb_prbs,24.0,0.0251", "a1,embb_prbs,27.0,0.5089",
                             "a1,embb_prbs,30.0,0.9777", "a1,embb_prbs,33.0,1.0"]


def test_identical_kpm_profiles_give_equal_rows():
    """Two apps with zero mean-INT severity have identical focused ECDFs, so
    they must score the same against any third app."""
    import numpy as np

    rng = np.random.default_rng(4)
    for _ in range(50):
        k1 = [[float(x), 0.0] for x in sorted(rng.choice(30, size=4, replace=False))]
        shared = {"k": {"type": "ecdf", "points": [[1, 0.5], [4, 1.0]], "n": 2}}
        third = {"k": {"type": "ecdf", "points": [[p[0], (i + 1) / 4] for i, p in enumerate(k1)], "n": 4}}
        doc = {
            "variables": [{"name": "p", "kind": "parameter"}, {"name": "k", "kind": "kpm"}],
            "conditions": [{"id": "c"}],
            "applications": [
                {"id": app, "parameters": ["p"], "profiles": {"c": {"distributions": {
                    "p": {"type": "ecdf", "points": [[float(i), 1.0]], "n": 1}, **dists}}}}
                for i, (app, dists) in enumerate((("x", third), ("y", shared), ("z", shared)))
            ],
        }
        m = severity_matrix(load_catalog(doc), ["x", "y", "z"], "c", ["k"])
        assert m[("y", "z")] == 0.0
        assert m[("x", "y")] == m[("x", "z")]

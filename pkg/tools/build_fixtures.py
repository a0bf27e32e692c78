"""Regenerate the shipped fixture documents under src/ranconflict/data.

PRB curves come from the transcribed step points; every other distribution
is produced by the sandbox with the default scenario, so the output is fully
reproducible:

    python tools/build_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

from ranconflict import sandbox
from ranconflict.catalog import dump_catalog, load_catalog

DATA = Path(__file__).resolve().parents[1] / "src" / "ranconflict" / "data"
NOMINAL_N = 61851
SLICES = ("embb", "mmtc", "urllc")

# Pairwise severities transcribed from the published eMBB and URLLC tables.
TABLE_EMBB = {
    ("a1", "a2"): 0.21, ("a1", "a3"): 0.35, ("a1", "a4"): 0.33, ("a1", "a5"): 0.59,
    ("a2", "a3"): 0.28, ("a2", "a4"): 0.26, ("a2", "a5"): 0.55,
    ("a3", "a4"): 0.19, ("a3", "a5"): 0.48,
    ("a4", "a5"): 0.00,
}
TABLE_URLLC = {
    ("a1", "a2"): 0.0101, ("a1", "a3"): 0.0121, ("a1", "a4"): 0.0123, ("a1", "a5"): 0.0134,
    ("a2", "a3"): 0.0066, ("a2", "a4"): 0.0071, ("a2", "a5"): 0.0088,
    ("a3", "a4"): 0.0047, ("a3", "a5"): 0.0064,
    ("a4", "a5"): 0.0000,
}


def _variables() -> list[dict]:
    out = []
    for s in SLICES:
        prbs = {"name": f"{s}_prbs", "kind": "parameter", "value_type": "numeric", "unit": "PRB"}
        if s == "embb":
            prbs["range"] = [0, 36]
        out += [
            prbs,
            {"name": f"{s}_throughput", "kind": "kpm", "value_type": "numeric", "unit": "Mbps"},
            {"name": f"{s}_buffer", "kind": "kpm", "value_type": "numeric", "unit": "byte"},
        ]
    return out


def _ecdf_doc(dist) -> dict:
    return {"type": "ecdf", "points": [list(p) for p in dist.points], "n": dist.n}


def slicing_catalog(scenario: sandbox.Scenario, transcribed: dict) -> dict:
    curves = transcribed["curves"]
    counts = transcribed.get("sample_counts", {})
    apps, provenance = [], {}
    for app in sorted(scenario.xapps):
        prof = sandbox.run_profile(scenario.xapp(app), scenario.condition, scenario.model,
                                   scenario.n_ticks, scenario.seed, scenario.allocator)
        dists, prov = {}, {}
        for name, dist in sorted(prof.distributions.items()):
            if name in curves.get(app, {}):
                n = counts.get(app, {}).get(name, NOMINAL_N)
                dists[name] = {"type": "ecdf", "points": curves[app][name], "n": n}
                prov[name] = "transcribed"
            else:
                dists[name] = _ecdf_doc(dist)
                prov[name] = "sandbox"
        provenance[app] = prov
        apps.append({
            "id": app,
            "parameters": [f"{s}_prbs" for s in SLICES],
            "priority": scenario.priorities.get(app, 0.0),
            "profiles": {scenario.condition: {"distributions": dists}},
        })
    doc = {
        "variables": _variables(),
        "conditions": [{"id": scenario.condition, "descriptors": scenario.descriptors}],
        "applications": apps,
        "metadata": {
            "provenance": provenance,
            "sandbox": {"n_ticks": scenario.n_ticks, "seed": scenario.seed},
            "note": "transcribed curves carry a nominal sample count",
        },
    }
    return dump_catalog(load_catalog(doc))


def slicing_graph() -> dict:
    prbs = [f"{s}_prbs" for s in SLICES]
    return {
        "params": prbs,
        "kpms": [f"{s}_{k}" for s in SLICES for k in ("throughput", "buffer")],
        # slices share one PRB budget, so each allocation constrains the others
        "param_edges": [[a, b] for a in prbs for b in prbs if a != b],
        "kpm_edges": [[f"{s}_prbs", f"{s}_{k}"] for s in SLICES for k in ("throughput", "buffer")],
    }


def toy_catalog() -> dict:
    def ecdf(points):
        return {"type": "ecdf", "points": points, "n": 100}

    variables = [{"name": p, "kind": "parameter", "value_type": "numeric"} for p in ("p1", "p2", "p3")]
    variables += [{"name": k, "kind": "kpm", "value_type": "numeric"} for k in ("k1", "k2")]
    return {
        "variables": variables,
        "conditions": [{"id": "toy", "descriptors": {"purpose": "layered graph example"}}],
        "applications": [
            {"id": "a1", "parameters": ["p1", "p2"], "priority": 2, "profiles": {"toy": {"distributions": {
                "p1": ecdf([[1, 0.5], [2, 1.0]]),
                "p2": ecdf([[0, 0.25], [3, 1.0]]),
                "k1": ecdf([[10, 0.3], [12, 0.8], [14, 1.0]]),
                "k2": ecdf([[5, 1.0]]),
            }}}},
            {"id": "a2", "parameters": ["p2", "p3"], "priority": 1, "profiles": {"toy": {"distributions": {
                "p2": ecdf([[1, 0.5], [3, 1.0]]),
                "p3": ecdf([[4, 0.6], [6, 1.0]]),
                "k1": ecdf([[11, 0.5], [13, 1.0]]),
                "k2": ecdf([[5, 0.5], [6, 1.0]]),
            }}}},
        ],
    }


def toy_graph() -> dict:
    return {
        "params": ["p1", "p2", "p3"],
        "kpms": ["k1", "k2"],
        "param_edges": [["p1", "p3"]],
        "kpm_edges": [["p1", "k1"], ["p3", "k1"], ["p2", "k2"]],
    }


def severity_doc(table: dict) -> dict:
    apps = sorted({a for pair in table for a in pair})
    return {"apps": apps, "pairs": [[a, b, v] for (a, b), v in sorted(table.items())]}


def main() -> None:
    scenario = sandbox.load_scenario(DATA / "default_scenario.json")
    transcribed = json.loads((DATA / "transcribed_prb_ecdfs.json").read_text())
    outputs = {
        "slicing_catalog.json": slicing_catalog(scenario, transcribed),
        "slicing_graph.json": slicing_graph(),
        "toy_catalog.json": toy_catalog(),
        "toy_graph.json": toy_graph(),
        "embb_severity_table.json": severity_doc(TABLE_EMBB),
        "urllc_severity_table.json": severity_doc(TABLE_URLLC),
    }
    for name, doc in outputs.items():
        (DATA / name).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        print("wrote", DATA / name)


if __name__ == "__main__":
    main()

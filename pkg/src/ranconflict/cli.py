"""Command-line driver: profile, detect, evaluate, mitigate, simulate.

Exit codes: 0 success (and no conflicts for ``detect``), 2 conflicts found by
``detect``, 1 any error including bad usage.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from . import sandbox
from .catalog import ApplicationProfile, Catalog, VariableId, VarKind, dump_catalog, load_catalog
from .errors import RanConflictError
from .evaluation import (
    AggKind,
    Aggregator,
    KpmFocus,
    SeverityMatrix,
    ecdf_curves_csv,
    generate_report,
    severity_matrix,
)
from .graph import build_augmented, detect_all, load_graph
from .mitigation import TolerancePolicy, coexistence_matrix, greedy_deploy, render_coexistence, render_plan
from .statdist import Metric, build_ecdf, ks_distance

log = logging.getLogger("ranconflict")

EXIT_OK, EXIT_ERROR, EXIT_CONFLICTS = 0, 1, 2
SUFFICIENT_SAMPLES = 3000


class UsageError(RanConflictError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _bundled(name: str) -> str:
    return str(resources.files("ranconflict") / "data" / name)


def _csv_list(text: str | None) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


def _kv_floats(text: str | None, what: str) -> dict[str, float]:
    out = {}
    for item in _csv_list(text):
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"{what}: expected name=value, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"{what}: {value!r} is not a number") from None
    return out


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")
        log.info("wrote %s", path)


def _apps(args, catalog: Catalog) -> list[str]:
    apps = _csv_list(args.apps) or catalog.app_ids
    if not apps:
        raise UsageError("the application set is empty")
    for a in apps:
        catalog.application(a)
    return apps


def _condition(args, catalog: Catalog) -> str:
    if args.condition:
        return args.condition
    if len(catalog.conditions) == 1:
        return next(iter(catalog.conditions))
    raise UsageError(f"--condition is required; catalog has {sorted(catalog.conditions)}")


def _aggregator(args) -> Aggregator:
    weights = _kv_floats(args.weights, "--weights") or None
    return Aggregator(AggKind(args.agg), weights)


def _ranges(args) -> dict[str, tuple[float, float]]:
    out = {}
    for item in _csv_list(args.ranges):
        name, sep, span = item.partition("=")
        lo, colon, hi = span.partition(":")
        if not sep or not colon:
            raise UsageError(f"--ranges: expected name=lo:hi, got {item!r}")
        out[name.strip()] = (float(lo), float(hi))
    return out


# -- commands -----------------------------------------------------------------------

def cmd_profile(args) -> int:
    sc = sandbox.load_scenario(args.scenario)
    names = _csv_list(args.apps) or sorted(sc.xapps)
    if not names:
        raise UsageError("the scenario defines no xApps to profile")
    n_ticks = args.ticks or sc.n_ticks
    seed = sc.seed if args.seed is None else args.seed
    if n_ticks < SUFFICIENT_SAMPLES:
        log.warning("only %d samples per variable; at least %d are needed for ECDFs to settle",
                    n_ticks, SUFFICIENT_SAMPLES)
    if args.catalog and Path(args.catalog).exists():
        catalog = load_catalog(args.catalog)
    else:
        catalog = Catalog({}, {}, {})
    variables = []
    for s in sc.allocator.slice_order:
        variables += [
            VariableId(f"{s}_prbs", VarKind.PARAMETER, unit="PRB"),
            VariableId(f"{s}_throughput", VarKind.KPM, unit="Mbps"),
            VariableId(f"{s}_buffer", VarKind.KPM, unit="byte"),
        ]
    catalog = catalog.with_variables(variables)
    print(f"{'app':6} {'variable':18} {'samples':>8} {'KS(3000->full)':>15}")
    for name in names:
        xapp = sc.xapp(name)
        series = sandbox.simulate_xapp(xapp, sc.model, sc.allocator, n_ticks, seed)
        prof = sandbox.series_to_profile(series, sc.condition)
        entry = ApplicationProfile(name, frozenset(f"{s}_prbs" for s in sc.allocator.slice_order),
                                   {sc.condition: prof}, sc.priorities.get(name, 0.0))
        catalog = catalog.with_application(entry)
        for s, ser in series.items():
            suff = "n/a"
            if n_ticks > SUFFICIENT_SAMPLES:
                suff = f"{ks_distance(build_ecdf(ser.prbs[:SUFFICIENT_SAMPLES]), prof[f'{s}_prbs']).value:.4f}"
            print(f"{name:6} {s + '_prbs':18} {n_ticks:>8} {suff:>15}")
    out = args.out or args.catalog
    if not out:
        raise UsageError("--out is required when no --catalog is given")
    descriptors = {k: v for k, v in sc.descriptors.items()}
    doc = dump_catalog(catalog)
    for c in doc["conditions"]:
        if c["id"] == sc.condition and not c["descriptors"]:
            c["descriptors"] = descriptors
    _write(out, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_detect(args) -> int:
    catalog = load_catalog(args.catalog)
    graph = load_graph(args.graph, catalog)
    result = detect_all(build_augmented(catalog, graph, _apps(args, catalog)))
    text = json.dumps(result.to_dict(), sort_keys=True, indent=2) + "\n"
    sys.stdout.write(text)
    _write(args.out, text)
    return EXIT_CONFLICTS if result.has_conflicts else EXIT_OK


def cmd_evaluate(args) -> int:
    catalog = load_catalog(args.catalog)
    graph = load_graph(args.graph, catalog)
    kpms = _csv_list(args.focus_kpms)
    if not kpms:
        raise UsageError("--focus-kpms is empty")
    focus = KpmFocus(frozenset(_csv_list(args.focus_params)), frozenset(kpms))
    condition = _condition(args, catalog)
    apps = _apps(args, catalog)
    report = generate_report(catalog, graph, apps, condition, focus, _aggregator(args),
                             Metric(args.metric), _ranges(args), args.workers)
    text = report.to_json()
    _write(args.out, text)
    if args.curves:
        names = sorted(set(kpms) | set(report.metadata["focus"]["parameters"]))
        _write(args.curves, ecdf_curves_csv(catalog, apps, condition, names))
    m = report.kpm_severity
    print(f"KPM severity ({args.metric}, {args.agg}) over {', '.join(kpms)}")
    print("      " + "".join(f"{a:>8}" for a in m.apps))
    for a, row in zip(m.apps, m.rows()):
        print(f"{a:6}" + "".join(f"{v:8.4f}" for v in row))
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_mitigate(args) -> int:
    if args.severities:
        with open(args.severities, encoding="utf-8") as fh:
            matrix = SeverityMatrix.from_dict(json.load(fh))
        apps = _csv_list(args.apps) or matrix.apps
        catalog = None
    else:
        catalog = load_catalog(args.catalog)
        kpms = _csv_list(args.focus_kpms)
        if not kpms:
            raise UsageError("--focus-kpms is empty")
        apps = _apps(args, catalog)
        matrix = severity_matrix(catalog, apps, _condition(args, catalog), kpms, _aggregator(args),
                                 Metric(args.metric), ranges=_ranges(args), workers=args.workers)
    predeployed = _csv_list(args.predeployed)
    if args.priorities:
        priorities = _kv_floats(args.priorities, "--priorities")
    elif catalog is not None:
        priorities = {a: catalog.priority(a) for a in apps}
    else:
        # no priorities given: earlier in --apps means more important
        priorities = {a: float(len(apps) - i) for i, a in enumerate(apps)}
    detection = None
    if args.graph and catalog is not None:
        graph = load_graph(args.graph, catalog)
        detection = detect_all(build_augmented(catalog, graph, sorted(set(apps) | set(predeployed))))
    policy = TolerancePolicy(args.tol, _kv_floats(args.tol_kpm, "--tol-kpm") or None)
    plan = greedy_deploy(apps, priorities, matrix, policy, predeployed, detection)
    print(render_coexistence(coexistence_matrix(matrix, policy, sorted(set(apps) | set(predeployed))),
                             sorted(set(apps) | set(predeployed))))
    print()
    print(render_plan(plan))
    _write(args.out, plan.to_json())
    return EXIT_OK


def cmd_simulate(args) -> int:
    sc = sandbox.load_scenario(args.scenario)
    phases = [p.split("+") for p in _csv_list(args.phases)] or sc.phases
    if not phases:
        raise UsageError("no phases given and the scenario defines none")
    xapp_phases = [[sc.xapp(n.strip()) for n in phase] for phase in phases]
    n_ticks = args.ticks or min(sc.n_ticks, SUFFICIENT_SAMPLES)
    seed = sc.seed if args.seed is None else args.seed
    out_dir = Path(args.out) if args.out else None
    rows = []
    for phase, xapps in zip(phases, xapp_phases):
        label = "+".join(phase)
        run = sandbox.coexist_sim(xapps, sc.model, n_ticks, seed, sc.allocator)
        m = sandbox.stability_metrics(run.slices[args.slice].prbs)
        rows.append({"phase": label, "cov": m.cov, "stdev": m.stdev, "rmssd": m.rmssd})
        if out_dir:
            _write(str(out_dir / f"series_{label}.csv"), sandbox.series_csv(run.slices))
    print(f"{'phase':12} {'CoV':>8} {'StDev':>8} {'RMSSD':>8}   ({args.slice} PRBs, {n_ticks} ticks)")
    for r in rows:
        print(f"{r['phase']:12} {r['cov']:8.4f} {r['stdev']:8.3f} {r['rmssd']:8.3f}")
    if out_dir:
        _write(str(out_dir / "stability.json"), json.dumps(rows, indent=2) + "\n")
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ranconflict", description="Profile, detect, score and mitigate conflicts among RAN control applications.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, *, graph=True, focus=True):
        sp.add_argument("--catalog", default=_bundled("slicing_catalog.json"), help="profile catalog JSON")
        if graph:
            sp.add_argument("--graph", default=_bundled("slicing_graph.json"), help="dependency graph JSON")
        sp.add_argument("--condition", help="operational condition id")
        sp.add_argument("--apps", help="comma-separated application ids (default: all)")
        if focus:
            sp.add_argument("--focus-kpms", help="comma-separated KPMs to score")
            sp.add_argument("--metric", choices=["ks", "int"], default="int")
            sp.add_argument("--agg", choices=[k.value for k in AggKind], default="mean")
            sp.add_argument("--weights", help="name=weight,... for the weighted mean")
            sp.add_argument("--ranges", help="name=lo:hi,... INT integration ranges")
            sp.add_argument("--workers", type=int, default=None, help="threads for the pairwise matrix")
        sp.add_argument("--out", help="output file")

    sp = sub.add_parser("profile", help="run the sandbox and write a catalog")
    sp.add_argument("--scenario", default=_bundled("default_scenario.json"))
    sp.add_argument("--catalog", help="existing catalog to merge into")
    sp.add_argument("--apps", help="xApps from the scenario (default: all)")
    sp.add_argument("--ticks", type=int, help="samples per xApp (default: scenario)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="output catalog (default: --catalog)")
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("detect", help="list direct, parameter and KPM conflicts")
    common(sp, focus=False)
    sp.set_defaults(func=cmd_detect)

    sp = sub.add_parser("evaluate", help="write the conflict report with severity matrices")
    common(sp)
    sp.add_argument("--focus-params", help="comma-separated parameters to score (default: controlled ones)")
    sp.add_argument("--curves", help="also write ECDF step curves as CSV")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("mitigate", help="plan deployments under a tolerance")
    common(sp, graph=False)
    sp.add_argument("--graph", help="dependency graph JSON; enables conflict-free seeding from detection")
    sp.add_argument("--severities", help="precomputed severity matrix JSON (skips the catalog)")
    sp.add_argument("--tol", type=float, required=True, help="global tolerance in [0, 1]")
    sp.add_argument("--tol-kpm", help="kpm=threshold,... per-KPM tolerances")
    sp.add_argument("--priorities", help="app=priority,... (default: catalog priorities)")
    sp.add_argument("--predeployed", help="comma-separated apps already running")
    sp.set_defaults(func=cmd_mitigate)

    sp = sub.add_parser("simulate", help="coexistence phases and stability metrics")
    sp.add_argument("--scenario", default=_bundled("default_scenario.json"))
    sp.add_argument("--phases", help="phases like a1+a2,a1+a5 (default: scenario phases)")
    sp.add_argument("--slice", default="embb")
    sp.add_argument("--ticks", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="output directory for series CSVs and metrics")
    sp.set_defaults(func=cmd_simulate)

    for name in ("detect", "evaluate", "mitigate"):
        sub.choices[name].add_argument("--seed", type=int, help="accepted for uniformity; these commands are deterministic")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (RanConflictError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Threshold-based greedy admission of applications."""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .errors import MitigationError
from .evaluation import Pair, SeverityMatrix, canonical_pair
from .graph import DetectionResult


@dataclass(frozen=True)
class TolerancePolicy:
    """Global tolerance plus optional per-KPM thresholds.

    When ``per_kpm`` is set it takes precedence: each KPM distance behind a
    severity entry is compared with its own threshold, falling back to
    ``threshold`` for KPMs without one. A per-KPM threshold of 1.0 means the
    KPM is not monitored.
    """

    threshold: float
    per_kpm: Mapping[str, float] | None = None

    def __post_init__(self) -> None:
        values = [self.threshold, *(self.per_kpm or {}).values()]
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise MitigationError(f"tolerance values must lie in [0, 1], got {values}")

    def check(self, pair: Pair, matrix: SeverityMatrix) -> tuple[bool, float, str | None]:
        """Return ``(admissible, offending_value, offending_variable)`` for one pair."""
        sigma = matrix[pair]
        if not self.per_kpm:
            return sigma <= self.threshold, sigma, None
        if pair[0] == pair[1]:
            return True, 0.0, None
        comps = matrix.components.get(canonical_pair(*pair))
        if comps is None:
            raise MitigationError(f"per-KPM thresholds need per-variable distances for {pair}")
        monitored = [(name, dist, self.per_kpm.get(name, self.threshold)) for name, dist in sorted(comps.items())]
        monitored = [m for m in monitored if m[2] < 1.0]
        violations = [(dist - limit, dist, name) for name, dist, limit in monitored if dist > limit]
        if violations:
            _, dist, name = max(violations)
            return False, dist, name
        if not monitored:
            return True, 0.0, None
        dist, name = max((d, n) for n, d, _ in monitored)
        return True, dist, name

    def to_dict(self) -> dict:
        return {"threshold": self.threshold, "per_kpm": dict(sorted(self.per_kpm.items())) if self.per_kpm else None}


def coexistence_matrix(matrix: SeverityMatrix, policy: TolerancePolicy, apps: Iterable[str] | None = None) -> dict[Pair, bool]:
    """Admissibility of every unordered pair, diagonal included."""
    apps = sorted(set(apps)) if apps is not None else matrix.apps
    out = {}
    for i, a in enumerate(apps):
        for b in apps[i:]:
            out[(a, b)] = policy.check((a, b), matrix)[0]
    return out


@dataclass(frozen=True)
class Rejection:
    app: str
    blocking_pair: Pair
    blocking_severity: float
    blocking_variable: str | None = None


@dataclass
class DeploymentPlan:
    deployed: list[str]
    rejected: list[Rejection]
    trace: list[dict] = field(default_factory=list)
    policy: TolerancePolicy | None = None

    def to_dict(self) -> dict:
        return {
            "deployed": self.deployed,
            "rejected": [
                {
                    "app": r.app,
                    "blocking_pair": list(r.blocking_pair),
                    "blocking_severity": r.blocking_severity,
                    "blocking_variable": r.blocking_variable,
                }
                for r in self.rejected
            ],
            "trace": self.trace,
            "policy": self.policy.to_dict() if self.policy else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def priority_order(apps: Iterable[str], priorities: Mapping[str, float] | None) -> list[str]:
    """Highest priority first; equal priorities fall back to the id."""
    priorities = priorities or {}
    return sorted(set(apps), key=lambda a: (-float(priorities.get(a, 0.0)), a))


def greedy_deploy(
    apps: Iterable[str],
    priorities: Mapping[str, float] | None,
    severities: SeverityMatrix,
    policy: TolerancePolicy,
    predeployed: Iterable[str] = (),
    detection: DetectionResult | None = None,
) -> DeploymentPlan:
    """Admit applications greedily by priority.

    Seeding puts predeployed apps and conflict-free candidates in first. With
    ``detection`` given, conflict-free means the app appears in no conflict
    set; without it, an app is conflict-free when its severity against every
    other candidate and predeployed app is zero. Remaining candidates are then
    taken by priority and admitted when the worst severity against everything
    deployed so far is within tolerance. Predeployed apps are never evicted.
    """
    predeployed = sorted(set(predeployed))
    candidates = [a for a in priority_order(apps, priorities) if a not in predeployed]
    everyone = set(candidates) | set(predeployed)
    for a in sorted(everyone):
        for b in sorted(everyone):
            if a < b and (a, b) not in severities:
                raise MitigationError(f"severity matrix lacks pair ({a}, {b})")

    trace: list[dict] = []
    deployed = list(predeployed)
    for a in predeployed:
        trace.append({"app": a, "decision": "admit", "reason": "predeployed", "comparisons": []})

    if detection is not None:
        conflicted = detection.apps_in_conflict()
        free = [a for a in candidates if a not in conflicted]
        reason = "no detected conflict"
    else:
        free = [a for a in candidates if all(severities[(a, b)] == 0.0 for b in everyone if b != a)]
        reason = "zero severity against all"
    for a in free:
        deployed.append(a)
        trace.append({"app": a, "decision": "admit", "reason": reason, "comparisons": []})

    rejected: list[Rejection] = []
    for a in candidates:
        if a in free:
            continue
        comparisons = []
        worst: tuple[float, str, str | None] | None = None
        admissible = True
        for b in deployed:
            ok, value, var = policy.check((a, b), severities)
            comparisons.append({"against": b, "severity": severities[(a, b)], "admissible": ok})
            if not ok:
                admissible = False
                if worst is None or value > worst[0]:
                    worst = (value, b, var)
        if admissible:
            deployed.append(a)
            trace.append({"app": a, "decision": "admit", "reason": "within tolerance", "comparisons": comparisons})
        else:
            value, b, var = worst
            rejected.append(Rejection(a, (b, a), value, var))
            trace.append({"app": a, "decision": "reject", "reason": f"blocked by {b}", "comparisons": comparisons})
    return DeploymentPlan(deployed, rejected, trace, policy)


def render_coexistence(coex: Mapping[Pair, bool], apps: Iterable[str]) -> str:
    """Upper-triangular grid: ``ok`` for admissible pairs, ``XX`` otherwise."""
    apps = sorted(set(apps))
    width = max(4, *(len(a) + 1 for a in apps)) if apps else 4
    lines = [" " * width + "".join(a.rjust(width) for a in apps)]
    for i, a in enumerate(apps):
        cells = []
        for j, b in enumerate(apps):
            cells.append("".rjust(width) if j < i else ("ok" if coex[(a, b)] else "XX").rjust(width))
        lines.append(a.ljust(width) + "".join(cells))
    return "\n".join(lines)


def render_plan(plan: DeploymentPlan) -> str:
    rows = [("app", "decision", "detail")]
    blocked = {r.app: r for r in plan.rejected}
    for step in plan.trace:
        app = step["app"]
        if step["decision"] == "admit":
            rows.append((app, "ADMIT", step["reason"]))
        else:
            r = blocked[app]
            what = f" on {r.blocking_variable}" if r.blocking_variable else ""
            rows.append((app, "REJECT", f"{r.blocking_pair[0]}-{r.blocking_pair[1]} severity {r.blocking_severity:.4f}{what}"))
    w0 = max(len(r[0]) for r in rows)
    w1 = max(len(r[1]) for r in rows)
    return "\n".join(f"{a.ljust(w0)}  {b.ljust(w1)}  {c}" for a, b, c in rows)

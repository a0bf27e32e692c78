"""Desk-scale sandbox: stochastic slicing xApps, a fluid-queue KPM responder,
and a coexistence simulator for oscillation analysis.

Allocation model
----------------
Each slice draws ``x ~ N(mean, sigma)`` PRBs and rounds ``x / rbg_size`` to the
nearest integer (ties to even), clamped at zero. Two budget rules exist:

``rbg_mask`` (default)
    RBGs are granted to slices in ``slice_order`` until the ``n_rbg`` groups
    run out. The last group is short (``n_rbg * rbg_size - budget`` PRBs
    missing), so the slice whose block ends on it receives that many fewer.
``decrement_largest``
    Allocations are multiples of ``rbg_size``; while the total exceeds the
    budget the largest slice (first in order on ties) loses one RBG.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .catalog import StatisticalProfile
from .errors import ScenarioError
from .statdist import build_ecdf

SLICES = ("embb", "mmtc", "urllc")
ALLOCATIONS = ("rbg_mask", "decrement_largest")


@dataclass(frozen=True)
class SlicingPolicy:
    prbs: Mapping[str, int]

    def total(self) -> int:
        return sum(self.prbs.values())


@dataclass(frozen=True)
class StochasticXapp:
    id: str
    means: Mapping[str, float]
    sigma: float = 1.5
    period_ticks: int = 1

    def __post_init__(self) -> None:
        if any(m < 0 for m in self.means.values()):
            raise ScenarioError(f"xApp {self.id!r}: means must be non-negative")
        if self.sigma <= 0:
            raise ScenarioError(f"xApp {self.id!r}: sigma must be positive")
        if self.period_ticks < 1:
            raise ScenarioError(f"xApp {self.id!r}: period must be at least one tick")


@dataclass(frozen=True)
class Allocator:
    budget: int = 50
    rbg_size: int = 3
    n_rbg: int = 17
    mode: str = "rbg_mask"
    slice_order: tuple[str, ...] = SLICES

    def __post_init__(self) -> None:
        if self.mode not in ALLOCATIONS:
            raise ScenarioError(f"unknown allocation mode {self.mode!r}; choose from {ALLOCATIONS}")
        short = self.n_rbg * self.rbg_size - self.budget
        if not 0 <= short < self.rbg_size:
            raise ScenarioError(f"{self.n_rbg} RBGs of {self.rbg_size} PRBs do not cover a {self.budget} PRB budget")

    def rbg_counts(self, xapp: StochasticXapp, rng: np.random.Generator, n: int) -> np.ndarray:
        means = np.array([xapp.means[s] for s in self.slice_order], dtype=np.float64)
        draws = rng.normal(means, xapp.sigma, size=(n, len(means)))
        return np.maximum(np.rint(draws / self.rbg_size), 0).astype(np.int64)

    def allocate(self, k: np.ndarray) -> np.ndarray:
        """Map requested RBG counts (rows of ``k``) to feasible PRB counts."""
        k = np.array(k, dtype=np.int64, copy=True)
        if self.mode == "decrement_largest":
            limit = self.budget // self.rbg_size
            rows = np.nonzero(k.sum(axis=1) > limit)[0]
            while rows.size:
                col = np.argmax(k[rows], axis=1)
                k[rows, col] -= 1
                rows = rows[k[rows].sum(axis=1) > limit]
            return k * self.rbg_size
        granted = np.empty_like(k)
        remaining = np.full(k.shape[0], self.n_rbg, dtype=np.int64)
        for j in range(k.shape[1]):
            granted[:, j] = np.minimum(k[:, j], remaining)
            remaining -= granted[:, j]
        prbs = granted * self.rbg_size
        short = self.n_rbg * self.rbg_size - self.budget
        if short:
            full = remaining == 0
            nonzero = granted > 0
            # index of the last slice that received anything
            last = k.shape[1] - 1 - np.argmax(nonzero[:, ::-1], axis=1)
            rows = np.nonzero(full)[0]
            prbs[rows, last[rows]] -= short
        return prbs

    def draw(self, xapp: StochasticXapp, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` policies as an ``(n, slices)`` PRB array."""
        return self.allocate(self.rbg_counts(xapp, rng, n))

    def policy(self, row: Sequence[int]) -> SlicingPolicy:
        return SlicingPolicy(dict(zip(self.slice_order, (int(v) for v in row))))


def draw_policy(xapp: StochasticXapp, rng: np.random.Generator, allocator: Allocator | None = None) -> SlicingPolicy:
    allocator = allocator or Allocator()
    return allocator.policy(allocator.draw(xapp, rng, 1)[0])


@dataclass(frozen=True)
class Demand:
    kind: str
    rate_kbps: float
    packet_bytes: int = 125

    def arrivals(self, rng: np.random.Generator, n: int, tick_seconds: float) -> np.ndarray:
        bytes_per_tick = self.rate_kbps * 1e3 * tick_seconds / 8.0
        if self.kind == "cbr":
            return np.full(n, int(bytes_per_tick), dtype=np.int64)
        if self.kind == "poisson":
            return rng.poisson(bytes_per_tick / self.packet_bytes, size=n).astype(np.int64) * self.packet_bytes
        raise ScenarioError(f"unknown demand kind {self.kind!r}")


@dataclass(frozen=True)
class KpmModel:
    per_prb_rate_mbps: float = 0.167
    tick_seconds: float = 0.25
    demands: Mapping[str, Demand] = field(
        default_factory=lambda: {
            "embb": Demand("cbr", 4000.0),
            "urllc": Demand("poisson", 89.29),
            "mmtc": Demand("poisson", 44.64),
        }
    )
    buffer_cap_bytes: int | None = None

    def capacity(self, prbs) -> np.ndarray:
        """Bytes a slice can serve in one tick with ``prbs`` PRBs."""
        bits = self.per_prb_rate_mbps * np.asarray(prbs, dtype=np.float64) * self.tick_seconds * 1e6
        return np.floor(bits / 8.0).astype(np.int64)

    def throughput_mbps(self, served) -> np.ndarray:
        return np.asarray(served, dtype=np.float64) * 8.0 / self.tick_seconds / 1e6


@dataclass
class SliceSeries:
    prbs: np.ndarray
    arrivals: np.ndarray
    served: np.ndarray
    buffer: np.ndarray
    dropped: np.ndarray
    throughput: np.ndarray


def step_kpms(model: KpmModel, policy: SlicingPolicy, buffers: Mapping[str, int], arrivals: Mapping[str, int]) -> dict:
    """Advance every slice by one tick. Returns per-slice served, buffer, dropped and throughput."""
    out = {}
    for s, prbs in policy.prbs.items():
        served, buf, drop = kernels.fluid_queue([arrivals.get(s, 0)], model.capacity([prbs]),
                                                buffers.get(s, 0), model.buffer_cap_bytes)
        out[s] = {
            "served": int(served[0]),
            "buffer": int(buf[0]),
            "dropped": int(drop[0]),
            "throughput": float(model.throughput_mbps(served)[0]),
        }
    return out


def respond(model: KpmModel, prbs: np.ndarray, slice_order: Sequence[str], rng: np.random.Generator,
            buffer0: Mapping[str, int] | None = None) -> dict[str, SliceSeries]:
    """Run the fluid queue for each slice over a PRB series of shape ``(n, slices)``."""
    buffer0 = buffer0 or {}
    n = prbs.shape[0]
    out = {}
    for j, s in enumerate(slice_order):
        demand = model.demands.get(s)
        arr = demand.arrivals(rng, n, model.tick_seconds) if demand else np.zeros(n, dtype=np.int64)
        served, buf, drop = kernels.fluid_queue(arr, model.capacity(prbs[:, j]), buffer0.get(s, 0), model.buffer_cap_bytes)
        out[s] = SliceSeries(prbs[:, j].copy(), arr, served, buf, drop, model.throughput_mbps(served))
    return out


def _streams(seed: int | None, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def simulate_xapp(xapp: StochasticXapp, model: KpmModel, allocator: Allocator, n_ticks: int,
                  seed: int | None) -> dict[str, SliceSeries]:
    """One xApp in control for ``n_ticks``. Traffic uses its own stream so runs of
    different xApps with the same seed see identical arrivals."""
    policy_rng, traffic_rng = _streams(seed, 2)
    n_draws = math.ceil(n_ticks / xapp.period_ticks)
    prbs = np.repeat(allocator.draw(xapp, policy_rng, n_draws), xapp.period_ticks, axis=0)[:n_ticks]
    return respond(model, prbs, allocator.slice_order, traffic_rng)


def series_to_profile(series: Mapping[str, SliceSeries], condition: str) -> StatisticalProfile:
    dists = {}
    for s, ser in series.items():
        dists[f"{s}_prbs"] = build_ecdf(ser.prbs)
        dists[f"{s}_throughput"] = build_ecdf(ser.throughput)
        dists[f"{s}_buffer"] = build_ecdf(ser.buffer)
    return StatisticalProfile(condition, dists)


def run_profile(xapp: StochasticXapp, condition: str, model: KpmModel | None = None, n_ticks: int = 3000,
                seed: int | None = 0, allocator: Allocator | None = None) -> StatisticalProfile:
    if n_ticks < 1:
        raise ScenarioError("n_ticks must be at least 1")
    series = simulate_xapp(xapp, model or KpmModel(), allocator or Allocator(), n_ticks, seed)
    return series_to_profile(series, condition)


@dataclass
class CoexistenceRun:
    writers: np.ndarray
    slices: dict[str, SliceSeries]


def coexist_sim(xapps: Sequence[StochasticXapp], model: KpmModel | None = None, n_ticks: int = 3000,
                seed: int | None = 0, allocator: Allocator | None = None) -> CoexistenceRun:
    """Active xApps take turns: at tick ``t`` the policy of ``xapps[t % len(xapps)]``
    is the one in force, overwriting whatever was applied before."""
    if not xapps:
        raise ScenarioError("coexistence needs at least one xApp")
    model = model or KpmModel()
    allocator = allocator or Allocator()
    streams = _streams(seed, len(xapps) + 1)
    traffic_rng = streams[-1]
    writers = np.arange(n_ticks) % len(xapps)
    prbs = np.zeros((n_ticks, len(allocator.slice_order)), dtype=np.int64)
    for i, xapp in enumerate(xapps):
        rows = np.nonzero(writers == i)[0]
        if rows.size:
            prbs[rows] = allocator.draw(xapp, streams[i], rows.size)
    return CoexistenceRun(writers, respond(model, prbs, allocator.slice_order, traffic_rng))


@dataclass(frozen=True)
class StabilityMetrics:
    cov: float
    stdev: float
    rmssd: float


def stability_metrics(series) -> StabilityMetrics:
    x = np.asarray(series, dtype=np.float64)
    if x.size < 2:
        raise ValueError("stability metrics need at least two samples")
    mean = float(x.mean())
    if mean == 0.0:
        raise ValueError("coefficient of variation is undefined for a zero-mean series")
    stdev = float(x.std())
    rmssd = float(np.sqrt(np.mean(np.diff(x) ** 2)))
    return StabilityMetrics(cov=stdev / abs(mean), stdev=stdev, rmssd=rmssd)


def series_csv(slices: Mapping[str, SliceSeries]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tick", "slice", "prbs", "throughput_mbps", "buffer_bytes"])
    n = len(next(iter(slices.values())).prbs) if slices else 0
    for t in range(n):
        for s, ser in slices.items():
            w.writerow([t, s, int(ser.prbs[t]), repr(float(ser.throughput[t])), int(ser.buffer[t])])
    return buf.getvalue()


# -- scenario documents ------------------------------------------------------------

@dataclass
class Scenario:
    xapps: dict[str, StochasticXapp]
    model: KpmModel
    allocator: Allocator
    condition: str = "default"
    descriptors: dict[str, str] = field(default_factory=dict)
    n_ticks: int = 3000
    seed: int = 0
    phases: list[list[str]] = field(default_factory=list)
    priorities: dict[str, float] = field(default_factory=dict)

    def xapp(self, name: str) -> StochasticXapp:
        try:
            return self.xapps[name]
        except KeyError:
            raise ScenarioError(f"unknown xApp {name!r} (known: {sorted(self.xapps)})") from None


def load_scenario(source) -> Scenario:
    if isinstance(source, Mapping):
        doc = dict(source)
    elif isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = json.load(source)
    try:
        alloc = doc.get("allocation", {})
        allocator = Allocator(
            budget=int(alloc.get("budget_prbs", 50)),
            rbg_size=int(alloc.get("rbg_size", 3)),
            n_rbg=int(alloc.get("n_rbg", 17)),
            mode=alloc.get("mode", "rbg_mask"),
            slice_order=tuple(alloc.get("slice_order", SLICES)),
        )
        km = doc.get("kpm_model", {})
        demands = {
            s: Demand(d["kind"], float(d["rate_kbps"]), int(d.get("packet_bytes", 125)))
            for s, d in km.get("demands", {}).items()
        } or KpmModel().demands
        cap = km.get("buffer_cap_bytes")
        model = KpmModel(
            per_prb_rate_mbps=float(km.get("per_prb_rate_mbps", 0.167)),
            tick_seconds=float(km.get("tick_seconds", 0.25)),
            demands=demands,
            buffer_cap_bytes=None if cap is None else int(cap),
        )
        xapps = {}
        for name, x in doc.get("xapps", {}).items():
            missing = [s for s in allocator.slice_order if s not in x["means"]]
            if missing:
                raise ScenarioError(f"xApp {name!r} has no mean for slices {missing}")
            xapps[name] = StochasticXapp(name, {s: float(v) for s, v in x["means"].items()},
                                         float(x.get("sigma", 1.5)), int(x.get("period_ticks", 1)))
        cond = doc.get("condition", {"id": "default"})
        sc = Scenario(
            xapps=xapps,
            model=model,
            allocator=allocator,
            condition=cond["id"],
            descriptors={k: str(v) for k, v in cond.get("descriptors", {}).items()},
            n_ticks=int(doc.get("n_ticks", 3000)),
            seed=int(doc.get("seed", 0)),
            phases=[list(p) for p in doc.get("phases", [])],
            priorities={k: float(v) for k, v in doc.get("priorities", {}).items()},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid scenario document: {exc!r}") from None
    for phase in sc.phases:
        for name in phase:
            sc.xapp(name)
    return sc

"""Empirical distributions and the distances used to compare them.

All distances take values in [0, 1]:

* ``ks``  -- largest vertical gap between two ECDFs.
* ``int`` -- square root of the range-normalised area between two ECDFs.
* ``chi`` -- ``1 - p`` of Pearson's chi-square homogeneity test on category counts.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels


class Metric(str, Enum):
    KS = "ks"
    INT = "int"
    CHI = "chi"


@dataclass(frozen=True)
class DistanceValue:
    metric: Metric
    value: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"{self.metric.value} distance {self.value!r} outside [0, 1]")

    def __float__(self) -> float:
        return self.value


class Ecdf:
    """Right-continuous empirical CDF stored as its step points.

    ``F(x)`` is the value at the greatest step abscissa ``<= x`` and 0 left of
    the first one.
    """

    __slots__ = ("x", "F", "n")

    def __init__(self, points: Iterable[Sequence[float]], n: int):
        pts = [(float(a), float(b)) for a, b in points]
        if not pts:
            raise ValueError("an ECDF needs at least one step point")
        x = np.array([p[0] for p in pts], dtype=np.float64)
        F = np.array([p[1] for p in pts], dtype=np.float64)
        if not np.all(np.isfinite(x)):
            raise ValueError("ECDF abscissae must be finite")
        if np.any(np.diff(x) <= 0):
            raise ValueError("ECDF abscissae must be strictly increasing")
        if np.any(np.diff(F) < 0):
            raise ValueError("ECDF values must be non-decreasing")
        if F[0] < 0.0 or F[-1] != 1.0:
            raise ValueError("ECDF values must lie in [0, 1] and end at exactly 1.0")
        if int(n) <= 0:
            raise ValueError("sample count must be positive")
        x.setflags(write=False)
        F.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "n", int(n))

    def __setattr__(self, name, value):
        raise AttributeError("Ecdf is immutable")

    @property
    def points(self) -> list[tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.x, self.F)]

    @property
    def support(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    def __call__(self, q):
        idx = np.searchsorted(self.x, q, side="right") - 1
        out = np.where(idx >= 0, self.F[np.clip(idx, 0, None)], 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Ecdf):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.x, other.x) and np.array_equal(self.F, other.F)

    def __hash__(self) -> int:
        return hash((self.n, self.x.tobytes(), self.F.tobytes()))

    def __repr__(self) -> str:
        return f"Ecdf(n={self.n}, points={self.points!r})"


@dataclass(frozen=True)
class CategoricalDist:
    counts: Mapping[str, int]

    def __post_init__(self) -> None:
        clean = {}
        for label, c in self.counts.items():
            if int(c) != c or c < 0:
                raise ValueError(f"category {label!r} has invalid count {c!r}")
            clean[str(label)] = int(c)
        if not any(clean.values()):
            raise ValueError("categorical distribution needs at least one positive count")
        object.__setattr__(self, "counts", dict(sorted(clean.items())))

    @property
    def n(self) -> int:
        return sum(self.counts.values())

    def __hash__(self) -> int:
        return hash(tuple(self.counts.items()))


def build_ecdf(samples) -> Ecdf:
    arr = np.asarray(samples, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("cannot build an ECDF from an empty sample list")
    values, counts = np.unique(arr, return_counts=True)
    F = np.cumsum(counts) / arr.size
    F[-1] = 1.0
    return Ecdf(zip(values, F), n=arr.size)


def _gap(F1: Ecdf, F2: Ecdf, lo: float, hi: float) -> tuple[float, float]:
    return kernels.ecdf_gap(F1.x, F1.F, F2.x, F2.F, lo, hi)


def ks_distance(F1: Ecdf, F2: Ecdf) -> DistanceValue:
    lo = min(F1.x[0], F2.x[0])
    ks, _ = _gap(F1, F2, lo, lo)
    return DistanceValue(Metric.KS, min(1.0, ks))


def int_distance(F1: Ecdf, F2: Ecdf, range: tuple[float, float] | None = None) -> DistanceValue:
    """INT distance over ``range``; defaults to the pooled support.

    The integral is exact for step functions. When both ECDFs are the same
    single point the range has zero length and the distance is 0.
    """
    smin = min(F1.x[0], F2.x[0])
    smax = max(F1.x[-1], F2.x[-1])
    if range is None:
        lo, hi = float(smin), float(smax)
    else:
        lo, hi = float(range[0]), float(range[1])
        if not lo < hi:
            raise ValueError(f"invalid range ({lo}, {hi}): lo must be below hi")
        if lo > smin or hi < smax:
            raise ValueError(f"range ({lo}, {hi}) does not cover the supports [{smin}, {smax}]")
    length = hi - lo
    if length == 0.0:
        return DistanceValue(Metric.INT, 0.0)
    _, area = _gap(F1, F2, lo, hi)
    return DistanceValue(Metric.INT, min(1.0, math.sqrt(max(area, 0.0) / length)))


# -- chi-square ----------------------------------------------------------------

_EPS = 1e-16
_TINY = 1e-300


def _gamma_series(a: float, x: float) -> float:
    """Lower regularized gamma P(a, x) by its power series (x < a + 1)."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10_000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a: float, x: float) -> float:
    """Upper regularized gamma Q(a, x) by Lentz's continued fraction (x >= a + 1)."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammaincc(a: float, x: float) -> float:
    """Regularized upper incomplete gamma function Q(a, x).

    Uses the series for ``x < a + 1`` and the continued fraction above it.
    """
    if a <= 0:
        raise ValueError("shape parameter must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cf(a, x)


def chi2_sf(stat: float, dof: int) -> float:
    return gammaincc(dof / 2.0, stat / 2.0)


def pearson_homogeneity(c1: Mapping[str, int], c2: Mapping[str, int]) -> tuple[float, int, float]:
    """Pearson chi-square test on the 2 x k table of two count maps.

    Labels whose column total is zero carry no information and are dropped.
    Returns ``(statistic, dof, p_value)``; with fewer than two surviving
    labels the test is degenerate and ``(0.0, 0, 1.0)`` is returned.
    """
    labels = sorted(set(c1) | set(c2))
    rows = np.array([[c1.get(k, 0) for k in labels], [c2.get(k, 0) for k in labels]], dtype=np.float64)
    rows = rows[:, rows.sum(axis=0) > 0]
    if rows.shape[1] < 2:
        return 0.0, 0, 1.0
    row_tot = rows.sum(axis=1, keepdims=True)
    col_tot = rows.sum(axis=0, keepdims=True)
    expected = row_tot * col_tot / rows.sum()
    stat = float(((rows - expected) ** 2 / expected).sum())
    dof = rows.shape[1] - 1
    return stat, dof, chi2_sf(stat, dof)


def chi_distance(C1: CategoricalDist, C2: CategoricalDist) -> DistanceValue:
    _, _, p = pearson_homogeneity(C1.counts, C2.counts)
    return DistanceValue(Metric.CHI, min(1.0, max(0.0, 1.0 - p)))


# -- sample sufficiency --------------------------------------------------------

def sufficiency_curve(samples, sizes: Iterable[int], seed: int | None = 0) -> list[tuple[int, float]]:
    """KS distance between ECDFs of random subsamples and of the full sample.

    The subsample of size ``N`` is the first ``N`` entries of one seeded
    permutation, so larger sizes extend smaller ones.
    """
    arr = np.asarray(samples, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("samples must be non-empty")
    full = build_ecdf(arr)
    shuffled = arr[np.random.default_rng(seed).permutation(arr.size)]
    out = []
    for size in sizes:
        size = int(size)
        if size < 1 or size > arr.size:
            raise ValueError(f"subsample size {size} outside [1, {arr.size}]")
        out.append((size, ks_distance(build_ecdf(shuffled[:size]), full).value))
    return out

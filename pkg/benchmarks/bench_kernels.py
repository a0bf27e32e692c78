"""Compare the compiled and pure-Python kernels on representative sizes.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from ranconflict import _pykernels

try:
    from ranconflict import _ckernels
except ImportError:
    _ckernels = None


def ecdf_inputs(n: int, rng: np.random.Generator):
    def one():
        x = np.sort(rng.choice(np.arange(10 * n, dtype=np.float64), size=n, replace=False))
        f = np.linspace(1.0 / n, 1.0, n)
        return x, f

    (x1, f1), (x2, f2) = one(), one()
    return x1, f1, x2, f2, 0.0, 10.0 * n


def queue_inputs(n: int, rng: np.random.Generator):
    arrivals = rng.integers(0, 150_000, size=n).astype(np.int64)
    capacity = rng.integers(0, 160_000, size=n).astype(np.int64)
    return arrivals, capacity, 0, 1_250_000


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    cases = [
        ("ecdf_gap", n, ecdf_inputs(n, rng)) for n in (100, 10_000, 60_000)
    ] + [
        ("fluid_queue", n, queue_inputs(n, rng)) for n in (3_000, 61_851)
    ]
    print(f"{'kernel':12} {'size':>7} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for name, n, inputs in cases:
        py = min(timeit.repeat(lambda: getattr(_pykernels, name)(*inputs), number=1, repeat=args.repeat))
        if _ckernels is None:
            print(f"{name:12} {n:>7} {py * 1e3:10.2f} {'n/a':>10} {'n/a':>8}")
            continue
        cy = min(timeit.repeat(lambda: getattr(_ckernels, name)(*inputs), number=1, repeat=args.repeat))
        print(f"{name:12} {n:>7} {py * 1e3:10.2f} {cy * 1e3:10.3f} {py / cy:7.0f}x")


if __name__ == "__main__":
    main()

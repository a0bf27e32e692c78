"""Pure-Python implementations of the hot loops.

Semantics are identical to the compiled ``_ckernels`` module; this module is
used when the extension is not built or when ``RANCONFLICT_PURE_PYTHON`` is set.
"""

from __future__ import annotations

import numpy as np


def ecdf_gap(x1, f1, x2, f2, lo, hi):
    """Return ``(sup |F1 - F2|, integral of |F1 - F2| over [lo, hi])``.

    Both ECDFs are right-continuous step functions given by strictly
    increasing abscissae and their values. The walk visits the pooled
    abscissae once, so both results are exact.
    """
    n1 = len(x1)
    n2 = len(x2)
    i = j = 0
    v1 = v2 = 0.0
    ks = 0.0
    area = 0.0
    prev = lo
    while i < n1 or j < n2:
        if j >= n2 or (i < n1 and x1[i] < x2[j]):
            x = x1[i]
        else:
            x = x2[j]
        if x > prev:
            left = prev if prev > lo else lo
            right = x if x < hi else hi
            if right > left:
                area += abs(v1 - v2) * (right - left)
            prev = x
        while i < n1 and x1[i] == x:
            v1 = f1[i]
            i += 1
        while j < n2 and x2[j] == x:
            v2 = f2[j]
            j += 1
        d = abs(v1 - v2)
        if d > ks:
            ks = d
    if hi > prev:
        left = prev if prev > lo else lo
        area += abs(v1 - v2) * (hi - left)
    return float(ks), float(area)


def fluid_queue(arrivals, capacity, buffer0, buffer_cap):
    """Run a single-server fluid queue over integer byte counts.

    Each tick serves ``min(backlog + arrivals, capacity)`` bytes. A negative
    ``buffer_cap`` means an unbounded buffer; otherwise overflow is dropped.
    Returns ``(served, buffer, dropped)`` arrays, one entry per tick.
    """
    n = len(arrivals)
    served = np.zeros(n, dtype=np.int64)
    buffer = np.zeros(n, dtype=np.int64)
    dropped = np.zeros(n, dtype=np.int64)
    b = int(buffer0)
    cap = int(buffer_cap)
    arr = [int(v) for v in arrivals]
    cpt = [int(v) for v in capacity]
    for t in range(n):
        avail = b + arr[t]
        s = cpt[t] if cpt[t] < avail else avail
        b = avail - s
        d = 0
        if cap >= 0 and b > cap:
            d = b - cap
            b = cap
        served[t] = s
        buffer[t] = b
        dropped[t] = d
    return served, buffer, dropped

"""Backend selection for the numeric inner loops.

The compiled extension is preferred; the pure-Python module is used when the
extension is missing or ``RANCONFLICT_PURE_PYTHON`` is set to a truthy value.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

_FORCE_PURE = os.environ.get("RANCONFLICT_PURE_PYTHON", "").lower() not in ("", "0", "false", "no")

try:
    if _FORCE_PURE:
        raise ImportError("pure-Python backend forced by environment")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"


def ecdf_gap(x1, f1, x2, f2, lo: float, hi: float) -> tuple[float, float]:
    return _impl.ecdf_gap(
        np.ascontiguousarray(x1, dtype=np.float64),
        np.ascontiguousarray(f1, dtype=np.float64),
        np.ascontiguousarray(x2, dtype=np.float64),
        np.ascontiguousarray(f2, dtype=np.float64),
        float(lo),
        float(hi),
    )


def fluid_queue(arrivals, capacity, buffer0: int = 0, buffer_cap: int | None = None):
    cap = -1 if buffer_cap is None else int(buffer_cap)
    return _impl.fluid_queue(
        np.ascontiguousarray(arrivals, dtype=np.int64),
        np.ascontiguousarray(capacity, dtype=np.int64),
        int(buffer0),
        cap,
    )

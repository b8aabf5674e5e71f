"""Log-log least squares shared by the diagnostics and the sweep harness."""

from __future__ import annotations

import numpy as np


def ols_loglog(x, y) -> tuple[float, float, float]:
    """OLS fit of log(y) against log(x).

    Returns (slope, intercept, residual) where residual is the RMS misfit of
    log(y).  Inputs must be strictly positive.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("need two 1-d arrays with at least 2 points")
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise ValueError("log-log fit requires strictly positive inputs")
    lx = np.log(x)
    ly = np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = float(np.sqrt(np.mean((ly - (slope * lx + intercept)) ** 2)))
    return float(slope), float(intercept), resid

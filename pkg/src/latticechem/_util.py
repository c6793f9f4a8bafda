"""Small shared numerics: ordinary least-squares line fits."""

from __future__ import annotations

import numpy as np


def line_fit(x, y):
    """OLS fit y = a + b*x; returns (slope, intercept, slope_stderr).

    slope_stderr is the textbook standard error sqrt(s^2 / Sxx) with
    s^2 = SSR/(m-2); it is inf for m <= 2.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    m = len(x)
    if m < 2:
        raise ValueError("need at least two points")
    xm = x.mean()
    ym = y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0:
        raise ValueError("degenerate abscissa (all x equal)")
    slope = np.sum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    if m == 2:
        return slope, intercept, float("inf")
    resid = y - (intercept + slope * x)
    s2 = np.sum(resid**2) / (m - 2)
    return slope, intercept, float(np.sqrt(s2 / sxx))

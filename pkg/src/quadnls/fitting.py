"""Least-squares power-law fits."""

import numpy as np


def loglog_slope(x, y) -> float:
    """Slope of the least-squares line through ``(log x, log y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need at least two matching points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def richardson_ratio(coarse: float, fine: float) -> float:
    """Error ratio under step halving: 2**order for a method of that order."""
    return float(coarse / fine) if fine != 0 else float("inf")

"""Least-squares lines in log-log coordinates."""

import math
from collections.abc import Sequence

import numpy as np

from .errors import FitError


def log_log_fit(
    xs: Sequence[float], ys: Sequence[float], min_points: int = 3
) -> tuple[float, float, float]:
    """
    Fit log y = slope * log x + intercept.

    Args:
        xs: Abscissae, all positive
        ys: Ordinates, all positive
        min_points: Smallest admissible number of points

    Returns:
        (slope, intercept, r_squared); r_squared is 1 for an exact line

    Raises:
        FitError: Too few points, length mismatch or non-positive values
    """
    if len(xs) != len(ys):
        raise FitError(f"Length mismatch: {len(xs)} abscissae, {len(ys)} ordinates")
    if len(xs) < min_points:
        raise FitError(f"Need at least {min_points} points, got {len(xs)}")
    if any(not (x > 0 and math.isfinite(x)) for x in xs) or any(
        not (y > 0 and math.isfinite(y)) for y in ys
    ):
        raise FitError("Log-log fit needs finite positive values")

    log_x = np.log(np.asarray(xs, dtype=np.float64))
    log_y = np.log(np.asarray(ys, dtype=np.float64))
    slope, intercept = np.polyfit(log_x, log_y, 1)

    residual = log_y - (slope * log_x + intercept)
    spread = float(np.sum((log_y - log_y.mean()) ** 2))
    r_squared = 1.0 - float(np.sum(residual**2)) / spread if spread > 0 else 1.0
    return float(slope), float(intercept), r_squared

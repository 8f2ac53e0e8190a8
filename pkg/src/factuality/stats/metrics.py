"""Scalar evaluation metrics: mean absolute error and Pearson's r."""

from __future__ import annotations

import numpy as np

from ..validation import as_float_vector, check_equal_length


def mae(pred, gold) -> float:
    """Mean absolute error between two equal-length score vectors."""
    p = as_float_vector(pred, "pred")
    g = as_float_vector(gold, "gold")
    n = check_equal_length(p, g, names=("pred", "gold"))
    if n == 0:
        raise ValueError("mae is undefined on empty vectors")
    return float(np.mean(np.abs(p - g)))


def pearson(x, y) -> float | None:
    """Sample Pearson correlation, or None when either vector is constant.

    The None outcome is deliberate: a constant vector makes r undefined, and
    callers (evaluation tables) report that instead of failing.
    """
    xv = as_float_vector(x, "x")
    yv = as_float_vector(y, "y")
    n = check_equal_length(xv, yv, names=("x", "y"))
    if n < 2:
        raise ValueError("pearson needs at least two points")
    xc = xv - xv.mean()
    yc = yv - yv.mean()
    sx = float(np.sqrt(np.sum(xc * xc)))
    sy = float(np.sqrt(np.sum(yc * yc)))
    if sx == 0.0 or sy == 0.0:
        return None
    r = float(np.sum(xc * yc) / (sx * sy))
    # guard float excursions like 1 + 1e-16
    return max(-1.0, min(1.0, r))

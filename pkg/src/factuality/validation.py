"""Input validation helpers shared by the estimators and metrics."""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np


def as_float_vector(values: Any, name: str = "x") -> np.ndarray:
    """Coerce to a finite 1-d float array; (n, 1) column vectors are accepted."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_equal_length(*arrays: Sequence, names: Sequence[str] = ()) -> int:
    lengths = [len(a) for a in arrays]
    if len(set(lengths)) > 1:
        labels = names if names else [f"arg{i}" for i in range(len(arrays))]
        detail = ", ".join(f"{n}={v}" for n, v in zip(labels, lengths))
        raise ValueError(f"length mismatch: {detail}")
    return lengths[0]


def check_fitted(estimator: Any, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise RuntimeError(
            f"{type(estimator).__name__} is not fitted yet; call fit() before using it"
        )

"""Metrics and statistical model fitting."""

from .metrics import mae, pearson
from .mixed import MixedLinearModel
from .ordinal import OrderedLogit

__all__ = ["mae", "pearson", "MixedLinearModel", "OrderedLogit"]

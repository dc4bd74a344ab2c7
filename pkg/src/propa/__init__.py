"""Finite computations for coarse amenability witnesses on graph families."""

from .errors import Rejection, SizeBoundExceeded

__all__ = ["Rejection", "SizeBoundExceeded"]
__version__ = "0.1.0"

"""Numerical tools for open su(2) and su(3) spin chains with non-diagonal boundary fields."""

from .params import BoundaryParamsSU2, BoundaryParamsSU3

__all__ = ["BoundaryParamsSU2", "BoundaryParamsSU3"]
__version__ = "0.1.0"

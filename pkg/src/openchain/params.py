"""Boundary parameter containers for the two models."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BoundaryParamsSU2:
    """Boundary fields of the open XXX chain: 1/p on site 1, (1/q)(z + xi x) on site N."""

    p: float
    q: float
    xi: float = 0.0

    def __post_init__(self):
        if self.p == 0 or self.q == 0:
            raise ValueError("p and q must be nonzero")

    @property
    def s(self) -> float:
        """sqrt(1 + xi^2), the length of the right boundary field in units of 1/q."""
        return math.sqrt(1.0 + self.xi * self.xi)

    @property
    def pbar(self) -> float:
        return self.p - 0.5

    @property
    def qbar(self) -> float:
        return self.q / self.s - 0.5

    @property
    def real_root_regime(self) -> bool:
        return self.pbar >= 0 and self.qbar >= 0


@dataclass(frozen=True)
class BoundaryParamsSU3:
    h: float
    hbar: float

    def __post_init__(self):
        if self.h == 0 or self.hbar == 0:
            raise ValueError("h and hbar must be nonzero")
        if self.hbar == -2:
            raise ValueError("hbar = -2 makes the boundary coupling singular")

    @property
    def f(self) -> float:
        return -0.5 + 1.0 / self.h

    @property
    def fbar(self) -> float:
        return -1.0 - 1.0 / self.hbar

    @property
    def boundary_constant(self) -> float:
        """(h hbar + 2h - 2 hbar)/(2 + hbar), the constant in the energy."""
        h, hb = self.h, self.hbar
        return (h * hb + 2 * h - 2 * hb) / (2 + hb)

    @property
    def real_root_regime(self) -> bool:
        return 0 < self.h < 2 and -1 < self.hbar < 0

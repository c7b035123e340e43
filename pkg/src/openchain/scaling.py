"""Finite-size analysis: E_inh scans, power-law fits and BST extrapolation."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import bethe, ed, thermo
from .params import BoundaryParamsSU2, BoundaryParamsSU3

log = logging.getLogger(__name__)

ED_LIMIT = {"su2": 16, "su3": 10}


def model_tag(params) -> str:
    if isinstance(params, BoundaryParamsSU2):
        return "su2"
    if isinstance(params, BoundaryParamsSU3):
        return "su3"
    raise TypeError(f"unknown parameter type {type(params).__name__}")


@dataclass
class ScanRecord:
    model: str
    params: BoundaryParamsSU2 | BoundaryParamsSU3
    N: int
    E_true: float | None = None
    E_hom: float | None = None
    error: str | None = None

    @property
    def E_inh(self) -> float | None:
        if self.E_true is None or self.E_hom is None:
            return None
        return self.E_hom - self.E_true

    def param_values(self) -> tuple[float, float, float | None]:
        if isinstance(self.params, BoundaryParamsSU2):
            return self.params.p, self.params.q, self.params.xi
        return self.params.h, self.params.hbar, None


@dataclass
class PowerLawFit:
    gamma: float
    beta: float
    r_squared: float
    n_points: int
    n_min: int
    n_max: int

    def __call__(self, N):
        return self.gamma * np.asarray(N, dtype=float) ** self.beta


@dataclass
class ExtrapolationResult:
    limit: float
    error: float
    omega: float
    depth: int
    table: list[list[float]] = field(default_factory=list, repr=False)


def homogeneous_energy(params, N: int, initial=None):
    """Ground-state energy from the homogeneous Bethe equations, plus the solved state."""
    if isinstance(params, BoundaryParamsSU2):
        st = bethe.solve_log_baes_su2(N, params, initial=initial)
        return bethe.energy_su2(st, params), st
    st = bethe.solve_log_baes_su3(N, params, initial=initial)
    return bethe.energy_su3(st, params), st


def exact_energy(params, N: int, tol: float = 1e-10) -> float:
    if isinstance(params, BoundaryParamsSU2):
        H = ed.build_h_su2(N, params)
    else:
        H = ed.build_h_su3(N, params)
    return ed.ground_energy(H, tol=tol)


def einh_scan(params, Ns: Sequence[int], tol: float = 1e-10, ed_limit: int | None = None) -> list[ScanRecord]:
    """E_true (Lanczos), E_hom (Bethe) and E_inh for each chain length.

    Solver failures are stored on the record instead of aborting the scan.
    """
    tag = model_tag(params)
    limit = ED_LIMIT[tag] if ed_limit is None else ed_limit
    records = []
    for N in Ns:
        if N % 2:
            raise ValueError(f"N={N}: scans use even chain lengths only")
        if N > limit:
            raise ValueError(f"N={N} exceeds the exact-diagonalization limit N<={limit} for {tag}")
        rec = ScanRecord(model=tag, params=params, N=N)
        try:
            rec.E_hom, _ = homogeneous_energy(params, N)
        except (bethe.BetheConvergenceError, ValueError) as exc:
            rec.error = f"bethe: {exc}"
        try:
            rec.E_true = exact_energy(params, N, tol=tol)
        except ed.LanczosError as exc:
            rec.error = f"ed: {exc}"
        records.append(rec)
    return records


def power_law_fit(records=None, *, N=None, E_inh=None, drop_smallest: bool = True) -> PowerLawFit:
    """Least squares of log E_inh against log N; gamma = exp(intercept), beta = slope.

    Accepts either scan records or explicit ``N``/``E_inh`` arrays.  With six or
    more usable points the two smallest N are dropped (``drop_smallest``).
    """
    if records is not None:
        pairs = [(r.N, r.E_inh) for r in records if r.E_inh is not None]
    else:
        pairs = list(zip(np.asarray(N, dtype=float), np.asarray(E_inh, dtype=float)))
    bad = [(n, e) for n, e in pairs if not e > 0]
    if bad:
        warnings.warn(f"excluding {len(bad)} non-positive E_inh values at N={[int(n) for n, _ in bad]}",
                      stacklevel=2)
    pairs = sorted((n, e) for n, e in pairs if e > 0)
    if drop_smallest and len(pairs) >= 6:
        pairs = pairs[2:]
    if len(pairs) < 3:
        raise ValueError("power-law fit needs at least 3 positive E_inh values")
    x = np.log([n for n, _ in pairs])
    y = np.log([e for _, e in pairs])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(gamma=math.exp(intercept), beta=float(slope), r_squared=float(r2),
                       n_points=len(pairs), n_min=int(pairs[0][0]), n_max=int(pairs[-1][0]))


def bst_extrapolate(Ns: Sequence[float], values: Sequence[float], omega: float = 1.0,
                    eps: float = 1e-300) -> ExtrapolationResult:
    """Bulirsch-Stoer extrapolation of ``values(N)`` to N -> infinity.

    Tableau with T_{-1} = 0, T_0^{(n)} = values[n] and

        T_m^{(n)} = T_{m-1}^{(n+1)} + (T_{m-1}^{(n+1)} - T_{m-1}^{(n)}) /
                    ( (N_{n+m}/N_n)^omega [1 - (T_{m-1}^{(n+1)} - T_{m-1}^{(n)}) /
                                            (T_{m-1}^{(n+1)} - T_{m-2}^{(n+1)})] - 1 ).

    Columns stop growing when a denominator vanishes (``eps``).  The error
    estimate is the spread of the deepest column holding two or more entries.
    """
    Ns = np.asarray(Ns, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(Ns) != len(v):
        raise ValueError("Ns and values differ in length")
    if len(Ns) < 4:
        raise ValueError("BST extrapolation needs at least 4 points")
    if np.any(np.diff(Ns) <= 0):
        raise ValueError("N must be strictly increasing")

    prev = [0.0] * (len(v) + 1)  # T_{-1}
    cur = list(v)  # T_0
    table = [cur]
    for m in range(1, len(v)):
        nxt = []
        for n in range(len(v) - m):
            d = cur[n + 1] - cur[n]
            if d == 0.0:
                nxt.append(cur[n + 1])
                continue
            d2 = cur[n + 1] - prev[n + 1]
            if abs(d2) < eps:
                break
            den = (Ns[n + m] / Ns[n]) ** omega * (1.0 - d / d2) - 1.0
            if abs(den) < eps:
                break
            nxt.append(cur[n + 1] + d / den)
        if len(nxt) < len(v) - m:
            log.debug("BST tableau truncated at column %d", m)
            if not nxt:
                break
        prev, cur = cur, nxt
        table.append(cur)
        if len(nxt) < len(v) - m:
            break
    limit = table[-1][-1]
    spread_col = next((col for col in reversed(table) if len(col) >= 2), table[0])
    error = float(max(spread_col) - min(spread_col))
    return ExtrapolationResult(limit=float(limit), error=error, omega=omega,
                               depth=len(table) - 1, table=table)


def bulk_energy_per_site(params) -> float:
    """Extensive ground-state energy per site of the chain."""
    if isinstance(params, BoundaryParamsSU2):
        return 2.0 * thermo.ground_energy_density("su2")
    return thermo.ground_energy_density("su3")


def boundary_energy_numeric(params, Ns: Sequence[int], method: str = "bethe",
                            omega: float = 1.0) -> ExtrapolationResult:
    """BST limit of E_0(N) - N e_bulk, with E_0 from Bethe roots or from ED."""
    e_bulk = bulk_energy_per_site(params)
    if method not in ("bethe", "ed"):
        raise ValueError(f"unknown method {method!r}")
    vals = []
    for N in Ns:
        E = homogeneous_energy(params, N)[0] if method == "bethe" else exact_energy(params, N)
        vals.append(E - N * e_bulk)
    return bst_extrapolate(Ns, vals, omega=omega)

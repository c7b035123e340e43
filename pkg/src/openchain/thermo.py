"""Thermodynamic limit: kernels, density integral equations, bulk and boundary energies.

Fourier convention: f~(w) = integral of f(u) exp(i w u) du, so that
a_n~(w) = exp(-n |w| / 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special
from scipy.signal import fftconvolve
from scipy.sparse.linalg import LinearOperator, gmres

from .params import BoundaryParamsSU2, BoundaryParamsSU3

QUAD_TOL = 1e-13
SQRT3 = math.sqrt(3.0)


class RegimeError(ValueError):
    """Boundary parameters outside the regime where the ground state has only real roots."""


# --------------------------------------------------------------------------- special functions

def polygamma(m: int, x: float) -> float:
    """psi^(m)(x) for m in {0, 1, 2} and x > 0."""
    if m not in (0, 1, 2):
        raise ValueError(f"polygamma order must be 0, 1 or 2, got {m}")
    if not x > 0:
        raise ValueError(f"polygamma needs x > 0, got {x}")
    return float(special.polygamma(m, x))


def exp_fermi_integral(a: float) -> float:
    """Closed form of the integral over (0, inf) of exp(-a w) / (1 + exp(-w)); a > 0."""
    return 0.5 * (polygamma(0, 0.5 * (a + 1.0)) - polygamma(0, 0.5 * a))


def semi_infinite_quad(g: Callable[[float], float], tol: float = QUAD_TOL) -> float:
    """Integral of g over (0, inf) after mapping w = -ln t onto t in (0, 1]."""

    def mapped(t):
        return g(-math.log(t)) / t if t > 0 else 0.0

    val, _ = integrate.quad(mapped, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=400)
    return val


# --------------------------------------------------------------------------- kernels

def a_kernel(n: float, u):
    """a_n(u) = n / (2 pi (u^2 + n^2/4)), a normalized Lorentzian of half width n/2."""
    if not n > 0:
        raise ValueError("kernel order must be positive")
    u = np.asarray(u, dtype=float)
    return n / (2.0 * np.pi * (u * u + 0.25 * n * n))


def a_kernel_fourier(n: float, omega):
    return np.exp(-0.5 * n * np.abs(omega))


def xi_phase(m: float, x):
    """Xi_m(x) = 2 arctan(2x/m); its derivative is 2 pi a_m(x)."""
    return 2.0 * np.arctan(2.0 * np.asarray(x, dtype=float) / m)


# --------------------------------------------------------------------------- densities

@dataclass(frozen=True)
class Grid:
    cutoff: float = 40.0
    spacing: float = 0.02

    def __post_init__(self):
        if self.cutoff < 20 or self.spacing > 0.05 or self.spacing <= 0:
            raise ValueError("grid needs cutoff >= 20 and 0 < spacing <= 0.05")

    @property
    def nodes(self) -> np.ndarray:
        m = int(round(self.cutoff / self.spacing))
        return self.spacing * np.arange(-m, m + 1)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.nodes.size, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return w


@dataclass
class DensityProfile:
    """Smooth parts of the root densities on ``grid``.

    ``delta`` holds the weight of the point mass at u = 0 that accompanies each
    density when a delta term drives the equations (it is not part of ``values``).
    """

    grid: Grid
    values: list[np.ndarray]
    delta: list[float]
    finite_size: bool

    @property
    def u(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def rho(self) -> np.ndarray:
        return self.values[0]

    @property
    def sigma(self) -> np.ndarray:
        if len(self.values) < 2:
            raise AttributeError("single-level profile has no second density")
        return self.values[1]

    def integral(self, level: int = 0) -> float:
        return float(self.grid.weights @ self.values[level]) + self.delta[level]


def _tail_columns(order: float, u: np.ndarray, cutoff: float, nodes: int = 400):
    """Convolution of a_order with an algebraic tail rho(v) = rho(U) (U/v)^2 beyond +-U.

    Substituting v = U/t gives U * integral_0^1 a(u -+ U/t) dt, done by Gauss-Legendre.
    """
    t, wt = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (t + 1.0)
    wt = 0.5 * wt
    v = cutoff / t
    right = cutoff * (a_kernel(order, u[:, None] - v[None, :]) @ wt)
    left = cutoff * (a_kernel(order, u[:, None] + v[None, :]) @ wt)
    return left, right


def solve_fredholm(kernels: Sequence[Sequence[float]], driving: Sequence[Callable],
                   grid: Grid | None = None, delta: Sequence[float] | None = None,
                   finite_size: bool = False, tol: float = 1e-13,
                   tail: bool = True) -> DensityProfile:
    """Solve rho_i(u) + sum_k integral K_ik(u - v) rho_k(v) dv = g_i(u) - d_i delta(u).

    ``kernels[i][k]`` is a signed order: ``+n`` stands for a_n, ``-n`` for -a_n and
    0 for no coupling.  ``driving[i]`` is the smooth part of g_i and ``delta[i]``
    the coefficient d_i.  Writing rho_i = s_i - d_i delta turns each delta into
    the smooth source sum_k d_k K_ik(u).

    The Nystrom system uses trapezoid weights; its convolution structure lets
    GMRES apply it with FFTs.  With ``tail`` each density is continued past the
    cutoff as c/u^2, which is the decay produced by Lorentzian driving terms.
    """
    grid = grid or Grid()
    levels = len(driving)
    if len(kernels) != levels or any(len(row) != levels for row in kernels):
        raise ValueError("kernel matrix must be square and match the driving terms")
    d = list(delta) if delta is not None else [0.0] * levels
    u = grid.nodes
    w = grid.weights
    m = u.size
    span = grid.spacing * np.arange(-(m - 1), m)

    def signed(order, x):
        if order == 0:
            return np.zeros_like(x)
        return math.copysign(1.0, order) * a_kernel(abs(order), x)

    kern = [[signed(kernels[i][k], span) for k in range(levels)] for i in range(levels)]
    tails = {}
    if tail:
        for order in {abs(o) for row in kernels for o in row if o != 0}:
            tails[order] = _tail_columns(order, u, grid.cutoff)
    rhs = []
    for i in range(levels):
        g = np.asarray(driving[i](u), dtype=float) * np.ones(m)
        for k in range(levels):
            g = g + d[k] * signed(kernels[i][k], u)
        rhs.append(g)
    rhs = np.concatenate(rhs)

    def apply(x):
        x = x.reshape(levels, m)
        out = x.copy()
        for i in range(levels):
            for k in range(levels):
                order = kernels[i][k]
                if order == 0:
                    continue
                out[i] += fftconvolve(kern[i][k], w * x[k], mode="valid")
                if tail:
                    left, right = tails[abs(order)]
                    out[i] += math.copysign(1.0, order) * (left * x[k][0] + right * x[k][-1])
        return out.reshape(-1)

    if not np.any(rhs):
        sol = np.zeros_like(rhs)
    else:
        op = LinearOperator((levels * m, levels * m), matvec=apply, dtype=float)
        sol, info = gmres(op, rhs, rtol=tol, atol=0.0, restart=60, maxiter=50)
        if info != 0 or np.linalg.norm(apply(sol) - rhs) > 1e3 * tol * np.linalg.norm(rhs):
            raise np.linalg.LinAlgError("discretized density equation is singular or ill-conditioned")
    vals = [sol[i * m:(i + 1) * m] for i in range(levels)]
    return DensityProfile(grid=grid, values=vals, delta=[-x for x in d], finite_size=finite_size)


def density_su2_closed(u):
    """Bulk su(2) root density 1/(2 cosh(pi u))."""
    return 0.5 / np.cosh(np.pi * np.asarray(u, dtype=float))


def density_su3_closed(u):
    """Bulk first-level su(3) root density 1/(sqrt3 (2 cosh(2 pi u/3) - 1))."""
    return 1.0 / (SQRT3 * (2.0 * np.cosh(2.0 * np.pi * np.asarray(u, dtype=float) / 3.0) - 1.0))


def density_su3_level2_closed(v):
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    small = np.abs(v) < 1e-8
    out[small] = 1.0 / (3.0 * SQRT3)
    vs = v[~small]
    out[~small] = np.sinh(np.pi * vs / 3.0) / (SQRT3 * np.sinh(np.pi * vs))
    return out


def density_su2(params: BoundaryParamsSU2 | None = None, N: float | None = None,
                grid: Grid | None = None) -> DensityProfile:
    """su(2) density; with ``params`` and ``N`` the 1/(2N) boundary terms are included."""
    if params is None:
        return solve_fredholm([[2.0]], [lambda u: a_kernel(1.0, u)], grid)
    _require_su2_regime(params)
    c = 1.0 / (2.0 * N)

    def g(u):
        return (a_kernel(1.0, u) + c * (a_kernel(2 * params.pbar, u) + a_kernel(2 * params.qbar, u)
                                        + a_kernel(1.0, u)))

    return solve_fredholm([[2.0]], [g], grid, delta=[c], finite_size=True)


def boundary_density_su2(params: BoundaryParamsSU2, grid: Grid | None = None) -> DensityProfile:
    """Order-1/N part of the su(2) density, in units of 1/(2N)."""
    _require_su2_regime(params)

    def g(u):
        return a_kernel(2 * params.pbar, u) + a_kernel(2 * params.qbar, u) + a_kernel(1.0, u)

    return solve_fredholm([[2.0]], [g], grid, delta=[1.0], finite_size=True)


def density_su3(params: BoundaryParamsSU3 | None = None, N: float | None = None,
                grid: Grid | None = None) -> DensityProfile:
    kernels = [[2.0, -1.0], [-1.0, 2.0]]
    if params is None:
        return solve_fredholm(kernels, [lambda u: a_kernel(1.0, u), lambda u: 0.0], grid)
    _require_su3_regime(params)
    c = 1.0 / (2.0 * N)
    f, fb = params.f, params.fbar

    def g1(u):
        return a_kernel(1.0, u) + c * (a_kernel(1.0, u) + a_kernel(2 * fb, u) + a_kernel(2 * f, u))

    def g2(u):
        return c * a_kernel(1.0, u)

    return solve_fredholm(kernels, [g1, g2], grid, delta=[c, c], finite_size=True)


def delta_rho_tilde_su2(omega, params: BoundaryParamsSU2):
    """Fourier image of the boundary density, per unit of 1/(2N)."""
    x = np.abs(np.asarray(omega, dtype=float))
    return (np.exp(-params.pbar * x) + np.exp(-params.qbar * x) + np.exp(-0.5 * x) - 1.0) / (1.0 + np.exp(-x))


def inverse_fourier_even(ft: Callable[[float], float], u: float) -> float:
    """(1/pi) * integral over (0, w_max) of ft(w) cos(w u) dw for an even transform.

    ``ft`` must decay at least like exp(-w/2); w_max = 90 leaves a tail below 1e-19.
    """
    val, _ = integrate.quad(lambda w: ft(w) * math.cos(w * u), 0.0, 90.0,
                            epsabs=1e-13, epsrel=1e-12, limit=2000)
    return val / np.pi


# --------------------------------------------------------------------------- energies

def ground_energy_density(model: str) -> float:
    """Bulk ground-state energy density e_g.

    su2 returns 1 - 2 ln 2, which is the energy per 2N (twice the number of
    sites); the extensive energy per site is twice this.  su3 returns the energy
    per site, -4 pi * integral a_1 rho + 2.
    """
    if model == "su2":
        return 1.0 - 2.0 * math.log(2.0)
    if model == "su3":
        val, _ = integrate.quad(lambda mu: a_kernel(1.0, mu) * density_su3_closed(mu), 0.0, 60.0,
                                epsabs=1e-14, epsrel=1e-13, limit=200)
        return -4.0 * math.pi * 2.0 * val + 2.0
    raise ValueError(f"unknown model {model!r}")


def _require_su2_regime(params: BoundaryParamsSU2) -> None:
    if not (params.p > 0.5 and params.qbar > 0):
        raise RegimeError(f"need p > 1/2 and q/sqrt(1+xi^2) > 1/2, got p={params.p}, "
                          f"q/sqrt(1+xi^2)={params.q / params.s}")


def _require_su3_regime(params: BoundaryParamsSU3) -> None:
    if not (params.f > 0 and params.fbar > 0):
        raise RegimeError(f"need 0 < h < 2 and -1 < hbar < 0, got h={params.h}, hbar={params.hbar}")


def boundary_energy_su2(params: BoundaryParamsSU2, method: str = "digamma") -> float:
    """Surface energy of the open su(2) chain, by ``method`` 'digamma' or 'quad'."""
    _require_su2_regime(params)
    p, a2 = params.p, params.q / params.s
    if method == "digamma":
        i1, i2 = exp_fermi_integral(p), exp_fermi_integral(a2)
    elif method == "quad":
        i1 = semi_infinite_quad(lambda w: math.exp(-p * w) / (1.0 + math.exp(-w)))
        i2 = semi_infinite_quad(lambda w: math.exp(-a2 * w) / (1.0 + math.exp(-w)))
    else:
        raise ValueError(f"unknown method {method!r}")
    return -2.0 * i1 - 2.0 * i2 + math.pi - 2.0 * math.log(2.0) - 1.0 + 1.0 / p + params.s / params.q


def boundary_energy_su2_expansion(params: BoundaryParamsSU2, order: int = 4) -> float:
    """Small-xi expansion of the su(2) surface energy through xi^order (0, 2 or 4)."""
    if order not in (0, 2, 4):
        raise ValueError("order must be 0, 2 or 4")
    p, q, xi = params.p, params.q, params.xi
    psi = polygamma
    e = (1.0 / p + psi(0, p / 2) - psi(0, (p + 1) / 2) + 1.0 / q + psi(0, q / 2) - psi(0, (q + 1) / 2)
         + math.pi - 1.0 - 2.0 * math.log(2.0))
    if order >= 2:
        e += xi**2 * (0.5 / q - 0.25 * q * psi(1, q / 2) + 0.25 * q * psi(1, (q + 1) / 2))
    if order >= 4:
        e += xi**4 * (q**3 * psi(2, q / 2) - q**3 * psi(2, (q + 1) / 2) + 6 * q**2 * psi(1, q / 2)
                      - 6 * q**2 * psi(1, (q + 1) / 2) - 4.0) / (32.0 * q)
    return e


def su3_boundary_integral(f: float) -> float:
    """Integral over (0, inf) of (e^{-(1/2+f)w} + e^{-(3/2+f)w}) / (1 + e^{-w} + e^{-2w})."""
    a = 0.5 + f

    def g(w):
        x = math.exp(-w)
        return (math.exp(-a * w) * (1.0 + x)) / (1.0 + x + x * x)

    # the integrand is below e^{-a w}; past w_max the tail is under 1e-14
    w_max = max(40.0, math.log(1e14 / a) / a)
    val, _ = integrate.quad(g, 0.0, w_max, epsabs=1e-14, epsrel=1e-13, limit=400)
    return val


def boundary_energy_su3(params: BoundaryParamsSU3) -> float:
    _require_su3_regime(params)
    return (-2.0 * su3_boundary_integral(params.f) - 2.0 * su3_boundary_integral(params.fbar)
            + 4.0 * math.pi / (3.0 * SQRT3) + params.boundary_constant - 4.0 / 3.0)

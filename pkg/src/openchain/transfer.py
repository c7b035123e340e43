"""Double-row transfer matrices, the Hamiltonian identity, and T-Q eigenvalues.

The auxiliary space is the first tensor factor of C^n (x) (C^n)^{(x) N}; every
R_{0j}(u) = u + P_{0j} is applied as a row permutation so that building t(u)
costs O(N dim^2) rather than O(N dim^3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import k_minus_su2, k_minus_su3, k_plus_su2, k_plus_su3
from .params import BoundaryParamsSU2, BoundaryParamsSU3

MAX_SITES = {2: 8, 3: 5}
RICHARDSON_STEP = 1e-4


def _rank(params) -> int:
    if isinstance(params, BoundaryParamsSU2):
        return 2
    if isinstance(params, BoundaryParamsSU3):
        return 3
    raise TypeError(f"unknown parameter type {type(params).__name__}")


def _k_matrices(u: float, params) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(params, BoundaryParamsSU2):
        return k_minus_su2(u, params.p), k_plus_su2(u, params.q, params.xi)
    return k_minus_su3(u, params.h), k_plus_su3(u, params.hbar)


def _swap_index(n: int, N: int, j: int) -> np.ndarray:
    """Basis permutation implementing P_{0j} on the (N+1)-fold product."""
    idx = np.arange(n ** (N + 1)).reshape([n] * (N + 1))
    return np.swapaxes(idx, 0, j).reshape(-1)


def double_row_transfer(u: float, params, N: int) -> np.ndarray:
    """t(u) = tr_0 K^+_0(u) T_0(u) K^-_0(u) That_0(u) on (C^n)^{(x) N}."""
    n = _rank(params)
    if N < 1 or N > MAX_SITES[n]:
        raise ValueError(f"N={N} outside the dense transfer-matrix limit 1..{MAX_SITES[n]} for su({n})")
    dim = n ** (N + 1)
    kminus, kplus = _k_matrices(u, params)
    rest = n**N
    swaps = [_swap_index(n, N, j) for j in range(1, N + 1)]

    # That_0 = R_01 R_02 ... R_0N ; build product right-to-left by left multiplication
    M = np.eye(dim)
    for j in range(N, 0, -1):
        M = u * M + M[swaps[j - 1]]
    M = np.kron(kminus, np.eye(rest)) @ M
    # T_0 = R_0N ... R_01 ; left-multiply R_01 first
    for j in range(1, N + 1):
        M = u * M + M[swaps[j - 1]]
    M = np.kron(kplus, np.eye(rest)) @ M
    return np.trace(M.reshape(n, rest, n, rest), axis1=0, axis2=2)


def transfer_derivative(params, N: int, u: float = 0.0, h: float = RICHARDSON_STEP) -> np.ndarray:
    """t'(u) from central differences at h and h/2 with one Richardson step."""

    def central(step):
        return (double_row_transfer(u + step, params, N) - double_row_transfer(u - step, params, N)) / (2 * step)

    return (4.0 * central(h / 2) - central(h)) / 3.0


def hamiltonian_from_transfer(params, N: int) -> np.ndarray:
    """H = t(0)^{-1} t'(0)."""
    t0 = double_row_transfer(0.0, params, N)
    cond = np.linalg.cond(t0)
    if not np.isfinite(cond) or cond > 1e12:
        raise np.linalg.LinAlgError("t(0) is singular for these boundary parameters")
    H = np.linalg.solve(t0, transfer_derivative(params, N))
    return 0.5 * (H + H.T)


# ---------------------------------------------------------------------------
# su(2) T-Q relation


@dataclass
class TQDataSU2:
    """Roots lambda_j of Q(u) = prod (u - lambda_j)(u + lambda_j + 1)."""

    N: int
    params: BoundaryParamsSU2
    lambdas: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    @classmethod
    def from_mu(cls, N, params, mus):
        """Homogeneous-branch roots given as real mu with lambda = i mu - 1/2."""
        return cls(N, params, 1j * np.asarray(mus, dtype=float) - 0.5)

    def Q(self, u):
        lam = self.lambdas
        return np.prod((u - lam) * (u + lam + 1.0))


def inhomogeneous_coefficient(xi: float) -> float:
    return 2.0 * (1.0 - math.sqrt(1.0 + xi * xi))


def tq_lambda_su2(u, data: TQDataSU2, include_inhomogeneous: bool = True):
    """Eigenvalue Lambda(u) from the (in)homogeneous su(2) T-Q relation.

    Returns a real number when the imaginary part is at rounding level,
    otherwise the complex value.
    """
    N, par = data.N, data.params
    p, q, s = par.p, par.q, par.s
    Qu = data.Q(u)
    if abs(Qu) < 1e-300:
        raise ZeroDivisionError(f"u={u} is a zero of Q")
    if abs(2 * u + 1) < 1e-14:
        raise ZeroDivisionError("u = -1/2 is a pole of the individual terms")
    lam = (2 * (u + 1) ** (2 * N + 1) / (2 * u + 1) * (u + p) * (s * u + q) * data.Q(u - 1) / Qu
           + 2 * u ** (2 * N + 1) / (2 * u + 1) * (u - p + 1) * (s * (u + 1) - q) * data.Q(u + 1) / Qu)
    if include_inhomogeneous:
        lam = lam + inhomogeneous_coefficient(par.xi) * (u * (u + 1)) ** (2 * N + 1) / Qu
    lam = complex(lam)
    if abs(lam.imag) <= 1e-9 * max(1.0, abs(lam.real)):
        return lam.real
    return lam


def bae_residuals_su2(lambdas, N: int, params: BoundaryParamsSU2) -> np.ndarray:
    """LHS - RHS of the inhomogeneous su(2) Bethe equations, one per root."""
    lam = np.asarray(lambdas, dtype=complex)
    p, q, s = params.p, params.q, params.s
    c = 1.0 - s
    out = np.empty(len(lam), dtype=complex)
    for j, x in enumerate(lam):
        den_b = (x - p + 1) * (s * (x + 1) - q)
        lhs = ((x + 1) / x) ** (2 * N + 1) * (x + p) * (s * x + q) / den_b
        pair_den = np.prod((x - lam - 1) * (x + lam))
        rhs = (-c * (2 * x + 1) * (x + 1) ** (2 * N + 1) / (den_b * pair_den)
               - np.prod((x - lam + 1) * (x + lam + 2)) / pair_den)
        out[j] = lhs - rhs
    return out


def energy_from_lambdas_su2(lambdas, N: int, params: BoundaryParamsSU2) -> float:
    lam = np.asarray(lambdas, dtype=complex)
    e = np.sum(2.0 / (lam * (lam + 1))) + 2 * N - 1 + 1 / params.p + params.s / params.q
    return float(np.real(e))


def solve_inhomogeneous_baes_su2(N: int, params: BoundaryParamsSU2, n_starts: int = 200,
                                 seed: int = 0, tol: float = 1e-10,
                                 sample_u=(0.13, 0.37, 0.71, 1.09, 1.53)) -> list[TQDataSU2]:
    """Best-effort multistart Newton search for the N-root inhomogeneous BAEs.

    Newton runs on the polynomial form F_j = (2u+1) Q(u) Lambda(u) |_{u=lambda_j} = 0,
    which is free of the spurious poles of the ratio form.  Every converged,
    non-degenerate root set whose Lambda(u) is an eigenvalue of t(u) at all
    ``sample_u`` (within 1e-8) is returned; duplicates (same Lambda) are dropped.
    """
    if N > 3:
        raise ValueError("the multistart search is limited to N <= 3")
    rng = np.random.default_rng(seed)
    spectra = [np.linalg.eigvalsh(double_row_transfer(u, params, N)) for u in sample_u]
    found: list[TQDataSU2] = []
    found_keys: list[np.ndarray] = []
    for _ in range(n_starts):
        z0 = rng.uniform(-3, 3, N) + 1j * rng.uniform(-3, 3, N)
        lam = _newton_polynomial_bae(z0, N, params)
        if lam is None:
            continue
        lam = _newton(lambda z: bae_residuals_su2(z, N, params), lam, max_iter=20, tol=1e-14)
        if lam is None:
            continue
        if np.max(np.abs(bae_residuals_su2(lam, N, params))) > tol:
            continue
        data = TQDataSU2(N, params, lam)
        try:
            values = [tq_lambda_su2(u, data) for u in sample_u]
        except ZeroDivisionError:
            continue
        if any(abs(complex(v).imag) > 1e-8 for v in values):
            continue
        values = np.real(values)
        if not all(np.min(np.abs(spec - v)) < 1e-8 for spec, v in zip(spectra, values)):
            continue
        if any(np.max(np.abs(values - k)) < 1e-8 for k in found_keys):
            continue
        found.append(data)
        found_keys.append(values)
    if not found:
        raise RuntimeError(f"no root set reproducing a t(u) eigenvalue after {n_starts} starts")
    return found


def _poly_bae(lam: np.ndarray, N: int, params: BoundaryParamsSU2) -> np.ndarray:
    p, q, s = params.p, params.q, params.s
    c = 2.0 * (1.0 - s)

    def Q(u):
        return np.prod((u - lam) * (u + lam + 1.0))

    out = np.empty(len(lam), dtype=complex)
    for j, x in enumerate(lam):
        out[j] = (2 * (x + 1) ** (2 * N + 1) * (x + p) * (s * x + q) * Q(x - 1)
                  + 2 * x ** (2 * N + 1) * (x - p + 1) * (s * (x + 1) - q) * Q(x + 1)
                  + c * (2 * x + 1) * (x * (x + 1)) ** (2 * N + 1))
    return out


def _newton(fun, z0, max_iter=100, tol=1e-13):
    """Damped complex Newton with a finite-difference Jacobian (the maps are holomorphic).

    Returns the last iterate once the max-norm residual stops decreasing or
    drops below ``tol`` times its initial scale; ``None`` on a singular step.
    """
    z = np.array(z0, dtype=complex)
    n = len(z)
    f = fun(z)
    scale = 1.0 + np.max(np.abs(f))
    for _ in range(max_iter):
        nf = np.max(np.abs(f))
        if not np.isfinite(nf):
            return None
        if nf < tol * scale:
            break
        J = np.empty((n, n), dtype=complex)
        for k in range(n):
            dz = 1e-7 * max(1.0, abs(z[k]))
            zp = z.copy()
            zp[k] += dz
            J[:, k] = (fun(zp) - f) / dz
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            return None
        t = 1.0
        for _ in range(40):
            zn = z + t * step
            fn = fun(zn)
            if np.max(np.abs(fn)) < nf:
                break
            t *= 0.5
        else:
            break
        z, f = zn, fn
    return z


def _newton_polynomial_bae(z0, N, params):
    z = _newton(lambda w: _poly_bae(w, N, params), z0)
    if z is None:
        return None
    # reject degenerate configurations where the ratio form is singular
    for j in range(N):
        if abs(z[j]) < 1e-6 or abs(z[j] + 1) < 1e-6 or abs(2 * z[j] + 1) < 1e-6:
            return None
        for l in range(N):
            if l != j and (abs(z[j] - z[l]) < 1e-6 or abs(z[j] + z[l] + 1) < 1e-6):
                return None
    return z


# ---------------------------------------------------------------------------
# su(3) T-Q relation


@dataclass
class TQDataSU3:
    N: int
    params: BoundaryParamsSU3
    lambda1: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    lambda2: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    def Q(self, r: int, u):
        if r == 0:
            return u ** (2 * self.N)
        if r == 3:
            return 1.0
        lam = self.lambda1 if r == 1 else self.lambda2
        return np.prod((u - lam) * (u + lam + r))


def k_factor_su3(m: int, u: float, params: BoundaryParamsSU3) -> float:
    h, hb = params.h, params.hbar
    if m == 1:
        return (1 / hb + 0.5 - u) * (1 / h + u)
    if m in (2, 3):
        return (1 / hb + 1.5 + u) * (1 / h - u - 1)
    raise ValueError("m must be 1, 2 or 3")


def z_term_su3(m: int, u, data: TQDataSU3):
    den = (u + (m - 1) / 2) * (u + m / 2) * data.Q(m - 1, u) * data.Q(m, u)
    if abs(den) < 1e-12:
        raise ZeroDivisionError(f"pole of z_{m} at u={u}")
    num = (u * (u + 1.5) * k_factor_su3(m, u, data.params) * data.Q(0, u)
           * data.Q(m - 1, u + 1) * data.Q(m, u - 1))
    return num / den


def x_term_su3(u, data: TQDataSU3):
    q1 = data.Q(1, u)
    if abs(q1) < 1e-12:
        raise ZeroDivisionError(f"pole of x(u) at u={u}")
    return (u * (u + 1.5) * data.Q(0, u + 1) * data.Q(0, u)
            * 2 * u * (u + 0.5) ** 2 * (u - 0.5) * (u + 1.5) * (u + 1) * data.Q(2, -u - 1) / q1)


def tq_lambda_su3(u, data: TQDataSU3, include_inhomogeneous: bool = True):
    val = sum(z_term_su3(m, u, data) for m in (1, 2, 3))
    if include_inhomogeneous:
        val = val + x_term_su3(u, data)
    val = complex(val)
    if abs(val.imag) <= 1e-9 * max(1.0, abs(val.real)):
        return val.real
    return val

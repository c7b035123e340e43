"""Logarithmic Bethe equations for the real ground-state roots.

Roots use the mu-parameterisation, lambda = i mu - 1/2 (level 1) and
lambda = i mu - 1 (su(3) level 2), in which the ground-state roots are real
and positive.  Both solvers are damped Newton iterations with analytic
Jacobians.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .params import BoundaryParamsSU2, BoundaryParamsSU3

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-11
MAX_HALVINGS = 40


class BetheConvergenceError(RuntimeError):
    pass


def _datan(x, a=1.0):
    """d/dx arctan(x / a) for a > 0 (a == 0 gives 0, the x > 0 branch of arctan2)."""
    return a / (x * x + a * a) if a > 0 else np.zeros_like(x)


def damped_newton(residual, jacobian, x0, tol=RESIDUAL_TOL, max_iter=100):
    """Newton iteration with step halving until the max-norm residual decreases.

    Returns ``(x, iterations)``.
    """
    x = np.array(x0, dtype=float)
    f = residual(x)
    nf = np.max(np.abs(f)) if f.size else 0.0
    for it in range(max_iter):
        if nf < tol:
            return x, it
        J = jacobian(x)
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as exc:
            raise BetheConvergenceError("singular Jacobian") from exc
        t = 1.0
        for _ in range(MAX_HALVINGS):
            xn = x + t * step
            fn = residual(xn)
            nfn = np.max(np.abs(fn))
            if np.isfinite(nfn) and nfn < nf:
                break
            t *= 0.5
        else:
            if nf < 10 * tol:
                return x, it
            raise BetheConvergenceError(f"line search failed at residual {nf:.3e}")
        x, f, nf = xn, fn, nfn
    if nf < tol:
        return x, max_iter
    raise BetheConvergenceError(f"no convergence after {max_iter} iterations (residual {nf:.3e})")


# ---------------------------------------------------------------------------
# su(2)


@dataclass
class BetheStateSU2:
    N: int
    mu: np.ndarray
    quantum_numbers: np.ndarray
    residual: float = 0.0
    iterations: int = 0

    @property
    def M(self) -> int:
        return len(self.mu)


def ground_quantum_numbers_su2(N: int) -> np.ndarray:
    """I_j = j for j = 1..ceil(N/2); odd chains take the larger root count."""
    if N < 1:
        raise ValueError("N must be positive")
    return np.arange(1, (N + 1) // 2 + 1)


def log_bae_residuals_su2(mu, N: int, params: BoundaryParamsSU2, I) -> np.ndarray:
    """Log-form equations with the l = j term kept inside the sum."""
    mu = np.asarray(mu, dtype=float)
    d = mu[:, None] - mu[None, :]
    s = mu[:, None] + mu[None, :]
    pair = np.sum(2 * np.arctan(d) + 2 * np.arctan(s), axis=1)
    return (2 * np.arctan2(mu, params.pbar) + 2 * np.arctan2(mu, params.qbar)
            + 4 * N * np.arctan(2 * mu) - 2 * np.pi * np.asarray(I) - pair
            + 2 * np.arctan(2 * mu))


def log_bae_jacobian_su2(mu, N: int, params: BoundaryParamsSU2) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    d = mu[:, None] - mu[None, :]
    s = mu[:, None] + mu[None, :]
    kd = 2.0 / (1 + d * d)
    ks = 2.0 / (1 + s * s)
    diag = (2 * _datan(mu, params.pbar) + 2 * _datan(mu, params.qbar)
            + 8 * N / (1 + 4 * mu * mu) + 4 / (1 + 4 * mu * mu))
    J = kd - ks  # d/dmu_l of -sum_l [...] for l != j
    J[np.diag_indices_from(J)] = 0.0
    # d/dmu_j of -sum_l [2 atan(mu_j - mu_l) + 2 atan(mu_j + mu_l)]
    diag = diag - (np.sum(kd, axis=1) - np.diag(kd)) - np.sum(ks, axis=1) - np.diag(ks)
    J[np.diag_indices_from(J)] = diag
    return J


def _initial_guess_su2(N: int, I) -> np.ndarray:
    # bulk counting function (1/2pi) arctan(sinh(pi mu)) = I/(2N), softened at the edge
    z = (np.asarray(I, dtype=float) - 0.5) / (2 * N + 2)
    return np.arcsinh(np.tan(2 * np.pi * z)) / np.pi


def solve_log_baes_su2(N: int, params: BoundaryParamsSU2, quantum_numbers=None,
                       initial=None, tol: float = RESIDUAL_TOL) -> BetheStateSU2:
    if not params.real_root_regime:
        raise ValueError(f"pbar={params.pbar:.4g}, qbar={params.qbar:.4g}: real-root regime needs both >= 0")
    I = ground_quantum_numbers_su2(N) if quantum_numbers is None else np.asarray(quantum_numbers)
    x0 = _initial_guess_su2(N, I) if initial is None else np.asarray(initial, dtype=float)
    mu, it = damped_newton(lambda m: log_bae_residuals_su2(m, N, params, I),
                           lambda m: log_bae_jacobian_su2(m, N, params), x0, tol=tol)
    res = float(np.max(np.abs(log_bae_residuals_su2(mu, N, params, I)))) if len(mu) else 0.0
    return BetheStateSU2(N=N, mu=mu, quantum_numbers=I, residual=res, iterations=it)


def energy_su2(state: BetheStateSU2, params: BoundaryParamsSU2) -> float:
    mu = state.mu
    return float(-np.sum(2.0 / (mu * mu + 0.25)) + 2 * state.N - 1 + 1 / params.p + params.s / params.q)


# ---------------------------------------------------------------------------
# su(3)

_BASE_COUNTS = {2: (2, 1), 4: (3, 1), 6: (4, 2)}


@dataclass
class BetheStateSU3:
    N: int
    mu1: np.ndarray
    mu2: np.ndarray
    I: np.ndarray
    J: np.ndarray
    residual: float = 0.0
    iterations: int = 0

    @property
    def L1(self) -> int:
        return len(self.mu1)

    @property
    def L2(self) -> int:
        return len(self.mu2)


def ground_state_counts_su3(N: int) -> tuple[int, int]:
    """(L1, L2) from N = 6(n-1) + alpha, alpha in {2, 4, 6}."""
    if N < 2 or N % 2:
        raise ValueError("N must be even and >= 2")
    n = (N - 1) // 6 + 1
    alpha = N - 6 * (n - 1)
    l1, l2 = _BASE_COUNTS[alpha]
    return l1 + 4 * (n - 1), l2 + 2 * (n - 1)


def ground_quantum_numbers_su3(N: int) -> tuple[np.ndarray, np.ndarray]:
    L1, L2 = ground_state_counts_su3(N)
    return np.arange(1, L1 + 1), np.arange(1, L2 + 1)


def log_bae_residuals_su3(mu1, mu2, N: int, params: BoundaryParamsSU3, I, J) -> np.ndarray:
    mu1 = np.asarray(mu1, dtype=float)
    mu2 = np.asarray(mu2, dtype=float)
    a = np.arctan
    r1 = (2 * np.arctan2(mu1, params.fbar) + 2 * np.arctan2(mu1, params.f)
          + 2 * (2 * N + 1) * a(2 * mu1)
          - 2 * np.sum(a(mu1[:, None] - mu1[None, :]) + a(mu1[:, None] + mu1[None, :]), axis=1)
          + 2 * np.sum(a(2 * (mu1[:, None] + mu2[None, :])) + a(2 * (mu1[:, None] - mu2[None, :])), axis=1)
          - 2 * np.pi * np.asarray(I))
    r2 = (2 * a(2 * mu2)
          + 2 * np.sum(a(2 * (mu2[:, None] - mu1[None, :])) + a(2 * (mu2[:, None] + mu1[None, :])), axis=1)
          - 2 * np.sum(a(mu2[:, None] - mu2[None, :]) + a(mu2[:, None] + mu2[None, :]), axis=1)
          - 2 * np.pi * np.asarray(J))
    return np.concatenate([r1, r2])


def log_bae_jacobian_su3(mu1, mu2, N: int, params: BoundaryParamsSU3) -> np.ndarray:
    mu1 = np.asarray(mu1, dtype=float)
    mu2 = np.asarray(mu2, dtype=float)
    L1, L2 = len(mu1), len(mu2)

    def k(x, c):  # d/dx [2 arctan(c x)]
        return 2 * c / (1 + (c * x) ** 2)

    d11, s11 = mu1[:, None] - mu1[None, :], mu1[:, None] + mu1[None, :]
    d12, s12 = mu1[:, None] - mu2[None, :], mu1[:, None] + mu2[None, :]
    d22, s22 = mu2[:, None] - mu2[None, :], mu2[:, None] + mu2[None, :]
    d21, s21 = d12.T * -1, s12.T

    J = np.zeros((L1 + L2, L1 + L2))
    # level-1 rows
    A = -(-k(d11, 1)) - k(s11, 1)  # d/dmu1_j of -2[atan(mu_l - mu_j) + atan(mu_l + mu_j)]
    diag1 = (2 * _datan(mu1, params.fbar) + 2 * _datan(mu1, params.f) + (2 * N + 1) * k(mu1, 2)
             - np.sum(k(d11, 1) + k(s11, 1), axis=1) + k(d11, 1).diagonal() - k(s11, 1).diagonal()
             + np.sum(k(s12, 2) + k(d12, 2), axis=1))
    A[np.diag_indices_from(A)] = diag1
    J[:L1, :L1] = A
    J[:L1, L1:] = k(s12, 2) - k(d12, 2)
    # level-2 rows
    B = k(d22, 1) - k(s22, 1)
    diag2 = (k(mu2, 2) + np.sum(k(d21, 2) + k(s21, 2), axis=1)
             - np.sum(k(d22, 1) + k(s22, 1), axis=1) + k(d22, 1).diagonal() - k(s22, 1).diagonal())
    B[np.diag_indices_from(B)] = diag2
    J[L1:, L1:] = B
    J[L1:, :L1] = -k(d21, 2) + k(s21, 2)
    return J


def density_su3_level2(v):
    """Bulk level-2 root density sinh(pi v/3) / (sqrt(3) sinh(pi v))."""
    v = np.asarray(v, dtype=float)
    out = np.full(v.shape, 1.0 / (3.0 * math.sqrt(3.0)))
    nz = np.abs(v) > 1e-8
    out[nz] = np.sinh(np.pi * v[nz] / 3) / (math.sqrt(3.0) * np.sinh(np.pi * v[nz]))
    return out


def _initial_guess_su3(N: int, I, J) -> tuple[np.ndarray, np.ndarray]:
    # level 1: Y(mu) = (1/pi) arctan(sqrt3 tanh(pi mu / 3)) = I / (2N)
    y = (np.asarray(I, dtype=float) - 0.5) / (2 * N + 3)
    mu1 = 3 / np.pi * np.arctanh(np.tan(np.pi * y) / math.sqrt(3.0))
    # level 2: numerical inverse of the integrated bulk density (total 1/6 on v > 0)
    grid = np.linspace(0.0, 40.0, 8001)
    dens = density_su3_level2(grid)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    z = (np.asarray(J, dtype=float) - 0.5) / (2 * N + 3)
    mu2 = np.interp(z, cum, grid)
    return mu1, mu2


def continuation_guess_su3(prev: BetheStateSU3, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Initial roots at length N from a solved state at a smaller length.

    The bulk guess is corrected by the deviation of the previous roots from their
    own bulk guess, interpolated in the scaled quantum number (I - 1/2)/(2N + 3).
    """
    I, J = ground_quantum_numbers_su3(N)
    g1, g2 = _initial_guess_su3(N, I, J)
    p1, p2 = _initial_guess_su3(prev.N, prev.I, prev.J)
    out = []
    for guess, new_q, old_q, old_mu, old_guess in ((g1, I, prev.I, prev.mu1, p1), (g2, J, prev.J, prev.mu2, p2)):
        z_new = (new_q - 0.5) / (2 * N + 3)
        z_old = (old_q - 0.5) / (2 * prev.N + 3)
        shift = np.interp(z_new, z_old, old_mu - old_guess) if len(old_q) else 0.0
        out.append(guess + shift)
    return out[0], out[1]


def solve_log_baes_su3(N: int, params: BoundaryParamsSU3, I=None, J=None, initial=None,
                       tol: float = RESIDUAL_TOL, max_iter: int = 100) -> BetheStateSU3:
    if N % 2:
        raise ValueError("N must be even")
    if not (params.f > 0 and params.fbar > 0):
        raise ValueError(f"f={params.f:.4g}, fbar={params.fbar:.4g}: real-root regime needs both > 0")
    if I is None or J is None:
        I0, J0 = ground_quantum_numbers_su3(N)
        I = I0 if I is None else I
        J = J0 if J is None else J
    I, J = np.asarray(I), np.asarray(J)
    L1 = len(I)
    if initial is None:
        mu1, mu2 = _initial_guess_su3(N, I, J)
    else:
        mu1, mu2 = (np.asarray(x, dtype=float) for x in initial)
    x0 = np.concatenate([mu1, mu2])

    def res(x):
        return log_bae_residuals_su3(x[:L1], x[L1:], N, params, I, J)

    def jac(x):
        return log_bae_jacobian_su3(x[:L1], x[L1:], N, params)

    x, it = damped_newton(res, jac, x0, tol=tol, max_iter=max_iter)
    r = float(np.max(np.abs(res(x))))
    return BetheStateSU3(N=N, mu1=x[:L1], mu2=x[L1:], I=I, J=J, residual=r, iterations=it)


def energy_su3(state: BetheStateSU3, params: BoundaryParamsSU3) -> float:
    mu = state.mu1
    return float(-np.sum(2.0 / (mu * mu + 0.25)) + 2 * (state.N - 1) + params.boundary_constant + 2.0 / 3.0)

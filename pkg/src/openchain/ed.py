"""Open-chain Hamiltonians and a Lanczos ground-state solver.

The Hamiltonians are stored as a list of one- and two-site terms plus a
constant.  Small operators are materialised as CSR matrices; above
``MATRIX_FREE_DIM`` the matvec contracts each local term directly against the
reshaped state vector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .algebra import permutation, weyl
from .params import BoundaryParamsSU2, BoundaryParamsSU3

log = logging.getLogger(__name__)

MATRIX_FREE_DIM = 4096

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


class LanczosError(RuntimeError):
    pass


@dataclass
class SparseOperator:
    """Sum of local terms ``coef * op`` on consecutive sites, plus ``constant``.

    Each term is ``(first_site, op)`` with ``first_site`` 1-based and ``op`` a
    dense ``n^k x n^k`` matrix acting on sites ``first_site .. first_site+k-1``.
    """

    N: int
    n: int
    terms: list[tuple[int, np.ndarray]] = field(default_factory=list)
    constant: float = 0.0
    _csr: sp.csr_matrix | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.n**self.N

    @property
    def shape(self) -> tuple[int, int]:
        return (self.dim, self.dim)

    def add(self, first_site: int, op: np.ndarray) -> None:
        k = int(round(np.log(op.shape[0]) / np.log(self.n)))
        if self.n**k != op.shape[0] or first_site < 1 or first_site + k - 1 > self.N:
            raise ValueError(f"term of dim {op.shape[0]} does not fit at site {first_site}")
        self.terms.append((first_site, np.asarray(op, dtype=float)))
        self._csr = None

    def to_csr(self) -> sp.csr_matrix:
        if self._csr is None:
            n, N = self.n, self.N
            mat = self.constant * sp.identity(self.dim, format="csr")
            for first, op in self.terms:
                k = int(round(np.log(op.shape[0]) / np.log(n)))
                left = sp.identity(n ** (first - 1), format="csr")
                right = sp.identity(n ** (N - first - k + 1), format="csr")
                mat = mat + sp.kron(sp.kron(left, sp.csr_matrix(op)), right, format="csr")
            mat.eliminate_zeros()
            self._csr = mat.tocsr()
        return self._csr

    def toarray(self) -> np.ndarray:
        return self.to_csr().toarray()

    def triples(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        coo = self.to_csr().tocoo()
        return coo.row, coo.col, coo.data

    def matvec(self, v: np.ndarray) -> np.ndarray:
        if self.dim <= MATRIX_FREE_DIM:
            return self.to_csr() @ v
        n, N = self.n, self.N
        out = self.constant * v
        for first, op in self.terms:
            k = int(round(np.log(op.shape[0]) / np.log(n)))
            psi = v.reshape(n ** (first - 1), n**k, n ** (N - first - k + 1))
            out = out + np.einsum("ab,ibj->iaj", op, psi, optimize=True).reshape(-1)
        return out

    __matmul__ = matvec

    def is_symmetric(self, tol: float = 1e-14) -> bool:
        if any(np.max(np.abs(op - op.T)) > tol for _, op in self.terms):
            return False
        return True


def build_h_su2(N: int, params: BoundaryParamsSU2) -> SparseOperator:
    """XXX chain with a z field on site 1 and a tilted field on site N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    p, q, xi = params.p, params.q, params.xi
    H = SparseOperator(N=N, n=2, constant=float(N))
    bond = 2.0 * permutation(2) - np.eye(4)  # sigma_j . sigma_{j+1}
    for j in range(1, N):
        H.add(j, bond)
    H.add(1, SIGMA_Z / p)
    H.add(N, (SIGMA_Z + xi * SIGMA_X) / q)
    return H


def build_h_su3(N: int, params: BoundaryParamsSU3) -> SparseOperator:
    if N < 1:
        raise ValueError("N must be >= 1")
    h, hb = params.h, params.hbar
    H = SparseOperator(N=N, n=3, constant=2.0 / 3.0 - h)
    bond = 2.0 * permutation(3)
    for j in range(1, N):
        H.add(j, bond)
    right = weyl(3, 1, 3) + weyl(3, 2, 2) + weyl(3, 3, 1)
    H.add(N, 2.0 * hb / (2.0 + hb) * right)
    H.add(1, 2.0 * h * weyl(3, 1, 1))
    return H


def _start_vector(dim: int, seed: int = 2024) -> np.ndarray:
    # seeded Gaussian rather than all-ones: the uniform vector is invariant under
    # site and colour permutations and can miss ground states in other symmetry sectors
    v = np.random.default_rng(seed).standard_normal(dim)
    return v / np.linalg.norm(v)


def lanczos(op, tol: float = 1e-10, max_steps: int | None = None,
            max_basis: int = 400, v0: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of a symmetric operator by Lanczos with full reorthogonalization.

    ``op`` needs ``shape`` and ``@``.  Converged when the true Ritz residual
    ``||H x - theta x||`` drops below ``tol``.  When the basis reaches
    ``max_basis`` vectors the iteration restarts from the current Ritz vector.
    """
    dim = op.shape[0]
    if max_steps is None:
        max_steps = 5 * dim
    v = _start_vector(dim) if v0 is None else np.asarray(v0, dtype=float) / np.linalg.norm(v0)
    rng = np.random.default_rng(12345)
    size = min(dim, max_basis)
    total = 0
    while total < max_steps:
        V = np.empty((size, dim))
        alpha = np.zeros(size)
        beta = np.zeros(size)
        V[0] = v
        m = 0
        theta, x = None, None
        for m in range(size):
            w = op @ V[m]
            total += 1
            alpha[m] = V[m] @ w
            w = w - alpha[m] * V[m]
            if m > 0:
                w = w - beta[m - 1] * V[m - 1]
            # two passes of classical Gram-Schmidt against the whole basis
            for _ in range(2):
                w = w - V[: m + 1].T @ (V[: m + 1] @ w)
            b = np.linalg.norm(w)
            evals, evecs = eigh_tridiagonal(alpha[: m + 1], beta[:m], select="i", select_range=(0, 0))
            theta, s = evals[0], evecs[:, 0]
            est = abs(b * s[-1])
            breakdown = b < 1e-12 * max(1.0, abs(theta))
            if est < tol or breakdown or m == size - 1 or total >= max_steps:
                x = V[: m + 1].T @ s
                x /= np.linalg.norm(x)
                res = np.linalg.norm(op @ x - theta * x)
                if res < tol:
                    return float(theta), x
                if breakdown and m + 1 < size:
                    # invariant subspace without convergence: continue with a fresh direction
                    w = rng.standard_normal(dim)
                    for _ in range(2):
                        w = w - V[: m + 1].T @ (V[: m + 1] @ w)
                    b = np.linalg.norm(w)
                    beta[m] = 0.0
                    V[m + 1] = w / b
                    continue
                if m == size - 1 or total >= max_steps:
                    break
            beta[m] = b
            if m + 1 < size:
                V[m + 1] = w / b
        log.debug("lanczos restart after %d matvecs (theta=%.16g)", total, theta)
        v = x
    raise LanczosError(f"Lanczos did not converge within {max_steps} steps")


def ground_energy(op, tol: float = 1e-10) -> float:
    """Lowest eigenvalue of ``op`` (a SparseOperator or anything with shape and @)."""
    if op.shape[0] < 1:
        raise ValueError("empty operator")
    return lanczos(op, tol=tol)[0]

"""R-matrix, K-matrices and tensor embeddings for the su(n) open chains.

All matrices are dense real ``numpy`` arrays.  Site indices are 1-based to
match the physics notation (site 1 is the left end of the chain).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

ETA = 1.0


def permutation(n: int) -> np.ndarray:
    """Swap operator P = sum_{mu,nu} E^{mu nu} (x) E^{nu mu} on C^n (x) C^n."""
    if n < 1:
        raise ValueError(f"rank must be positive, got {n}")
    p = np.zeros((n * n, n * n))
    for a in range(n):
        for b in range(n):
            p[b * n + a, a * n + b] = 1.0
    return p


def weyl(n: int, mu: int, nu: int) -> np.ndarray:
    """Single-entry matrix E^{mu nu} = |mu><nu| (1-based indices)."""
    if not (1 <= mu <= n and 1 <= nu <= n):
        raise IndexError(f"Weyl indices ({mu}, {nu}) out of range for n={n}")
    e = np.zeros((n, n))
    e[mu - 1, nu - 1] = 1.0
    return e


def r_matrix(u: float, n: int = 2, eta: float = ETA) -> np.ndarray:
    """R(u) = u + eta P acting on C^n (x) C^n."""
    if eta != ETA:
        raise ValueError("only eta = 1 is supported")
    return u * np.eye(n * n) + eta * permutation(n)


def swap(op: np.ndarray, n: int) -> np.ndarray:
    """Conjugate a two-site operator by P, e.g. R_12 -> R_21."""
    p = permutation(n)
    return p @ op @ p


def partial_transpose(op: np.ndarray, n: int, space: int = 1) -> np.ndarray:
    """Transpose a two-site operator in the first (``space=1``) or second factor."""
    t = op.reshape(n, n, n, n)  # (row1, row2, col1, col2)
    if space == 1:
        t = t.transpose(2, 1, 0, 3)
    elif space == 2:
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError("space must be 1 or 2")
    return t.reshape(n * n, n * n)


def k_minus_su2(u: float, p: float) -> np.ndarray:
    return np.array([[p + u, 0.0], [0.0, p - u]])


def k_plus_su2(u: float, q: float, xi: float) -> np.ndarray:
    return np.array([[q + u + 1.0, xi * (u + 1.0)], [xi * (u + 1.0), q - u - 1.0]])


def k_minus_su3(u: float, h: float) -> np.ndarray:
    if h == 0:
        raise ZeroDivisionError("h must be nonzero")
    return np.eye(3) / h + u * np.diag([1.0, -1.0, -1.0])


def k_plus_su3(u: float, hbar: float) -> np.ndarray:
    if hbar == 0:
        raise ZeroDivisionError("hbar must be nonzero")
    antidiag = -np.fliplr(np.eye(3))
    return np.eye(3) / hbar - (u + 1.5) * antidiag


def embed(op: np.ndarray, sites: int | Sequence[int], N: int, n: int) -> np.ndarray:
    """Embed ``op`` acting on ``sites`` into the N-fold tensor product.

    ``sites`` may be a single site or any ordered tuple of distinct sites; the
    k-th tensor factor of ``op`` is placed on ``sites[k]``.
    """
    if isinstance(sites, (int, np.integer)):
        sites = (int(sites),)
    sites = tuple(int(s) for s in sites)
    k = len(sites)
    if len(set(sites)) != k or any(s < 1 or s > N for s in sites):
        raise ValueError(f"invalid sites {sites} for N={N}")
    op = np.asarray(op)
    if op.shape != (n**k, n**k):
        raise ValueError(f"operator shape {op.shape} does not match {k} sites of dim {n}")

    rest = [s for s in range(1, N + 1) if s not in sites]
    full = np.kron(op, np.eye(n ** len(rest)))
    # factor order of `full` is sites + rest; move each factor to its site
    order = list(sites) + rest
    axes = [order.index(s) for s in range(1, N + 1)]
    t = full.reshape([n] * (2 * N))
    t = t.transpose(axes + [N + a for a in axes])
    return t.reshape(n**N, n**N)

"""Residuals of the Yang-Baxter, unitarity, fusion and reflection identities.

Every check accepts an ``r`` callable ``r(u, n) -> matrix`` so that a deliberately
broken R-matrix can be passed in as a negative control.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import algebra
from .algebra import embed, partial_transpose, permutation, swap

RFactory = Callable[[float, int], np.ndarray]
IDENTITIES = ("QYBE", "unitarity", "crossing-unitarity", "fusion", "RE", "dual RE")


def _default_r(u: float, n: int) -> np.ndarray:
    return algebra.r_matrix(u, n)


def qybe_residual(u1: float, u2: float, u3: float, n: int, r: RFactory = _default_r) -> float:
    r12 = embed(r(u1 - u2, n), (1, 2), 3, n)
    r13 = embed(r(u1 - u3, n), (1, 3), 3, n)
    r23 = embed(r(u2 - u3, n), (2, 3), 3, n)
    return float(np.max(np.abs(r12 @ r13 @ r23 - r23 @ r13 @ r12)))


def unitarity_residual(u: float, n: int, r: RFactory = _default_r) -> float:
    lhs = r(u, n) @ swap(r(-u, n), n)
    return float(np.max(np.abs(lhs + (u + 1) * (u - 1) * np.eye(n * n))))


def crossing_unitarity_residual(u: float, n: int, r: RFactory = _default_r) -> float:
    lhs = partial_transpose(r(u, n), n, 1) @ partial_transpose(swap(r(-u - n, n), n), n, 1)
    return float(np.max(np.abs(lhs + u * (u + n) * np.eye(n * n))))


def fusion_residual(n: int, r: RFactory = _default_r) -> float:
    P = permutation(n)
    one = np.eye(n * n)
    minus = np.max(np.abs(r(-1.0, n) + (one - P)))
    plus = np.max(np.abs(r(1.0, n) - (one + P)))
    return float(max(minus, plus))


def _lift(k: np.ndarray, space: int, n: int) -> np.ndarray:
    return embed(k, space, 2, n)


def reflection_residual(kminus: Callable[[float], np.ndarray], u1: float, u2: float, n: int,
                        r: RFactory = _default_r) -> float:
    k1, k2 = _lift(kminus(u1), 1, n), _lift(kminus(u2), 2, n)
    lhs = r(u1 - u2, n) @ k1 @ swap(r(u1 + u2, n), n) @ k2
    rhs = k2 @ r(u1 + u2, n) @ k1 @ swap(r(u1 - u2, n), n)
    return float(np.max(np.abs(lhs - rhs)))


def dual_reflection_residual(kplus: Callable[[float], np.ndarray], u1: float, u2: float, n: int,
                             r: RFactory = _default_r) -> float:
    k1, k2 = _lift(kplus(u1), 1, n), _lift(kplus(u2), 2, n)
    lhs = r(u2 - u1, n) @ k1 @ swap(r(-u1 - u2 - n, n), n) @ k2
    rhs = k2 @ r(-u1 - u2 - n, n) @ k1 @ swap(r(u2 - u1, n), n)
    return float(np.max(np.abs(lhs - rhs)))


def _k_pairs(n: int, rng: np.random.Generator):
    """K-matrices of the rank-n model with random boundary parameters."""
    if n == 2:
        p, q, xi = rng.uniform(0.5, 5.0, 3)
        return (lambda u: algebra.k_minus_su2(u, p)), (lambda u: algebra.k_plus_su2(u, q, xi))
    if n == 3:
        h = rng.uniform(0.2, 2.0)
        hb = -rng.uniform(0.05, 0.9)
        return (lambda u: algebra.k_minus_su3(u, h)), (lambda u: algebra.k_plus_su3(u, hb))
    raise ValueError("K-matrices exist for n = 2 and n = 3 only")


def verify_all(ranks=(2, 3), samples: int = 100, seed: int = 7,
               r: RFactory = _default_r) -> dict[str, float]:
    """Largest residual of each identity class over random spectral parameters."""
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(IDENTITIES, 0.0)

    def record(name, value):
        worst[name] = max(worst[name], value)

    for n in ranks:
        record("fusion", fusion_residual(n, r))
        for _ in range(samples):
            u1, u2, u3 = rng.uniform(-3.0, 3.0, 3)
            record("QYBE", qybe_residual(u1, u2, u3, n, r))
            record("unitarity", unitarity_residual(u1, n, r))
            record("crossing-unitarity", crossing_unitarity_residual(u1, n, r))
            km, kp = _k_pairs(n, rng)
            record("RE", reflection_residual(km, u1, u2, n, r))
            record("dual RE", dual_reflection_residual(kp, u1, u2, n, r))
    return worst

import numpy as np
import pytest

from openchain import bethe, ed, transfer
from openchain.params import BoundaryParamsSU2, BoundaryParamsSU3
from openchain.transfer import (TQDataSU2, TQDataSU3, double_row_transfer, hamiltonian_from_transfer,
                                k_factor_su3, tq_lambda_su2, tq_lambda_su3, x_term_su3, z_term_su3)

SU2 = BoundaryParamsSU2(8.0, 4.0, 0.625)
SU3 = BoundaryParamsSU3(0.5, -1 / 13)
SAMPLE_U = (0.13, 0.37, 0.71, 1.09, 1.53)


def rel_commutator(a, b):
    return np.max(np.abs(a @ b - b @ a)) / (np.max(np.abs(a)) * np.max(np.abs(b)))


def test_transfer_matrices_commute_su2():
    a, b = double_row_transfer(0.3, SU2, 3), double_row_transfer(0.9, SU2, 3)
    assert np.max(np.abs(a @ b - b @ a)) < 1e-10


def test_transfer_matrices_commute_random_pairs():
    rng = np.random.default_rng(5)
    for params, N in [(SU2, 3), (SU3, 2)]:
        for u, v in rng.uniform(-1.5, 1.5, size=(10, 2)):
            a, b = double_row_transfer(u, params, N), double_row_transfer(v, params, N)
            assert rel_commutator(a, b) < 1e-14


def test_transfer_at_zero_is_scalar():
    t0 = double_row_transfer(0.0, BoundaryParamsSU2(8.0, 4.0, 25 / 8), 2)
    np.testing.assert_allclose(t0, 2 * 8 * 4 * np.eye(4), atol=1e-12)


@pytest.mark.parametrize("params,N", [(SU2, 3), (SU3, 2)])
def test_transfer_is_symmetric(params, N):
    for u in (-0.7, 0.2, 1.4):
        t = double_row_transfer(u, params, N)
        np.testing.assert_allclose(t, t.T, atol=1e-12 * np.max(np.abs(t)))


@pytest.mark.parametrize("params,N", [(SU2, 9), (SU3, 6)])
def test_transfer_size_limit(params, N):
    with pytest.raises(ValueError):
        double_row_transfer(0.1, params, N)


@pytest.mark.parametrize("params,build", [(SU2, ed.build_h_su2), (SU3, ed.build_h_su3)])
def test_hamiltonian_identity_two_sites(params, build):
    H = hamiltonian_from_transfer(params, 2)
    assert np.max(np.abs(H - build(2, params).toarray())) < 1e-7
    assert np.all(np.isreal(np.linalg.eigvals(H)))


def test_singular_transfer_detected():
    degenerate = object.__new__(BoundaryParamsSU2)
    for name, value in (("p", 0.0), ("q", 4.0), ("xi", 0.0)):
        object.__setattr__(degenerate, name, value)
    with pytest.raises(np.linalg.LinAlgError):
        hamiltonian_from_transfer(degenerate, 2)


def test_tq_crossing_symmetry():
    rng = np.random.default_rng(11)
    for _ in range(5):
        data = TQDataSU2.from_mu(3, SU2, rng.uniform(0.05, 2.0, 2))
        for u in rng.uniform(-2.0, 2.0, 4):
            for inhom in (True, False):
                a = tq_lambda_su2(u, data, inhom)
                b = tq_lambda_su2(-u - 1.0, data, inhom)
                assert abs(a - b) < 1e-10 * max(1.0, abs(a))


def test_tq_value_at_zero():
    data = TQDataSU2.from_mu(2, SU2, [0.3])
    assert tq_lambda_su2(0.0, data) == pytest.approx(2 * SU2.p * SU2.q, rel=1e-12)


def test_homogeneous_tq_matches_ground_branch():
    params = BoundaryParamsSU2(8.0, 4.0, 0.0)
    N = 3
    state = bethe.solve_log_baes_su2(N, params)
    data = TQDataSU2.from_mu(N, params, state.mu)
    w, v = np.linalg.eigh(ed.build_h_su2(N, params).toarray())
    ground = v[:, 0]
    for u in SAMPLE_U:
        branch = ground @ double_row_transfer(u, params, N) @ ground
        assert abs(tq_lambda_su2(u, data, include_inhomogeneous=False) - branch) < 1e-8 * max(1.0, abs(branch))


def test_inhomogeneous_coefficient_vanishes_without_tilt():
    assert transfer.inhomogeneous_coefficient(0.0) == 0.0
    assert transfer.inhomogeneous_coefficient(0.75) == pytest.approx(2 * (1 - 1.25))


@pytest.mark.parametrize("N", [1, 2])
def test_inhomogeneous_baes_reproduce_spectrum(N):
    params = BoundaryParamsSU2(8.0, 4.0, 25 / 8)
    sols = transfer.solve_inhomogeneous_baes_su2(N, params)
    spectrum = np.linalg.eigvalsh(ed.build_h_su2(N, params).toarray())
    for data in sols:
        assert np.max(np.abs(transfer.bae_residuals_su2(data.lambdas, N, params))) < 1e-10
        E = transfer.energy_from_lambdas_su2(data.lambdas, N, params)
        assert np.min(np.abs(spectrum - E)) < 1e-8


def test_k_factors_two_and_three_coincide():
    for u in np.linspace(-2, 2, 9):
        assert k_factor_su3(2, u, SU3) == k_factor_su3(3, u, SU3)


def test_x_term_vanishes_at_zero_and_minus_one():
    data = TQDataSU3(2, SU3, np.array([0.3 + 0.2j, -0.7]), np.zeros(0))
    assert x_term_su3(0.0, data) == 0.0
    assert x_term_su3(-1.0, data) == 0.0
    assert abs(x_term_su3(0.6, data)) > 0


def _z_direct(m, u, N, params, roots):
    """Product-form z_m with Q^(r) expanded over its 2 L_r zeros."""
    def Q(r, x):
        if r == 0:
            return x ** (2 * N)
        if r == 3:
            return 1.0
        out = 1.0
        for lam in roots[r]:
            for zero in (lam, -lam - r):
                out *= x - zero
        return out

    h, hb = params.h, params.hbar
    K = (1 / hb + 0.5 - u) * (1 / h + u) if m == 1 else (1 / hb + 1.5 + u) * (1 / h - u - 1)
    pre = u * (u + 1.5) * K * Q(0, u) / ((u + (m - 1) / 2) * (u + m / 2))
    return pre * Q(m - 1, u + 1) * Q(m, u - 1) / (Q(m - 1, u) * Q(m, u))


def test_z_terms_against_product_form():
    roots = {1: [0.2 + 0.4j, -1.1, 0.35j], 2: [0.6 - 0.3j]}
    data = TQDataSU3(2, SU3, np.array(roots[1]), np.array(roots[2]))
    for m in (1, 2, 3):
        a = complex(z_term_su3(m, 1.25, data))
        b = complex(_z_direct(m, 1.25, 2, SU3, roots))
        assert abs(a - b) < 1e-12 * abs(b)


def test_tq_su3_rejects_pole():
    data = TQDataSU3(2, SU3, np.array([0.4]), np.zeros(0))
    with pytest.raises(ZeroDivisionError):
        tq_lambda_su3(0.4, data)

import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from gammakit.classify import (
    ando_factor,
    ando_verify,
    certify_gamma_contraction,
    gamma_unitary_factors,
    is_gamma_isometry,
    is_gamma_unitary,
    joint_diagonalize,
    rho_grid_scan,
    structure_checks,
)
from gammakit.errors import NotGammaUnitary, OmegaExceedsOne
from gammakit.instances import gamma_unitary_instance
from gammakit.numerics import ToleranceConfig, opnorm
from gammakit.pairs import OperatorPair

Z2 = np.zeros((2, 2))
I2 = np.eye(2)


def pair(S, P):
    return OperatorPair.from_matrices(S, P)


def test_certified_gamma_unitary():
    rep = certify_gamma_contraction(pair(2 * I2, I2))
    assert rep.is_gamma_contraction.certified
    assert rep.is_gamma_unitary and rep.is_gamma_isometry


def test_refuted_scaled_identity():
    rep = certify_gamma_contraction(pair(3 * I2, Z2))
    st = rep.is_gamma_contraction
    assert st.refuted
    assert st.alpha == 1
    assert rep.omega_A == pytest.approx(3)


def test_p_zero_certified_iff_numerical_radius():
    S0 = np.array([[0.3, 1.2], [0, -0.1j]])
    rep = certify_gamma_contraction(pair(S0, Z2))
    assert rep.is_gamma_contraction.certified
    assert rho_grid_scan(pair(S0, Z2)).passed
    assert np.allclose(rep.fundamental.full, S0)


def test_rho_grid_scan_order():
    # first violation is found on the outer circle at angle 0
    scan = rho_grid_scan(pair(3 * I2, Z2), ToleranceConfig(grid_theta=8, grid_radius=4))
    assert not scan.passed and scan.alpha == 1 and scan.n_samples == 1


@pytest.mark.parametrize(
    "S, P, expected",
    [(2 * I2, I2, True), (Z2, 0.5 * I2, False), (np.diag([1.0, -0.5]), I2, True)],
)
def test_is_gamma_unitary_examples(S, P, expected):
    assert bool(is_gamma_unitary(pair(S, P))) is expected


def test_self_adjoint_with_identity():
    # (S, I) with S = S* of spectral radius at most 2
    U = unitary_group.rvs(3, random_state=0)
    S = U + U.conj().T
    assert is_gamma_unitary(pair(S, np.eye(3)))
    checks = {c.name: c for c in structure_checks(pair(S, np.eye(3)))}
    assert checks["identity_selfadjoint"].applicable and checks["identity_selfadjoint"].passed


def test_gamma_isometry_examples():
    assert not is_gamma_isometry(pair(Z2, Z2))
    pu, _, _ = gamma_unitary_instance(1, 3)
    assert is_gamma_isometry(pu)


@pytest.mark.parametrize("r", [0.0, 0.3, 0.8, 1.0])
def test_gamma_isometry_scaling(r):
    # (rS, P) stays a Gamma-isometry for 0 <= r <= 1
    pu, _, _ = gamma_unitary_instance(7, 4)
    res = is_gamma_isometry(pair(r * pu.S, pu.P), n_beta=90)
    assert res
    if "beta_grid_defect" in res.diagnostics:
        assert res.diagnostics["beta_grid_defect"] <= 1e-9


def test_gamma_unitary_factors_diag():
    U1, U2 = gamma_unitary_factors(pair(np.diag([2, 1j - 1]), np.diag([1, -1j])))
    assert np.allclose(U1, np.diag([1, 1j]), atol=1e-12)
    assert np.allclose(U2, np.diag([1, -1]), atol=1e-12)


@pytest.mark.parametrize(
    "S, P, U1, U2",
    [(Z2, -I2, I2, -I2), (2 * I2, I2, I2, I2)],
)
def test_gamma_unitary_factors_examples(S, P, U1, U2):
    got1, got2 = gamma_unitary_factors(pair(S, P))
    assert np.allclose(got1, U1, atol=1e-12) and np.allclose(got2, U2, atol=1e-12)


def test_gamma_unitary_factors_rejects():
    with pytest.raises(NotGammaUnitary):
        gamma_unitary_factors(pair(Z2, 0.5 * I2))


def test_joint_diagonalize_with_clusters():
    Q = unitary_group.rvs(4, random_state=3)
    s = np.array([1, 1, 0.5j, 0.5j])
    p = np.array([0.2, -0.2, 0.3, 0.3])
    S = (Q * s) @ Q.conj().T
    P = (Q * p) @ Q.conj().T
    Z, ds, dp = joint_diagonalize(S, P)
    assert opnorm(Z.conj().T @ Z - np.eye(4)) < 1e-12
    assert np.allclose(sorted(zip(ds.round(10), dp.round(10)), key=repr),
                       sorted(zip(s, p), key=repr))


@pytest.mark.parametrize(
    "X, C, expected",
    [
        (np.array([[0, 2], [0, 0]]), np.array([[0, 1], [0, 0]]), True),
        (Z2, Z2, True),
        (I2, I2, False),
    ],
)
def test_ando_verify_examples(X, C, expected):
    assert bool(ando_verify(X, C)) is expected


def test_ando_factor_identity():
    # scalar equation 2 sqrt(1 - c^2) c = 1 has root c = 1/sqrt(2)
    c = 1 / math.sqrt(2)
    assert abs(2 * math.sqrt(1 - c * c) * c - 1) < 1e-15
    res = ando_factor(I2)
    assert res.verified
    assert ando_verify(I2, res.C)


@pytest.mark.parametrize(
    "X", [np.array([[0, 2], [0, 0]]), Z2, np.diag([0.5, -0.3j]), 0.4 * unitary_group.rvs(3, random_state=1)]
)
def test_ando_factor_verified(X):
    res = ando_factor(X)
    assert res.verified
    assert ando_verify(X, res.C)


def test_ando_factor_rejects_large_omega():
    with pytest.raises(OmegaExceedsOne):
        ando_factor(1.5 * I2)


def test_structure_checks_projection_and_partial_isometry():
    checks = {c.name: c for c in structure_checks(pair(np.diag([0.5, -0.7]), np.diag([1.0, 0.0])))}
    assert checks["projection_block_diagonal"].applicable
    assert checks["projection_block_diagonal"].passed
    checks = {c.name: c for c in structure_checks(pair(np.diag([0.5, 0.2]), Z2))}
    assert checks["partial_isometry_defect_range"].applicable
    assert checks["partial_isometry_defect_range"].passed
    assert not checks["identity_selfadjoint"].applicable


def test_report_json():
    doc = certify_gamma_contraction(pair(3 * I2, Z2)).to_dict()
    assert doc["is_gamma_contraction"]["kind"] == "Refuted"
    assert doc["is_gamma_contraction"]["alpha"] == [1.0, 0.0]

import math

import numpy as np
import pytest
from conftest import oracle_defect, random_contraction

from gammakit.errors import MajorizationFailed, NotAContraction, NotPositiveOnCircle
from gammakit.fundamental import (
    bauer_dense,
    certify_theorem_4_4,
    douglas_factor,
    fejer_riesz_degree1,
    solve_fundamental,
    solve_fundamental_adjoint,
    solve_fundamental_via_fejer_riesz,
)
from gammakit.instances import gamma_unitary_instance, pure_p_instance
from gammakit.numerics import opnorm
from gammakit.pairs import OperatorPair


def scalar(s, p):
    return OperatorPair.from_matrices([[s]], [[p]])


def test_p_zero_gives_s():
    S = np.array([[0.2, 0.5j], [0.1, -0.3]])
    sol = solve_fundamental(OperatorPair.from_matrices(S, np.zeros((2, 2))))
    assert np.allclose(sol.full, S)
    assert sol.unique


def test_identity_p_gives_empty_operator():
    S = np.array([[1.0, 0.5], [0.5, -0.2]])
    sol = solve_fundamental(OperatorPair.from_matrices(S, np.eye(2)))
    assert sol.A.shape == (0, 0)
    assert sol.residual == 0.0


def test_adjoint_examples():
    S = np.array([[0.2, 0.5j], [0.1, -0.3]])
    B = solve_fundamental_adjoint(OperatorPair.from_matrices(S, np.zeros((2, 2))))
    assert np.allclose(B.full, S.conj().T)
    pair, _, _ = gamma_unitary_instance(3, 4)
    B = solve_fundamental_adjoint(pair)
    assert B.A.shape == (0, 0) and B.residual <= 1e-13


@pytest.mark.parametrize("z1, z2", [(0.3, -0.5j), (0.9 + 0.1j, 0.2), (-0.4, -0.4)])
def test_scalar_formulas(z1, z2):
    s, p = z1 + z2, z1 * z2
    sol = solve_fundamental(scalar(s, p))
    assert sol.A[0, 0] == pytest.approx((s - s.conjugate() * p) / (1 - abs(p) ** 2))
    B = solve_fundamental_adjoint(scalar(s, p))
    expected = (s.conjugate() - s * p.conjugate()) / (1 - abs(p) ** 2)
    assert B.A[0, 0] == pytest.approx(expected)


def test_closed_form_for_small_p():
    pair = pure_p_instance(4, 5, norm_cap=0.8)
    Dinv = np.linalg.inv(oracle_defect(pair.P))
    expected = Dinv @ (pair.S - pair.S.conj().T @ pair.P) @ Dinv
    assert opnorm(solve_fundamental(pair).full - expected) <= 1e-10


def test_douglas_examples():
    rng = np.random.default_rng(0)
    D = rng.standard_normal((3, 3))
    D[:, 2] = 0
    Q = douglas_factor(D, D)
    # projection onto Ran D*
    assert opnorm(Q @ Q - Q) < 1e-12 and opnorm(Q - Q.conj().T) < 1e-12
    assert opnorm(D @ Q - D) < 1e-12
    assert np.allclose(douglas_factor(np.zeros((3, 2)), D), 0)


def test_douglas_round_trip():
    rng = np.random.default_rng(1)
    D = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    Q0 = random_contraction(rng, 4, 0.9)
    X = D @ Q0
    Q = douglas_factor(X, D)
    assert opnorm(D @ Q - X) <= 1e-10 * opnorm(X)
    assert opnorm(Q) <= 1 + 1e-10
    with pytest.raises(MajorizationFailed):
        douglas_factor(2 * D, D)


def test_fejer_riesz_scalar():
    # 1 - cos(t) = |x - z y|^2 with |x| = |y| = 1/sqrt(2)
    fac = fejer_riesz_degree1(np.array([[1.0]]), np.array([[-1.0]]))
    x, y = fac.X[0, 0], fac.Y[0, 0]
    assert abs(abs(x) - 1 / math.sqrt(2)) < 1e-6
    assert abs(abs(y) - 1 / math.sqrt(2)) < 1e-6
    assert abs(2 * y * x.conjugate() - 1) < 1e-6


def test_fejer_riesz_identity():
    fac = fejer_riesz_degree1(np.eye(3), np.zeros((3, 3)))
    assert opnorm(fac.X @ fac.X.conj().T - np.eye(3)) < 1e-12
    assert opnorm(fac.Y) < 1e-12


def test_fejer_riesz_rejects_negative_symbol():
    with pytest.raises(NotPositiveOnCircle):
        fejer_riesz_degree1(np.eye(2), 3 * np.eye(2))


def test_fejer_riesz_matches_dense_bauer():
    rng = np.random.default_rng(2)
    n = 3
    H1 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H0 = 2 * opnorm(H1) * np.eye(n) + 0.1 * np.eye(n)
    fac = fejer_riesz_degree1(H0, H1)
    X, Y = bauer_dense(H0, H1, 60)
    assert opnorm(fac.X @ fac.X.conj().T - X @ X.conj().T) < 1e-8
    for t in np.linspace(0, 2 * np.pi, 13):
        z = np.exp(1j * t)
        sym = H0 + 0.5 * (z * H1 + np.conj(z) * H1.conj().T)
        F = fac.X - z * fac.Y
        assert opnorm(F @ F.conj().T - sym) < 1e-9


@pytest.mark.parametrize("seed", range(6))
def test_routes_agree(seed):
    pair = pure_p_instance(seed, 2 + seed, norm_cap=0.95)
    a = solve_fundamental(pair)
    b = solve_fundamental_via_fejer_riesz(pair)
    assert opnorm(a.A - b.A) <= 1e-9
    assert b.residual <= 1e-10


def test_certify_examples():
    ok = certify_theorem_4_4(OperatorPair.from_matrices(2 * np.eye(2), np.eye(2)))
    assert ok.status == "GammaContraction"
    bad = certify_theorem_4_4(OperatorPair.from_matrices(3 * np.eye(2), np.zeros((2, 2))))
    assert bad.status == "Not"
    assert bad.reason.startswith("omega: omega(A) = 3")
    assert bad.failed == ("omega", "spectral_radius")


def test_certify_non_contraction():
    res = certify_theorem_4_4(OperatorPair.from_matrices(np.zeros((2, 2)), 1.1 * np.eye(2)))
    assert not res and res.failed == ("contraction",)


def test_certify_p_zero_reduces_to_numerical_radius():
    S = np.array([[0, 2], [0, 0]])
    assert certify_theorem_4_4(OperatorPair.from_matrices(S, np.zeros((2, 2))))
    assert not certify_theorem_4_4(OperatorPair.from_matrices(1.1 * S, np.zeros((2, 2))))


def test_fejer_riesz_route_raises_for_non_contraction():
    with pytest.raises(NotAContraction):
        solve_fundamental_via_fejer_riesz(OperatorPair.from_matrices(np.zeros((1, 1)), [[2.0]]))

import cmath
import json

import numpy as np
from conftest import oracle_roots
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gammakit.fundamental import certify_theorem_4_4, solve_fundamental
from gammakit.geometry import Verdict, membership, symmetrize
from gammakit.instances import random_commuting_contractions, symmetrization_instance
from gammakit.io import instance_to_pair, pair_to_instance
from gammakit.kernels import KernelSpec, eval_kernel
from gammakit.numerics import defect_operator, numerical_radius, opnorm, spectral_radius
from gammakit.pairs import OperatorPair

SETTINGS = settings(max_examples=60, deadline=None)

radius = st.floats(0.0, 1.0, allow_nan=False)
angle = st.floats(0.0, 2 * np.pi, allow_nan=False)
disc_point = st.builds(lambda r, t: r * cmath.exp(1j * t), radius, angle)
open_disc_point = st.builds(lambda r, t: r * cmath.exp(1j * t), st.floats(0.0, 0.9), angle)
finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


@st.composite
def complex_matrices(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    re = draw(arrays(float, (n, n), elements=finite))
    im = draw(arrays(float, (n, n), elements=finite))
    return re + 1j * im


@SETTINGS
@given(disc_point, disc_point)
def test_symmetrized_bidisc_is_inside(z1, z2):
    rep = membership(symmetrize(z1, z2), sampled=False)
    assert rep.in_gamma
    for name in ("ii", "iii", "v"):
        assert rep.criterion(name).passed


@SETTINGS
@given(disc_point, st.floats(1.001, 3.0), angle)
def test_root_outside_disc_is_outside(z1, r, t):
    pt = symmetrize(z1, r * cmath.exp(1j * t))
    rep = membership(pt, sampled=False)
    assert rep.verdict is Verdict.OUTSIDE
    assert not rep.criterion("ii").passed
    assert max(abs(x) for x in oracle_roots(pt.s, pt.p)) > 1


@SETTINGS
@given(complex_matrices(), st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_numerical_radius_bounds(X, alpha):
    w = numerical_radius(X).value
    nrm = opnorm(X)
    slack = 1e-9 * max(1.0, nrm)
    assert nrm / 2 - slack <= w <= nrm + slack
    assert spectral_radius(X) <= w + slack
    assert abs(numerical_radius(alpha * X).value - abs(alpha) * w) <= 1e-8 * max(1.0, abs(alpha) * nrm)


@SETTINGS
@given(complex_matrices())
def test_defect_identities(X):
    nrm = opnorm(X)
    assume(nrm > 0)
    P = X / nrm * 0.999
    D = defect_operator(P)
    Ds = defect_operator(P.conj().T)
    n = P.shape[0]
    assert opnorm(D @ D - (np.eye(n) - P.conj().T @ P)) <= 1e-12
    assert opnorm(P @ D - Ds @ P) <= 1e-7
    assert opnorm(D - D.conj().T) <= 1e-14


@st.composite
def gamma_pairs(draw):
    seed = draw(st.integers(0, 2**32))
    dim = draw(st.integers(1, 6))
    strategy = draw(st.sampled_from(["poly", "normal"]))
    T1, T2 = random_commuting_contractions(seed, dim, strategy)
    return symmetrization_instance(T1, T2)


@SETTINGS
@given(gamma_pairs(), open_disc_point)
def test_scaling_preserves_certificate(pair, alpha):
    assert certify_theorem_4_4(pair)
    assert certify_theorem_4_4(pair.scaled(alpha))
    assert certify_theorem_4_4(pair.adjoint())


@SETTINGS
@given(gamma_pairs())
def test_fundamental_solution_identities(pair):
    sol = solve_fundamental(pair)
    assert sol.residual <= 1e-10
    assert sol.omega <= 1 + 1e-9
    zero = solve_fundamental(OperatorPair.from_matrices(np.zeros_like(pair.S), pair.P))
    assert opnorm(zero.A) == 0


@SETTINGS
@given(gamma_pairs())
def test_instance_json_round_trip(pair):
    text = json.dumps(pair_to_instance(pair))
    back, _ = instance_to_pair(json.loads(text))
    assert json.dumps(pair_to_instance(back)) == text


kernels = st.sampled_from([KernelSpec("szego"), KernelSpec("bergman", 2),
                           KernelSpec("bergman", 3.5), KernelSpec("symfock", 1.5)])


@SETTINGS
@given(kernels, open_disc_point, open_disc_point, open_disc_point, open_disc_point)
def test_kernel_symmetries(spec, z1, z2, w1, w2):
    assume(abs(z1 - z2) > 1e-3 and abs(w1 - w2) > 1e-3)
    k = eval_kernel(spec, (z1, z2), (w1, w2))
    assert abs(k - np.conj(eval_kernel(spec, (w1, w2), (z1, z2)))) <= 1e-9 * max(1, abs(k))
    assert abs(k - eval_kernel(spec, (z2, z1), (w1, w2))) <= 1e-9 * max(1, abs(k))
    assert eval_kernel(spec, (z1, z2), (z1, z2)).real > 0

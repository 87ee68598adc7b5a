import json

import numpy as np
import pytest

from gammakit.errors import NotInvariant
from gammakit.fundamental import certify_theorem_4_4
from gammakit.geometry import membership, symmetrize
from gammakit.instances import (
    KINDS,
    GenSpec,
    adversarial_instance,
    corpus,
    generate,
    krylov_basis,
    make_rng,
    prng_metadata,
    pure_p_instance,
    random_commuting_contractions,
    scalar_instance,
    symmetrization_instance,
)
from gammakit.io import pair_to_instance
from gammakit.numerics import opnorm


@pytest.mark.parametrize("strategy", ["poly", "normal", "identity-poly"])
@pytest.mark.parametrize("seed", [0, 1, 2**40])
def test_commuting_contractions(strategy, seed):
    T1, T2 = random_commuting_contractions(seed, 5, strategy)
    assert opnorm(T1 @ T2 - T2 @ T1) <= 1e-12
    assert opnorm(T1) <= 1 + 1e-12 and opnorm(T2) <= 1 + 1e-12
    if strategy == "identity-poly":
        assert np.array_equal(T1, T2)


def test_normal_strategy_is_jointly_diagonalizable():
    T1, T2 = random_commuting_contractions(3, 3, "normal")
    assert opnorm(T1 @ T1.conj().T - T1.conj().T @ T1) <= 1e-12
    _, vecs = np.linalg.eig(T1 + np.pi * T2)
    D2 = np.linalg.solve(vecs, T2 @ vecs)
    assert opnorm(D2 - np.diag(np.diag(D2))) <= 1e-10


def test_symmetrization_examples():
    pair = symmetrization_instance(np.zeros((2, 2)), np.zeros((2, 2)))
    assert certify_theorem_4_4(pair)
    z1, z2 = 0.3 + 0.4j, -0.9
    pair = symmetrization_instance([[z1]], [[z2]])
    pt = symmetrize(z1, z2)
    assert pair.S[0, 0] == pt.s and pair.P[0, 0] == pt.p
    assert membership(pt).in_gamma


def test_krylov_subspace_invariant():
    T1, T2 = random_commuting_contractions(5, 6, "normal")
    _, vecs = np.linalg.eig(T1 + np.pi * T2)
    v = vecs[:, 0] + vecs[:, 1]
    Q = krylov_basis(T1 + T2, T1 @ T2, v)
    assert Q.shape[1] == 2
    pair = symmetrization_instance(T1, T2, "krylov", v)
    assert pair.dim == 2 and certify_theorem_4_4(pair)


def test_krylov_rejects_truncated_depth():
    T1, T2 = random_commuting_contractions(6, 6, "poly")
    with pytest.raises(NotInvariant):
        symmetrization_instance(T1, T2, "krylov", np.ones(6), depth=1)


def test_scalar_and_pure_p():
    pair = scalar_instance(4)
    assert membership((pair.S[0, 0], pair.P[0, 0])).in_gamma
    pair = pure_p_instance(0, 1, norm_cap=0.5)
    assert abs(pair.P[0, 0]) <= 0.25 + 1e-15
    pair = pure_p_instance(1, 8, norm_cap=0.9)
    assert opnorm(pair.P) <= 0.9 and certify_theorem_4_4(pair)
    N = 30
    assert opnorm(np.linalg.matrix_power(pair.P.conj().T, N)) <= 0.9 ** N


@pytest.mark.parametrize("mode", ["scaled-s", "inflated-p", "inflated-s"])
def test_adversarial_refuted(mode):
    pair = adversarial_instance(3, 4, mode)
    assert not certify_theorem_4_4(pair)
    if mode == "scaled-s":
        assert certify_theorem_4_4(pair).omega == pytest.approx(2.2)


def test_prng_determinism():
    a = make_rng(7, 1).random(4)
    assert np.array_equal(a, make_rng(7, 1).random(4))
    assert not np.array_equal(a, make_rng(7, 2).random(4))
    assert prng_metadata()["algorithm"] == "Philox4x64-10"


@pytest.mark.parametrize("kind", KINDS)
def test_generate_is_byte_deterministic(kind):
    spec = GenSpec(11, 4, kind)
    docs = [json.dumps(pair_to_instance(*generate(spec))) for _ in range(2)]
    assert docs[0] == docs[1]


def test_corpus_mix():
    items = corpus(1, 12, max_dim=5)
    kinds = {spec.kind for spec, _ in items}
    assert {"symmetrized", "normal", "krylov", "scalar", "pure-p", "finite-section"} <= kinds
    assert all(certify_theorem_4_4(pair) for _, pair in items)

"""Seeded generators of Gamma-contractions and near misses.

All randomness comes from ``numpy.random.Generator(Philox(...))`` keyed by
the seed, so a generator spec reproduces the same matrices bit for bit.  The
algorithm name and numpy version are recorded in every instance's metadata.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.stats

from .errors import NotInvariant
from .fundamental import certify_theorem_4_4
from .numerics import DEFAULT_CONFIG, adjoint, opnorm
from .pairs import OperatorPair

__all__ = [
    "GenSpec",
    "make_rng",
    "prng_metadata",
    "random_commuting_contractions",
    "symmetrization_instance",
    "krylov_basis",
    "adversarial_instance",
    "pure_p_instance",
    "gamma_unitary_instance",
    "scalar_instance",
    "generate",
    "corpus",
    "KINDS",
]

KINDS = (
    "symmetrized",
    "normal",
    "krylov",
    "scalar",
    "finite-section",
    "pure-p",
    "gamma-unitary",
    "adversarial",
)


def make_rng(seed, *stream):
    """Philox generator for ``seed`` and an optional substream path."""
    seq = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(s) for s in stream]])
    return np.random.Generator(np.random.Philox(seq))


def prng_metadata():
    return {"algorithm": "Philox4x64-10", "numpy": np.__version__}


def _disc_samples(rng, n, radius=1.0):
    return radius * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))


def _unitary(rng, n):
    if n == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    return scipy.stats.unitary_group.rvs(n, random_state=rng)


def random_commuting_contractions(seed, dim, strategy=None, norm_range=(0.3, 1.0)):
    """A commuting pair of contractions.

    Strategy ``"poly"`` takes two random polynomials of one random matrix;
    strategy ``"normal"`` conjugates two diagonal contractions by a shared
    random unitary.  Norms are drawn from ``norm_range``.
    """
    dim = int(dim)
    if dim < 1:
        raise ValueError("dim must be positive")
    rng = make_rng(seed, 1)
    if strategy is None:
        strategy = "poly" if rng.random() < 0.5 else "normal"
    lo, hi = norm_range
    r1, r2 = rng.uniform(lo, hi, size=2)
    if strategy == "poly":
        T = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        T /= opnorm(T)
        mats = []
        for r in (r1, r2):
            deg = int(rng.integers(1, 4))
            coef = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
            M = np.zeros((dim, dim), dtype=np.complex128)
            for c in coef[::-1]:
                M = M @ T + c * np.eye(dim)
            nrm = opnorm(M)
            mats.append(M * (r / nrm) if nrm > 0 else M)
        T1, T2 = mats
    elif strategy == "identity-poly":
        T = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        T1 = T2 = T * (r1 / opnorm(T))
    elif strategy == "normal":
        Q = _unitary(rng, dim)
        d1 = _disc_samples(rng, dim)
        d2 = _disc_samples(rng, dim)
        d1 *= r1 / np.max(np.abs(d1))
        d2 *= r2 / np.max(np.abs(d2))
        T1 = (Q * d1) @ adjoint(Q)
        T2 = (Q * d2) @ adjoint(Q)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    res = opnorm(T1 @ T2 - T2 @ T1)
    assert res <= 1e-12 * max(1.0, opnorm(T1) * opnorm(T2)) + 1e-12, res
    return T1, T2


def krylov_basis(S, P, v, depth=None, tol=1e-12):
    """Orthonormal basis of the smallest ``(S, P)``-invariant subspace containing ``v``."""
    n = S.shape[0]
    depth = 2 * n if depth is None else int(depth)
    v = np.asarray(v, dtype=np.complex128).reshape(n)
    if np.linalg.norm(v) == 0:
        raise ValueError("starting vector is zero")
    Q = (v / np.linalg.norm(v))[:, None]
    frontier = Q
    for _ in range(depth):
        cand = np.hstack([S @ frontier, P @ frontier])
        new = []
        for c in cand.T:
            for _ in range(2):
                c = c - Q @ (adjoint(Q) @ c)
            nrm = np.linalg.norm(c)
            if nrm > 1e-10 * max(1.0, opnorm(S), opnorm(P)):
                c = c / nrm
                Q = np.hstack([Q, c[:, None]])
                new.append(c)
        if not new or Q.shape[1] == n:
            break
        frontier = np.array(new).T
    return Q


def symmetrization_instance(T1, T2, subspace="full", vector=None, depth=None, cfg=DEFAULT_CONFIG):
    """``(T1 + T2, T1 T2)``, optionally restricted to a Krylov invariant subspace."""
    T1 = np.asarray(T1, dtype=np.complex128)
    T2 = np.asarray(T2, dtype=np.complex128)
    S, P = T1 + T2, T1 @ T2
    if subspace == "full":
        return OperatorPair.from_matrices(S, P, cfg)
    if subspace != "krylov":
        raise ValueError(f"unknown subspace {subspace!r}")
    if vector is None:
        raise ValueError("krylov restriction needs a starting vector")
    Q = krylov_basis(S, P, vector, depth)
    sc = max(1.0, opnorm(S), opnorm(P))
    proj = np.eye(S.shape[0]) - Q @ adjoint(Q)
    inv = max(opnorm(proj @ S @ Q), opnorm(proj @ P @ Q))
    if inv > 1e-12 * sc:
        raise NotInvariant(f"Krylov subspace invariance residual {inv:.3e}")
    return OperatorPair.from_matrices(adjoint(Q) @ S @ Q, adjoint(Q) @ P @ Q, cfg)


def scalar_instance(seed, cfg=DEFAULT_CONFIG):
    rng = make_rng(seed, 2)
    z1, z2 = _disc_samples(rng, 2)
    return OperatorPair.from_matrices([[z1 + z2]], [[z1 * z2]], cfg)


def pure_p_instance(seed, dim, norm_cap=0.9, cfg=DEFAULT_CONFIG):
    """Certified pair with factor norms at most ``norm_cap``, so ``||P|| <= norm_cap^2``."""
    if not 0.0 < norm_cap < 1.0:
        raise ValueError("norm_cap must lie in (0, 1)")
    T1, T2 = random_commuting_contractions(seed, dim, norm_range=(0.3 * norm_cap, norm_cap))
    return symmetrization_instance(T1, T2, cfg=cfg)


def gamma_unitary_instance(seed, dim, cfg=DEFAULT_CONFIG):
    """``(U1 + U2, U1 U2)`` for commuting unitaries sharing a random eigenbasis."""
    rng = make_rng(seed, 3)
    Q = _unitary(rng, dim)
    u1 = np.exp(2j * np.pi * rng.random(dim))
    u2 = np.exp(2j * np.pi * rng.random(dim))
    # Repeat some eigenvalues so clusters are exercised too.
    if dim > 2 and rng.random() < 0.5:
        u1[1] = u1[0]
        u2[1] = u2[0]
    U1 = (Q * u1) @ adjoint(Q)
    U2 = (Q * u2) @ adjoint(Q)
    return OperatorPair.from_matrices(U1 + U2, U1 @ U2, cfg), U1, U2


def adversarial_instance(seed, dim, mode=None, c=1.05, max_tries=200, cfg=DEFAULT_CONFIG):
    """A commuting pair that is not a Gamma-contraction.

    Modes: ``"scaled-s"`` gives ``(2.2 I, 0)``, ``"inflated-p"`` gives
    ``(0, 1.1 I)`` and ``"inflated-s"`` gives ``(c (T1 + T2), T1 T2)`` for
    unit-norm commuting normal factors, regenerated until the fundamental
    route refutes it.
    """
    rng = make_rng(seed, 4)
    if mode is None:
        mode = ("scaled-s", "inflated-p", "inflated-s")[int(rng.integers(3))]
    I = np.eye(dim)
    if mode == "scaled-s":
        return OperatorPair.from_matrices(2.2 * I, 0 * I, cfg)
    if mode == "inflated-p":
        return OperatorPair.from_matrices(0 * I, 1.1 * I, cfg)
    if mode != "inflated-s":
        raise ValueError(f"unknown mode {mode!r}")
    for attempt in range(max_tries):
        sub = make_rng(seed, 4, attempt + 1)
        Q = _unitary(sub, dim)
        d1 = _disc_samples(sub, dim)
        d2 = _disc_samples(sub, dim)
        k = int(sub.integers(dim))
        d1[k] /= abs(d1[k])
        d2[k] /= abs(d2[k])
        T1 = (Q * d1) @ adjoint(Q)
        T2 = (Q * d2) @ adjoint(Q)
        pair = OperatorPair.from_matrices(c * (T1 + T2), T1 @ T2, cfg)
        if not certify_theorem_4_4(pair, cfg).is_gamma_contraction:
            return pair
    raise RuntimeError("no refuted instance found")


@dataclass(frozen=True)
class GenSpec:
    seed: int
    dim: int
    kind: str
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def generate(spec, cfg=DEFAULT_CONFIG):
    """Instance for a :class:`GenSpec`; returns ``(pair, meta)``."""
    kind, seed, dim, prm = spec.kind, int(spec.seed), int(spec.dim), dict(spec.params)
    if kind == "symmetrized":
        T1, T2 = random_commuting_contractions(seed, dim, "poly")
        pair = symmetrization_instance(T1, T2, cfg=cfg)
    elif kind == "normal":
        T1, T2 = random_commuting_contractions(seed, dim, "normal")
        pair = symmetrization_instance(T1, T2, cfg=cfg)
    elif kind == "krylov":
        T1, T2 = random_commuting_contractions(seed, dim, "normal")
        rng = make_rng(seed, 5)
        # Start inside a span of a few joint eigenvectors so the restriction is proper.
        _, vecs = np.linalg.eig(T1 + np.pi * T2)
        j = max(1, dim // 2)
        v = vecs[:, :j] @ (rng.standard_normal(j) + 1j * rng.standard_normal(j))
        pair = symmetrization_instance(T1, T2, "krylov", v, prm.get("depth"), cfg=cfg)
    elif kind == "scalar":
        pair = scalar_instance(seed, cfg)
    elif kind == "finite-section":
        from .kernels import finite_section

        pair = finite_section(prm.get("lambda", 2.0), prm.get("cutoff", 4),
                              prm.get("family", "antisymmetric"), cfg)
    elif kind == "pure-p":
        pair = pure_p_instance(seed, dim, prm.get("norm_cap", 0.9), cfg)
    elif kind == "gamma-unitary":
        pair = gamma_unitary_instance(seed, dim, cfg)[0]
    elif kind == "adversarial":
        pair = adversarial_instance(seed, dim, prm.get("mode"), cfg=cfg)
    else:
        raise ValueError(f"unknown kind {kind!r}; choose from {', '.join(KINDS)}")
    meta = {"genspec": spec.to_dict(), "prng": prng_metadata()}
    return pair, meta


_CORPUS_KINDS = ("symmetrized", "normal", "krylov", "scalar", "pure-p", "finite-section")


def corpus(seed, count, max_dim=12, cfg=DEFAULT_CONFIG):
    """Mixed list of ``(GenSpec, pair)`` over dimensions ``1..max_dim``."""
    rng = make_rng(seed, 6)
    out = []
    for i in range(count):
        kind = _CORPUS_KINDS[i % len(_CORPUS_KINDS)]
        dim = int(rng.integers(1, max_dim + 1))
        params = {}
        if kind == "finite-section":
            params = {
                "lambda": float(rng.choice([1.0, 1.5, 2.0, 3.0])),
                "cutoff": int(rng.integers(2, 5)),
                "family": str(rng.choice(["antisymmetric", "symmetric"])),
            }
        spec = GenSpec(int(rng.integers(2**63)), dim, kind, params)
        pair, _ = generate(spec, cfg)
        out.append((spec, pair))
    return out

"""The fundamental equation ``S - S*P = D_P X D_P`` and its adjoint.

Two independent solvers are provided.  The pseudoinverse route compresses
``Sigma = S - S*P`` to the defect space and divides by the defect values.  The
Fejer-Riesz route factors the degree-one trigonometric polynomial
``D_P^2 - Re(e^{i theta} Sigma)`` as ``(X - zY)(X - zY)*`` and assembles the
solution from two Douglas factors.  By uniqueness both must agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    MajorizationFailed,
    NoConvergence,
    NotAContraction,
    NotPositiveOnCircle,
    ShapeError,
)
from .numerics import (
    DEFAULT_CONFIG,
    adjoint,
    as_matrix,
    as_square,
    defect_decomposition,
    hermitian_part,
    numerical_radius,
    opnorm,
    pinv,
    scale,
    spectral_radius,
)
from .pairs import as_pair

__all__ = [
    "FundamentalEquation",
    "FundamentalSolution",
    "SpectralFactor",
    "Theorem44Result",
    "build_equation",
    "solve_fundamental",
    "solve_fundamental_adjoint",
    "douglas_factor",
    "fejer_riesz_degree1",
    "bauer_dense",
    "solve_fundamental_via_fejer_riesz",
    "certify_theorem_4_4",
]

MAX_DOUBLINGS = 60


@dataclass(frozen=True, eq=False)
class FundamentalEquation:
    Sigma: np.ndarray
    SigmaStar: np.ndarray
    D_P: np.ndarray
    D_Pstar: np.ndarray
    defect_basis: np.ndarray
    defect_basis_star: np.ndarray


def build_equation(pair, cfg=DEFAULT_CONFIG):
    """Assemble ``Sigma``, ``Sigma_*`` and both defect operators with their bases."""
    pair = as_pair(pair, cfg=cfg)
    S, P = pair.S, pair.P
    Sh, Ph = adjoint(S), adjoint(P)
    dec = defect_decomposition(P, cfg)
    dec_star = defect_decomposition(Ph, cfg)
    return FundamentalEquation(
        S - Sh @ P, Sh - S @ Ph, dec.operator, dec_star.operator, dec.basis, dec_star.basis
    )


@dataclass(frozen=True, eq=False)
class FundamentalSolution:
    """Solution ``A`` of the fundamental equation in defect-basis coordinates.

    ``basis`` (n x k) has orthonormal columns spanning the defect space and
    ``defect_values`` are the matching eigenvalues of ``D_P``.
    """

    A: np.ndarray
    residual: float
    omega: float
    omega_error: float
    unique: bool
    basis: np.ndarray
    defect_values: np.ndarray
    route: str = "pinv"
    details: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.A.shape[0]

    @property
    def full(self):
        """``A`` lifted to the whole space (zero on the kernel of ``D_P``)."""
        return self.basis @ self.A @ adjoint(self.basis)

    def to_dict(self):
        from .io import matrix_to_json

        return {
            "route": self.route,
            "A": matrix_to_json(self.A),
            "defect_basis": matrix_to_json(self.basis),
            "residual": self.residual,
            "omega": self.omega,
            "omega_error": self.omega_error,
            "unique": self.unique,
            **{k: v for k, v in self.details.items() if isinstance(v, (int, float, str, bool))},
        }


def _finish(A, Sigma, dec, cfg, route, details=None):
    full = dec.basis @ A @ adjoint(dec.basis)
    res = opnorm(Sigma - dec.operator @ full @ dec.operator) / max(1.0, opnorm(Sigma))
    w = numerical_radius(A, cfg)
    unique = bool(np.all(dec.values > 0))
    return FundamentalSolution(
        A, res, w.value, w.error_bound, unique, dec.basis, dec.values, route, details or {}
    )


def solve_fundamental(pair, cfg=DEFAULT_CONFIG):
    """Pseudoinverse solution ``A = B* D+ Sigma D+ B`` of ``Sigma = D_P A D_P``."""
    pair = as_pair(pair, cfg=cfg)
    S, P = pair.S, pair.P
    Sigma = S - adjoint(S) @ P
    dec = defect_decomposition(P, cfg)
    inv = 1.0 / dec.values
    A = inv[:, None] * (adjoint(dec.basis) @ Sigma @ dec.basis) * inv[None, :]
    return _finish(A, Sigma, dec, cfg, "pinv")


def solve_fundamental_adjoint(pair, cfg=DEFAULT_CONFIG):
    """The operator ``B`` on the defect space of ``P*`` solving ``Sigma_* = D_P* B D_P*``."""
    pair = as_pair(pair, cfg=cfg)
    return solve_fundamental(pair.adjoint(cfg), cfg)


def douglas_factor(X, D, cfg=DEFAULT_CONFIG):
    """Contraction ``Q`` with ``D Q = X`` vanishing off the range of ``D*``.

    Requires ``XX* <= DD*`` up to ``psd_tol``; raises ``MajorizationFailed``
    otherwise.
    """
    X = as_matrix(X, "X")
    D = as_matrix(D, "D")
    if D.shape[0] != X.shape[0]:
        raise ShapeError(f"D has {D.shape[0]} rows, X has {X.shape[0]}")
    DD = D @ adjoint(D)
    gap = hermitian_part(DD - X @ adjoint(X))
    if gap.size:
        lam = float(np.linalg.eigvalsh(gap)[0])
        if lam < -cfg.psd_tol * max(1.0, opnorm(DD)):
            raise MajorizationFailed(f"XX* exceeds DD* (lambda_min = {lam:.3e})")
    # pinv(D) already maps into Ran D*, so no further projection is needed.
    return pinv(D, cfg) @ X


@dataclass(frozen=True, eq=False)
class SpectralFactor:
    """Factor of ``H0 + (z H1 + conj(z) H1*)/2 = (X - zY)(X - zY)*`` on the circle."""

    X: np.ndarray
    Y: np.ndarray
    factor_residual: float
    n_blocks: int = 0
    regularization: float = 0.0
    support: np.ndarray | None = None


def _symbol_min_eig(H0, H1, m):
    theta = 2.0 * np.pi * np.arange(m) / m
    z = np.exp(1j * theta)[:, None, None]
    L = H0[None] + 0.5 * (z * H1[None] + np.conj(z) * adjoint(H1)[None])
    return np.linalg.eigvalsh(hermitian_part(L))[:, 0]


def _solve_pd(M, R):
    try:
        return np.linalg.solve(M, R)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"singular pivot block: {exc}") from exc


def _bauer_pivot(H0, Phi, tol, max_doublings):
    """Limit of the block Cholesky pivots of the tridiagonal Toeplitz matrix.

    Block cyclic reduction produces the last pivot of the ``2^k + 1`` block
    section after ``k`` eliminations, so the truncation size doubles per step.
    Returns the pivot, the last change and the section size reached.
    """
    first = H0.copy()
    interior = H0.copy()
    last = H0.copy()
    L = Phi.copy()
    prev = None
    change = math.inf
    blocks = 2
    for _ in range(max_doublings):
        Lh = adjoint(L)
        pivot = hermitian_part(last - L @ _solve_pd(first, Lh))
        if not np.all(np.isfinite(pivot)):
            raise NoConvergence("non-finite pivot", max_size=blocks)
        if prev is not None:
            change = opnorm(pivot - prev)
            if change <= tol:
                return pivot, change, blocks
        prev = pivot
        inv_L = _solve_pd(interior, L)
        inv_Lh = _solve_pd(interior, Lh)
        first = hermitian_part(first - Lh @ inv_L)
        new_interior = hermitian_part(interior - Lh @ inv_L - L @ inv_Lh)
        last = hermitian_part(last - L @ inv_Lh)
        L = -L @ inv_L
        interior = new_interior
        blocks = 2 * blocks - 1
    raise NoConvergence(
        f"pivot did not stabilize after {max_doublings} doublings",
        max_size=blocks, last_change=change,
    )


def bauer_dense(H0, H1, n_blocks):
    """Reference Bauer step: block Cholesky of the dense ``n_blocks`` section.

    Returns the last diagonal factor block ``X`` and the block ``-Y`` below
    the diagonal in the final block row.  Only meant for small sections.
    """
    H0 = as_square(H0, "H0")
    H1 = as_square(H1, "H1")
    k = H0.shape[0]
    Phi = 0.5 * H1
    N = int(n_blocks)
    T = np.zeros((N * k, N * k), dtype=np.complex128)
    for j in range(N):
        T[j * k:(j + 1) * k, j * k:(j + 1) * k] = H0
        if j + 1 < N:
            T[(j + 1) * k:(j + 2) * k, j * k:(j + 1) * k] = Phi
            T[j * k:(j + 1) * k, (j + 1) * k:(j + 2) * k] = adjoint(Phi)
    C = np.linalg.cholesky(T)
    X = C[(N - 1) * k:, (N - 1) * k:]
    Ysub = C[(N - 1) * k:, (N - 2) * k:(N - 1) * k] if N > 1 else np.zeros_like(X)
    return X, -Ysub


def _factor_from_pivot(pivot, Phi, cutoff):
    mu, V = np.linalg.eigh(pivot)
    mu = np.clip(mu, 0.0, None)
    root = np.sqrt(mu)
    X = V * root
    keep = mu > cutoff
    inv = np.zeros_like(root)
    inv[keep] = 1.0 / root[keep]
    Ysub = Phi @ (V * inv)
    return X, -Ysub


def fejer_riesz_degree1(H0, H1, cfg=DEFAULT_CONFIG, max_doublings=MAX_DOUBLINGS):
    """Factor ``L(theta) = H0 + (e^{i theta} H1 + e^{-i theta} H1*)/2``.

    Returns ``X, Y`` with ``XX* + YY* = H0`` and ``2 Y X* = -H1``.  The problem
    is first compressed to the range of ``H0`` (``H1`` must vanish on its
    kernel, which positivity forces).  Positivity is checked on the
    ``grid_theta`` circle grid before factoring.
    """
    H0 = hermitian_part(as_square(H0, "H0"))
    H1 = as_square(H1, "H1")
    if H0.shape != H1.shape:
        raise ShapeError(f"H0 is {H0.shape}, H1 is {H1.shape}")
    n = H0.shape[0]
    sc = scale(H0, H1)
    if n == 0:
        z = np.zeros((0, 0), dtype=np.complex128)
        return SpectralFactor(z, z, 0.0)

    lam_min = float(_symbol_min_eig(H0, H1, cfg.grid_theta).min())
    if lam_min < -cfg.psd_tol * sc:
        raise NotPositiveOnCircle(f"L(theta) has eigenvalue {lam_min:.3e} on the circle")

    w, V = np.linalg.eigh(H0)
    keep = w > cfg.rank_tol * max(w[-1], 0.0) if w[-1] > 0 else np.zeros(n, dtype=bool)
    U = V[:, keep]
    H0c = np.diag(w[keep]).astype(np.complex128)
    leak = opnorm(H1 - U @ adjoint(U) @ H1 @ U @ adjoint(U))
    if leak > cfg.eq_tol * sc:
        raise NotPositiveOnCircle(f"H1 does not vanish on ker H0 (leak {leak:.3e})")
    Phi = 0.5 * (adjoint(U) @ H1 @ U)
    k = H0c.shape[0]
    if k == 0:
        z = np.zeros((n, 0), dtype=np.complex128)
        return SpectralFactor(z, z, 0.0, support=U)

    tol = 1e-3 * cfg.eq_tol * sc
    eps = 0.0
    try:
        pivot, _, blocks = _bauer_pivot(H0c, Phi, tol, max_doublings)
    except NoConvergence:
        eps = 10.0 * cfg.psd_tol * max(1.0, opnorm(H0c))
        pivot, _, blocks = _bauer_pivot(H0c + eps * np.eye(k), Phi, tol, max_doublings)

    Xc, Yc = _factor_from_pivot(pivot, Phi, cfg.rank_tol * max(1.0, opnorm(pivot)))
    X, Y = U @ Xc, U @ Yc
    r1 = opnorm(X @ adjoint(X) + Y @ adjoint(Y) - H0)
    r2 = opnorm(2.0 * Y @ adjoint(X) + H1)
    res = max(r1, r2)
    if res > cfg.eq_tol * max(1.0, opnorm(H0)):
        raise NoConvergence(
            f"factor residual {res:.3e} above tolerance", max_size=blocks, last_change=res
        )
    return SpectralFactor(X, Y, res, blocks, eps, U)


def solve_fundamental_via_fejer_riesz(pair, cfg=DEFAULT_CONFIG):
    """Fundamental operator from a spectral factor and two Douglas factors.

    With ``D_P^2 - Re(z Sigma) = (X - zY)(X - zY)*`` one has ``D_P Q = X``,
    ``D_P R = Y`` and ``A`` is the defect compression of ``2 R Q*``.
    """
    pair = as_pair(pair, cfg=cfg)
    S, P = pair.S, pair.P
    Sigma = S - adjoint(S) @ P
    dec = defect_decomposition(P, cfg)
    D = dec.operator
    fac = fejer_riesz_degree1(D @ D, -Sigma, cfg)
    B = dec.basis
    if B.shape[1] == 0:
        A = np.zeros((0, 0), dtype=np.complex128)
    else:
        Q = douglas_factor(fac.X, D, cfg)
        R = douglas_factor(fac.Y, D, cfg)
        A = adjoint(B) @ (2.0 * R @ adjoint(Q)) @ B
    details = {
        "factor_residual": fac.factor_residual,
        "n_blocks": fac.n_blocks,
        "regularization": fac.regularization,
    }
    return _finish(A, Sigma, dec, cfg, "fejer-riesz", details)


@dataclass(frozen=True, eq=False)
class Theorem44Result:
    """Outcome of the spectral-radius plus fundamental-operator test."""

    is_gamma_contraction: bool
    reason: str
    spectral_radius: float
    residual: float | None
    omega: float | None
    failed: tuple = ()
    solution: FundamentalSolution | None = None

    def __bool__(self):
        return self.is_gamma_contraction

    @property
    def status(self):
        return "GammaContraction" if self.is_gamma_contraction else "Not"

    def to_dict(self):
        return {
            "status": self.status,
            "reason": self.reason,
            "failed": list(self.failed),
            "spectral_radius": self.spectral_radius,
            "residual": self.residual,
            "omega": self.omega,
        }


def certify_theorem_4_4(pair, cfg=DEFAULT_CONFIG):
    """``(S, P)`` is a Gamma-contraction iff ``r(S) <= 2`` and ``A`` exists with ``omega(A) <= 1``.

    Clauses are checked in the order residual, omega, spectral radius; the
    reason names the first one that fails.  A non-contractive ``P`` is
    reported as its own failed clause.
    """
    pair = as_pair(pair, cfg=cfg)
    r = spectral_radius(pair.S)
    try:
        sol = solve_fundamental(pair, cfg)
    except NotAContraction as exc:
        return Theorem44Result(False, f"contraction: {exc}", r, None, None, ("contraction",))
    failed = []
    reasons = []
    if sol.residual > cfg.eq_tol:
        failed.append("residual")
        reasons.append(f"residual: {sol.residual:.3e} > {cfg.eq_tol:.1e}")
    if sol.omega > 1.0 + cfg.eq_tol:
        failed.append("omega")
        reasons.append(f"omega: omega(A) = {sol.omega:.12g}")
    if r > 2.0 + cfg.eq_tol:
        failed.append("spectral_radius")
        reasons.append(f"spectral_radius: r(S) = {r:.12g}")
    ok = not failed
    reason = "all clauses hold" if ok else reasons[0]
    return Theorem44Result(ok, reason, r, sol.residual, sol.omega, tuple(failed), sol)


"""Dense complex linear algebra primitives.

Every operator in gammakit is a dense ``complex128`` numpy array.  This module
holds the shared tolerance configuration and the operator-theoretic building
blocks: defect operators, numerical and spectral radii, PSD verdicts and a
rank-revealing pseudoinverse.

All thresholds are relative to ``max(1, ||.||)`` of the matrix they apply to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    EigenFailure,
    NotAContraction,
    NotHermitian,
    ShapeError,
    SvdFailure,
)

__all__ = [
    "ToleranceConfig",
    "DEFAULT_CONFIG",
    "NumericalRadius",
    "PSDVerdict",
    "as_matrix",
    "as_square",
    "opnorm",
    "scale",
    "adjoint",
    "hermitian_part",
    "defect_operator",
    "defect_space_basis",
    "defect_decomposition",
    "numerical_radius",
    "spectral_radius",
    "psd_check",
    "pinv",
    "DefectDecomposition",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical tolerances and sampling resolutions.

    ``eq_tol`` bounds relative residuals of identities, ``psd_tol`` is the
    relative allowance for negative eigenvalues, ``rank_tol`` the relative
    singular value cutoff.  ``grid_theta`` and ``grid_radius`` set the angular
    and radial resolution of every sampled disc or circle.
    """

    eq_tol: float = 1e-10
    psd_tol: float = 1e-10
    rank_tol: float = 1e-12
    grid_theta: int = 720
    grid_radius: int = 16

    def __post_init__(self):
        for name in ("eq_tol", "psd_tol", "rank_tol"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be a finite nonnegative number, got {value!r}")
        for name in ("grid_theta", "grid_radius"):
            value = getattr(self, name)
            if int(value) != value or value < 4:
                raise ValueError(f"{name} must be an integer >= 4, got {value!r}")

    def to_dict(self):
        return {
            "eq_tol": self.eq_tol,
            "psd_tol": self.psd_tol,
            "rank_tol": self.rank_tol,
            "grid_theta": self.grid_theta,
            "grid_radius": self.grid_radius,
        }


DEFAULT_CONFIG = ToleranceConfig()


def as_matrix(x, name="matrix"):
    """Return ``x`` as a finite 2-d complex128 array (a copy is not forced)."""
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{name} has non-finite entries")
    return arr


def as_square(x, name="matrix"):
    arr = as_matrix(x, name)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {arr.shape}")
    return arr


def opnorm(x):
    """Spectral norm; zero for empty matrices."""
    x = np.asarray(x)
    if x.size == 0:
        return 0.0
    return float(np.linalg.norm(x, 2))


def scale(*mats):
    """``max(1, ||M||)`` over the given matrices."""
    return max([1.0] + [opnorm(m) for m in mats])


def adjoint(x):
    return np.conj(np.swapaxes(x, -1, -2))


def hermitian_part(x):
    return 0.5 * (x + adjoint(x))


def _eigh(h):
    try:
        return np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc


@dataclass(frozen=True)
class DefectDecomposition:
    """Spectral data of ``I - P*P``.

    ``basis`` holds orthonormal eigenvectors spanning the defect space and
    ``values`` the matching square roots (the restriction of ``D_P``).
    """

    operator: np.ndarray
    basis: np.ndarray
    values: np.ndarray

    @property
    def dim(self):
        return self.basis.shape[1]

    def coords(self):
        """``D_P`` as a map from the full space into defect coordinates."""
        return self.values[:, None] * adjoint(self.basis)


def defect_decomposition(P, cfg=DEFAULT_CONFIG):
    """Eigen-decompose ``I - P*P`` once and derive ``D_P`` and its range basis."""
    P = as_square(P, "P")
    n = P.shape[0]
    gram = np.eye(n) - adjoint(P) @ P
    gram = hermitian_part(gram)
    if n == 0:
        empty = np.zeros((0, 0), dtype=np.complex128)
        return DefectDecomposition(empty, empty, np.zeros(0))
    w, v = _eigh(gram)
    top = max(abs(w[0]), abs(w[-1]))
    if w[0] < -cfg.psd_tol * max(1.0, top):
        raise NotAContraction(
            f"I - P*P has eigenvalue {w[0]:.3e}; P is not a contraction"
        )
    w = np.clip(w, 0.0, None)
    root = np.sqrt(w)
    operator = (v * root) @ adjoint(v)
    # Forming I - P*P leaves rounding of order n eps; nothing below that is a defect.
    floor = max(cfg.rank_tol * w[-1], 16.0 * n * np.finfo(float).eps)
    keep = w > floor
    basis = np.ascontiguousarray(v[:, keep])
    return DefectDecomposition(operator, basis, root[keep])


def defect_operator(P, cfg=DEFAULT_CONFIG):
    """``D_P = (I - P*P)^{1/2}`` via a clamped Hermitian eigendecomposition."""
    return defect_decomposition(P, cfg).operator


def defect_space_basis(P, cfg=DEFAULT_CONFIG):
    """Orthonormal basis (as columns) of the closed range of ``D_P``."""
    return defect_decomposition(P, cfg).basis


@dataclass(frozen=True)
class NumericalRadius:
    """Numerical radius estimate with a certified enclosure.

    ``value`` is attained at ``theta`` and is therefore a lower bound;
    ``value + error_bound`` is an upper bound.
    """

    value: float
    error_bound: float
    theta: float

    def __float__(self):
        return float(self.value)

    @property
    def upper(self):
        return self.value + self.error_bound


def _top_eig_re(X, thetas):
    """``lambda_max(Re(e^{i theta} X))`` for each theta."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    out = np.empty(thetas.shape[0])
    n = X.shape[0]
    chunk = max(1, int(4_000_000 // max(1, n * n)))
    Xh = adjoint(X)
    for start in range(0, thetas.shape[0], chunk):
        ph = np.exp(1j * thetas[start:start + chunk])[:, None, None]
        H = 0.5 * (ph * X + np.conj(ph) * Xh)
        try:
            out[start:start + chunk] = np.linalg.eigvalsh(H)[:, -1]
        except np.linalg.LinAlgError as exc:
            raise EigenFailure(str(exc)) from exc
    return out


def _golden_max(f, a, b, fa_hint=None, iters=80):
    """Golden-section search for a maximum of ``f`` on ``[a, b]``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a < 1e-15:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def numerical_radius(X, cfg=DEFAULT_CONFIG):
    """Numerical radius ``max_theta lambda_max(Re(e^{i theta} X))``.

    A ``cfg.grid_theta`` grid locates candidate maxima, golden-section search
    refines the best few.  The error bound is the smaller of the Lipschitz
    bound (``d/dtheta`` of the top eigenvalue is at most ``||X||``) and the
    outer polygon built from the supporting lines at the grid angles.
    """
    X = as_square(X, "X")
    n = X.shape[0]
    if n == 0:
        return NumericalRadius(0.0, 0.0, 0.0)
    norm = opnorm(X)
    if norm == 0.0:
        return NumericalRadius(0.0, 0.0, 0.0)
    m = int(cfg.grid_theta)
    h = 2.0 * math.pi / m
    thetas = h * np.arange(m)
    f = _top_eig_re(X, thetas)

    is_peak = (f >= np.roll(f, 1)) & (f >= np.roll(f, -1))
    peaks = np.flatnonzero(is_peak)
    peaks = peaks[np.argsort(f[peaks])[::-1][:4]]
    best_val = float(f.max())
    best_theta = float(thetas[int(np.argmax(f))])
    g = lambda t: float(_top_eig_re(X, [t])[0])
    for k in peaks:
        t, val = _golden_max(g, thetas[k] - h, thetas[k] + h)
        if val > best_val:
            best_val, best_theta = val, float(t)

    fn = np.roll(f, -1)
    lipschitz_upper = float(np.max(0.5 * (f + fn + norm * h)))
    t = (f * math.cos(h) - fn) / math.sin(h)
    polygon_upper = float(np.sqrt(np.max(f * f + t * t)))
    slack = 8.0 * n * np.finfo(float).eps * norm
    upper = min(lipschitz_upper, polygon_upper, norm) + slack
    return NumericalRadius(best_val, max(0.0, upper - best_val), best_theta % (2 * math.pi))


def spectral_radius(X):
    """Largest eigenvalue modulus."""
    X = as_square(X, "X")
    if X.shape[0] == 0:
        return 0.0
    try:
        ev = np.linalg.eigvals(X)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    return float(np.max(np.abs(ev)))


@dataclass(frozen=True)
class PSDVerdict:
    is_psd: bool
    min_eigenvalue: float
    threshold: float

    def __bool__(self):
        return self.is_psd

    def to_dict(self):
        return {
            "verdict": "PSD" if self.is_psd else "NotPSD",
            "min_eigenvalue": self.min_eigenvalue,
            "threshold": self.threshold,
        }


def psd_check(H, cfg=DEFAULT_CONFIG):
    """PSD iff ``lambda_min >= -psd_tol * max(1, ||H||)`` after symmetrizing."""
    H = as_square(H, "H")
    if H.shape[0] == 0:
        return PSDVerdict(True, 0.0, 0.0)
    s = scale(H)
    skew = opnorm(H - adjoint(H))
    if skew > cfg.eq_tol * s:
        raise NotHermitian(f"||H - H*|| = {skew:.3e} exceeds tolerance")
    w = np.linalg.eigvalsh(hermitian_part(H))
    lam = float(w[0])
    threshold = -cfg.psd_tol * s
    return PSDVerdict(lam >= threshold, lam, threshold)


def pinv(X, cfg=DEFAULT_CONFIG):
    """Moore-Penrose pseudoinverse with relative cutoff ``rank_tol``."""
    X = as_matrix(X, "X")
    if X.size == 0:
        return np.zeros((X.shape[1], X.shape[0]), dtype=np.complex128)
    try:
        return scipy.linalg.pinv(X, atol=0.0, rtol=cfg.rank_tol)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SvdFailure(str(exc)) from exc

"""Operator-level classification of commuting pairs.

Gamma-contractions are certified through the fundamental operator and
cross-checked with a sampled positivity scan of ``rho(alpha S, alpha^2 P)``.
Gamma-unitaries and Gamma-isometries have algebraic tests; Gamma-unitaries are
factored as ``S = U1 + U2``, ``P = U1 U2`` with commuting unitaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import (
    GammaKitError,
    JointDiagonalizationFailure,
    NotAContraction,
    NotGammaUnitary,
    OmegaExceedsOne,
)
from .fundamental import certify_theorem_4_4
from .numerics import (
    DEFAULT_CONFIG,
    adjoint,
    as_square,
    defect_operator,
    hermitian_part,
    numerical_radius,
    opnorm,
    spectral_radius,
)
from .pairs import as_pair, rho, rho_forms

__all__ = [
    "ContractionStatus",
    "ClassificationReport",
    "TestResult",
    "StructureCheck",
    "AndoResult",
    "rho",
    "rho_forms",
    "rho_grid_scan",
    "certify_gamma_contraction",
    "is_gamma_unitary",
    "is_gamma_isometry",
    "gamma_unitary_factors",
    "joint_diagonalize",
    "ando_verify",
    "ando_factor",
    "structure_checks",
]


@dataclass(frozen=True)
class ContractionStatus:
    """``Certified``, ``Refuted`` (with the refuting ``alpha`` when known) or ``SampledPass``."""

    kind: str
    alpha: complex | None = None
    reason: str = ""

    @property
    def certified(self):
        return self.kind == "Certified"

    @property
    def refuted(self):
        return self.kind == "Refuted"

    def to_dict(self):
        out = {"kind": self.kind, "reason": self.reason}
        if self.alpha is not None:
            out["alpha"] = [self.alpha.real, self.alpha.imag]
        return out


@dataclass(frozen=True)
class RhoScan:
    passed: bool
    alpha: complex | None
    min_eigenvalue: float
    n_samples: int


def rho_grid_scan(pair, cfg=DEFAULT_CONFIG):
    """Check ``rho(alpha S, alpha^2 P) >= 0`` on a grid of the closed disc.

    Circles are scanned from the outermost inward, angles from 0 upward, and
    the first failing ``alpha`` is returned.  Passing is only a necessary
    condition.
    """
    pair = as_pair(pair, cfg=cfg)
    S, P = pair.S, pair.P
    n = S.shape[0]
    if n == 0:
        return RhoScan(True, None, 0.0, 0)
    R, m = cfg.grid_radius, cfg.grid_theta
    radii = np.arange(R, 0, -1) / R
    angles = 2.0 * np.pi * np.arange(m) / m
    alphas = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    alphas = np.concatenate((alphas, [0j]))

    I = np.eye(n)
    Sh = adjoint(S)
    PhP = adjoint(P) @ P
    ShP = Sh @ P
    PhS = adjoint(P) @ S
    worst = math.inf
    chunk = max(1, int(2_000_000 // max(1, n * n)))
    for start in range(0, alphas.size, chunk):
        a = alphas[start:start + chunk][:, None, None]
        ac = np.conj(a)
        a2 = np.abs(a) ** 4
        H = (2.0 * I - 2.0 * a2 * PhP - a * S - ac * Sh + ac * a * a * ShP + a * ac * ac * PhS)
        H = hermitian_part(H)
        w = np.linalg.eigvalsh(H)
        lam = w[:, 0]
        top = np.maximum(1.0, np.max(np.abs(w), axis=1))
        bad = np.flatnonzero(lam < -cfg.psd_tol * top)
        worst = min(worst, float(lam.min()))
        if bad.size:
            k = int(bad[0])
            return RhoScan(False, complex(alphas[start + k]), float(lam[k]), start + k + 1)
    return RhoScan(True, None, worst, alphas.size)


@dataclass(frozen=True)
class TestResult:
    passed: bool
    diagnostics: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed


@dataclass(frozen=True)
class StructureCheck:
    name: str
    applicable: bool
    passed: bool
    residual: float = 0.0

    def to_dict(self):
        return {
            "name": self.name,
            "applicable": self.applicable,
            "passed": self.passed,
            "residual": self.residual,
            "status": "pass" if self.passed else ("fail" if self.applicable else "not applicable"),
        }


@dataclass(frozen=True, eq=False)
class ClassificationReport:
    is_gamma_contraction: ContractionStatus
    certification_route: str
    is_gamma_unitary: bool
    is_gamma_isometry: bool
    spectral_radius_S: float
    omega_A: float | None
    structure_notes: tuple
    fundamental: object = None
    rho_scan: RhoScan | None = None

    def to_dict(self):
        rs = self.rho_scan
        return {
            "is_gamma_contraction": self.is_gamma_contraction.to_dict(),
            "certification_route": self.certification_route,
            "is_gamma_unitary": self.is_gamma_unitary,
            "is_gamma_isometry": self.is_gamma_isometry,
            "spectral_radius_S": self.spectral_radius_S,
            "omega_A": self.omega_A,
            "fundamental": None if self.fundamental is None else self.fundamental.to_dict(),
            "rho_grid": None if rs is None else {
                "passed": rs.passed,
                "alpha": None if rs.alpha is None else [rs.alpha.real, rs.alpha.imag],
                "min_eigenvalue": rs.min_eigenvalue,
                "samples": rs.n_samples,
            },
            "structure_notes": [c.to_dict() for c in self.structure_notes],
        }


# A fundamental-route failure this close to the tolerance is treated as
# inconclusive when the rho grid finds no violation.
_MARGINAL = 100.0


def certify_gamma_contraction(pair, cfg=DEFAULT_CONFIG):
    """Classify ``pair``; the fundamental-equation route is the certificate of record."""
    pair = as_pair(pair, cfg=cfg)
    scan = rho_grid_scan(pair, cfg)
    r = spectral_radius(pair.S)
    omega = None
    numeric_error = None
    try:
        cert = certify_theorem_4_4(pair, cfg)
    except (GammaKitError, np.linalg.LinAlgError) as exc:
        cert = None
        numeric_error = exc

    route = "FundamentalEquation"
    if cert is not None and cert.omega is not None:
        omega = cert.omega
    if cert is not None and cert.is_gamma_contraction:
        status = ContractionStatus("Certified", reason=cert.reason)
    elif cert is None:
        if scan.passed:
            status = ContractionStatus("SampledPass", reason=f"fundamental route failed: {numeric_error}")
            route = "RhoGrid"
        else:
            status = ContractionStatus("Refuted", scan.alpha, "rho grid")
            route = "RhoGrid"
    else:
        marginal = cert.failed != ("contraction",) and _marginal(cert, cfg)
        if marginal and scan.passed:
            status = ContractionStatus("SampledPass", reason=f"marginal: {cert.reason}")
            route = "RhoGrid"
        else:
            alpha = scan.alpha if not scan.passed else None
            status = ContractionStatus("Refuted", alpha, cert.reason)

    unitary = bool(is_gamma_unitary(pair, cfg))
    isometry = bool(is_gamma_isometry(pair, cfg))
    notes = tuple(structure_checks(pair, cfg))
    return ClassificationReport(
        status, route, unitary, isometry, r, omega, notes,
        None if cert is None else cert.solution, scan,
    )


def _marginal(cert, cfg):
    lim = _MARGINAL * cfg.eq_tol
    if "residual" in cert.failed and cert.residual > lim:
        return False
    if "omega" in cert.failed and cert.omega > 1.0 + lim:
        return False
    if "spectral_radius" in cert.failed and cert.spectral_radius > 2.0 + lim:
        return False
    return True


def is_gamma_unitary(pair, cfg=DEFAULT_CONFIG):
    """``P`` unitary, ``S = S*P`` and ``r(S) <= 2``."""
    pair = as_pair(pair, cfg=cfg)
    S, P = pair.S, pair.P
    n = S.shape[0]
    I = np.eye(n)
    tol = cfg.eq_tol
    d = {
        "PhP_minus_I": opnorm(adjoint(P) @ P - I),
        "PPh_minus_I": opnorm(P @ adjoint(P) - I),
        "S_minus_ShP": opnorm(S - adjoint(S) @ P),
        "spectral_radius": spectral_radius(S),
        "normality_residual": opnorm(S @ adjoint(S) - adjoint(S) @ S),
    }
    ok = (
        d["PhP_minus_I"] <= tol
        and d["PPh_minus_I"] <= tol
        and d["S_minus_ShP"] <= tol * max(1.0, opnorm(S))
        and d["spectral_radius"] <= 2.0 + tol
    )
    return TestResult(bool(ok), d)


def is_gamma_isometry(pair, cfg=DEFAULT_CONFIG, n_beta=None):
    """``P`` isometric, ``S = S*P`` and ``r(S) <= 2``.

    When ``r(S) < 2`` the characterization through the isometries
    ``(2 beta P - S)(2 - beta S)^{-1}``, ``beta`` on the unit circle, is also
    evaluated and its worst defect reported.
    """
    pair = as_pair(pair, cfg=cfg)
    S, P = pair.S, pair.P
    n = S.shape[0]
    I = np.eye(n)
    tol = cfg.eq_tol
    r = spectral_radius(S)
    d = {
        "PhP_minus_I": opnorm(adjoint(P) @ P - I),
        "S_minus_ShP": opnorm(S - adjoint(S) @ P),
        "spectral_radius": r,
    }
    ok = (
        d["PhP_minus_I"] <= tol
        and d["S_minus_ShP"] <= tol * max(1.0, opnorm(S))
        and r <= 2.0 + tol
    )
    if ok and n and r < 2.0 - tol:
        m = int(n_beta or cfg.grid_theta)
        worst = 0.0
        for beta in np.exp(2j * np.pi * np.arange(m) / m):
            Y = np.linalg.solve((2.0 * I - beta * S).T, (2.0 * beta * P - S).T).T
            worst = max(worst, opnorm(adjoint(Y) @ Y - I))
        d["beta_grid_defect"] = worst
    return TestResult(bool(ok), d)


def _cluster(values, tol):
    """Group indices of ``values`` whose entries lie within ``tol`` (single linkage)."""
    groups = []
    remaining = list(range(values.size))
    while remaining:
        seed = remaining.pop(0)
        group = [seed]
        grew = True
        while grew:
            grew = False
            for j in list(remaining):
                if np.min(np.abs(values[group] - values[j])) <= tol:
                    group.append(j)
                    remaining.remove(j)
                    grew = True
        groups.append(sorted(group))
    return groups


_MIX = (0.6180339887498949, 0.41421356237309515, 0.7320508075688772)


def joint_diagonalize(S, P, cfg=DEFAULT_CONFIG):
    """Unitary ``Z`` diagonalizing the commuting normal pair ``(S, P)``.

    A complex Schur form of ``S + b P`` for a fixed irrational ``b`` is used;
    clusters of (nearly) repeated eigenvalues are re-split with a different
    combination.  Returns ``Z`` and the diagonals of ``Z*SZ`` and ``Z*PZ``.
    """
    S = as_square(S, "S")
    P = as_square(P, "P")
    n = S.shape[0]
    sc = max(1.0, opnorm(S), opnorm(P))
    Z = np.eye(n, dtype=np.complex128)
    blocks = [list(range(n))]
    for b in _MIX:
        new_blocks = []
        for idx in blocks:
            if len(idx) == 1:
                new_blocks.append(idx)
                continue
            Zb = Z[:, idx]
            M = adjoint(Zb) @ (S + b * P) @ Zb
            T, W = scipy.linalg.schur(M, output="complex")
            Z[:, idx] = Zb @ W
            ev = np.diag(T)
            for g in _cluster(ev, 1e-8 * sc):
                new_blocks.append([idx[i] for i in g])
        blocks = new_blocks
    Sd = adjoint(Z) @ S @ Z
    Pd = adjoint(Z) @ P @ Z
    off = max(opnorm(Sd - np.diag(np.diag(Sd))), opnorm(Pd - np.diag(np.diag(Pd))))
    if off > cfg.eq_tol * sc:
        raise JointDiagonalizationFailure(f"off-diagonal residual {off:.3e}")
    return Z, np.diag(Sd).copy(), np.diag(Pd).copy()


def _boundary_roots(s, p):
    """Both roots of ``z^2 - s z + p`` for a point of the distinguished boundary."""
    h = np.sqrt(complex(p))
    if h == 0:
        return 0j, 0j
    x = float(np.clip((s / (2.0 * h)).real, -1.0, 1.0))
    y = math.sqrt(max(0.0, 1.0 - x * x))
    return h * complex(x, y), h * complex(x, -y)


def _lex_first(r1, r2, tol=1e-12):
    """The lexicographically greater root on ``(Re, Im)``, with a tie tolerance."""
    if abs(r1.real - r2.real) > tol:
        return (r1, r2) if r1.real > r2.real else (r2, r1)
    return (r1, r2) if r1.imag >= r2.imag else (r2, r1)


def gamma_unitary_factors(pair, cfg=DEFAULT_CONFIG):
    """Commuting unitaries ``U1, U2`` with ``S = U1 + U2`` and ``P = U1 U2``."""
    pair = as_pair(pair, cfg=cfg)
    if not is_gamma_unitary(pair, cfg):
        raise NotGammaUnitary("pair fails the Gamma-unitary test")
    S, P = pair.S, pair.P
    Z, s, p = joint_diagonalize(S, P, cfg)
    b1 = np.empty(s.size, dtype=np.complex128)
    b2 = np.empty(s.size, dtype=np.complex128)
    for i, (si, pi) in enumerate(zip(s, p)):
        b1[i], b2[i] = _lex_first(*_boundary_roots(si, pi))
    Zh = adjoint(Z)
    U1 = (Z * b1) @ Zh
    U2 = (Z * b2) @ Zh
    return U1, U2


@dataclass(frozen=True)
class AndoVerdict:
    passed: bool
    residual: float

    def __bool__(self):
        return self.passed


def ando_verify(X, C, cfg=DEFAULT_CONFIG):
    """Check ``X = 2 (I - C*C)^{1/2} C`` for a contraction ``C``."""
    X = as_square(X, "X")
    C = as_square(C, "C")
    if opnorm(C) > 1.0 + cfg.eq_tol:
        raise NotAContraction(f"||C|| = {opnorm(C):.6g} > 1")
    D = defect_operator(C, cfg)
    res = opnorm(X - 2.0 * D @ C)
    ok = res <= cfg.eq_tol * max(1.0, opnorm(X))
    if ok:
        w = numerical_radius(X, cfg)
        assert w.value <= 1.0 + w.error_bound + cfg.eq_tol * max(1.0, opnorm(X)), (
            "verified factorization with omega(X) > 1"
        )
    return AndoVerdict(bool(ok), res)


@dataclass(frozen=True, eq=False)
class AndoResult:
    """``status`` is ``Verified`` or ``BestEffort``."""

    C: np.ndarray
    residual: float
    status: str

    @property
    def verified(self):
        return self.status == "Verified"


def _project_contraction(C):
    U, sv, Vh = np.linalg.svd(C)
    return (U * np.minimum(sv, 1.0)) @ Vh


def ando_factor(X, cfg=DEFAULT_CONFIG, max_nfev=2000):
    """Best-effort contraction ``C`` with ``X = 2 (I - C*C)^{1/2} C``.

    Least squares over the entries of ``C`` (singular values clipped to 1),
    started from ``X / 2``.  Verification by :func:`ando_verify` is the
    contract; when it fails the best iterate is returned as ``BestEffort``.
    """
    X = as_square(X, "X")
    n = X.shape[0]
    w = numerical_radius(X, cfg)
    if w.value > 1.0 + cfg.eq_tol:
        raise OmegaExceedsOne(f"omega(X) = {w.value:.6g} > 1")
    if n == 0 or opnorm(X) == 0.0:
        return AndoResult(np.zeros_like(X), 0.0, "Verified")

    def unpack(v):
        return _project_contraction((v[: n * n] + 1j * v[n * n:]).reshape(n, n))

    def resid(v):
        C = unpack(v)
        D = defect_operator(C, cfg)
        E = X - 2.0 * D @ C
        return np.concatenate((E.real.ravel(), E.imag.ravel()))

    best = None
    starts = [0.5 * X, X / math.sqrt(2.0)]
    for C0 in starts:
        v0 = np.concatenate((C0.real.ravel(), C0.imag.ravel()))
        sol = scipy.optimize.least_squares(
            resid, v0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev
        )
        C = unpack(sol.x)
        verdict = ando_verify(X, C, cfg)
        if best is None or verdict.residual < best[1]:
            best = (C, verdict.residual, verdict.passed)
        if verdict.passed:
            break
    C, res, ok = best
    return AndoResult(C, res, "Verified" if ok else "BestEffort")


def structure_checks(pair, cfg=DEFAULT_CONFIG):
    """Structural consequences for projections, partial isometries and ``P = I``."""
    pair = as_pair(pair, cfg=cfg)
    S, P = pair.S, pair.P
    n = S.shape[0]
    I = np.eye(n)
    tol = cfg.eq_tol
    sc = max(1.0, opnorm(S), opnorm(P))
    out = []

    is_proj = opnorm(P @ P - P) <= tol * sc and opnorm(P - adjoint(P)) <= tol * sc
    if is_proj:
        res = max(opnorm(P @ S @ (I - P)), opnorm((I - P) @ S @ P))
        out.append(StructureCheck("projection_block_diagonal", True, res <= tol * sc, res))
    else:
        out.append(StructureCheck("projection_block_diagonal", False, True))

    Q = adjoint(P) @ P
    if opnorm(Q @ Q - Q) <= tol * sc:
        Sigma = S - adjoint(S) @ P
        res = max(opnorm(Sigma @ Q), opnorm(Q @ Sigma))
        out.append(StructureCheck("partial_isometry_defect_range", True, res <= tol * sc, res))
    else:
        out.append(StructureCheck("partial_isometry_defect_range", False, True))

    if opnorm(P - I) <= tol:
        res = opnorm(S - adjoint(S))
        ok = res <= tol * sc and spectral_radius(S) <= 2.0 + tol
        out.append(StructureCheck("identity_selfadjoint", True, bool(ok), res))
    else:
        out.append(StructureCheck("identity_selfadjoint", False, True))
    return out

"""Scalar geometry of the symmetrized bidisc.

Points are pairs ``(s, p) = (z1 + z2, z1 z2)``.  The verdict of record for
membership is the root oracle: both roots of ``z^2 - s z + p`` must lie in the
closed unit disc.  The inequality characterizations are evaluated alongside it
as cross-checks; the ones that quantify over the disc are only sampled.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError
from .numerics import DEFAULT_CONFIG

__all__ = [
    "GammaPoint",
    "Verdict",
    "CriterionResult",
    "MembershipReport",
    "symmetrize",
    "membership",
    "boundary_parametrize",
    "quadratic_roots",
    "solve_beta",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class GammaPoint:
    s: complex
    p: complex

    def __post_init__(self):
        s, p = complex(self.s), complex(self.p)
        if not (cmath.isfinite(s) and cmath.isfinite(p)):
            raise DomainError(f"non-finite point ({s}, {p})")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "p", p)

    def __iter__(self):
        yield self.s
        yield self.p


class Verdict(str, Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    value: float
    sampled: bool = False
    note: str = ""

    def to_dict(self):
        out = {"name": self.name, "passed": bool(self.passed), "value": float(self.value),
               "sampled": self.sampled}
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class MembershipReport:
    point: GammaPoint
    verdict: Verdict
    on_distinguished_boundary: bool
    criteria: tuple
    witness_beta: complex | None
    roots: tuple
    root_tolerance: float = 0.0
    notes: tuple = field(default_factory=tuple)

    @property
    def in_gamma(self):
        return self.verdict is not Verdict.OUTSIDE

    def criterion(self, name):
        for c in self.criteria:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        def cpx(z):
            return None if z is None else [z.real, z.imag]

        return {
            "point": {"s": cpx(self.point.s), "p": cpx(self.point.p)},
            "verdict": self.verdict.value,
            "on_distinguished_boundary": self.on_distinguished_boundary,
            "criteria": [c.to_dict() for c in self.criteria],
            "witness_beta": cpx(self.witness_beta),
            "roots": [cpx(r) for r in self.roots],
            "root_tolerance": self.root_tolerance,
            "notes": list(self.notes),
        }


def symmetrize(z1, z2):
    """The symmetrization map ``(z1, z2) -> (z1 + z2, z1 z2)``."""
    z1, z2 = complex(z1), complex(z2)
    return GammaPoint(z1 + z2, z1 * z2)


def boundary_parametrize(theta, x):
    """The point ``(2 x e^{i theta/2}, e^{i theta})`` of the distinguished boundary."""
    x = float(x)
    if not -1.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [-1, 1], got {x}")
    theta = float(theta)
    return GammaPoint(2.0 * x * cmath.exp(0.5j * theta), cmath.exp(1j * theta))


def quadratic_roots(s, p):
    """Roots of ``z^2 - s z + p`` without cancellation, larger modulus first."""
    s, p = complex(s), complex(p)
    disc = cmath.sqrt(s * s - 4.0 * p)
    if (s.conjugate() * disc).real < 0:
        disc = -disc
    q = 0.5 * (s + disc)
    if q == 0:
        return 0j, 0j
    return q, p / q


def _root_tolerance(s, p, r1, r2, eq_tol):
    # Rounding in (s, p) moves a simple root by about delta/|r1 - r2| and a
    # double root by about sqrt(delta).
    delta = 8.0 * _EPS * (1.0 + abs(s) + abs(p))
    gap = abs(r1 - r2)
    spread = 2.0 * math.sqrt(delta) if gap == 0 else min(delta / gap, 2.0 * math.sqrt(delta))
    return eq_tol + spread


def solve_beta(s, p, cfg=DEFAULT_CONFIG):
    """A ``beta`` with ``s = beta + conj(beta) p``, or ``None``.

    For ``|p| < 1`` the real 2x2 system has the unique solution
    ``(s - conj(s) p) / (1 - |p|^2)``.  Near ``|p| = 1`` the system is singular
    and a root of ``z^2 - s z + p`` is used instead.
    """
    s, p = complex(s), complex(p)
    det = 1.0 - abs(p) ** 2
    limit = cfg.eq_tol * max(1.0, abs(s))
    if det > 0:
        a, b = p.real, p.imag
        mat = np.array([[1.0 + a, b], [b, 1.0 - a]])
        try:
            x, y = np.linalg.solve(mat, np.array([s.real, s.imag]))
            beta = complex(x, y)
            if abs(s - beta - beta.conjugate() * p) <= limit:
                return beta
        except np.linalg.LinAlgError:
            pass
    best = None
    for r in quadratic_roots(s, p):
        res = abs(s - r - r.conjugate() * p)
        if best is None or res < best[0]:
            best = (res, r)
    if best[0] > limit:
        return None
    return best[1]


def _beta_tolerance(s, p, rtol):
    det = 1.0 - abs(p) ** 2
    if det <= 1e-8:
        return rtol
    return rtol + 8.0 * _EPS * (1.0 + abs(s)) / det


def _disc_grid(cfg, closed):
    """Sample points of the disc, outermost circle first, angle ascending from 0."""
    R, m = cfg.grid_radius, cfg.grid_theta
    j = np.arange(R, 0, -1)
    radii = j / R if closed else (j - 0.5) / R
    angles = 2.0 * np.pi * np.arange(m) / m
    alpha = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    return np.concatenate((alpha, [0j]))


def membership(pt, cfg=DEFAULT_CONFIG, sampled=True):
    """Classify ``pt`` as Interior, Boundary or Outside of the symmetrized bidisc.

    Parameters
    ----------
    pt : GammaPoint or pair of complex
    cfg : ToleranceConfig
    sampled : bool
        Evaluate the disc-quantified criteria (iv), (vi), (vii) on the
        ``grid_radius x grid_theta`` grid.  Disable for bulk scans.
    """
    if not isinstance(pt, GammaPoint):
        pt = GammaPoint(*pt)
    s, p = pt.s, pt.p
    tol = cfg.eq_tol
    r1, r2 = quadratic_roots(s, p)
    rtol = _root_tolerance(s, p, r1, r2, tol)
    mods = (abs(r1), abs(r2))
    if max(mods) > 1.0 + rtol:
        verdict = Verdict.OUTSIDE
    elif any(abs(m - 1.0) <= rtol for m in mods):
        verdict = Verdict.BOUNDARY
    else:
        verdict = Verdict.INTERIOR

    criteria = []
    sigma = abs(s - s.conjugate() * p)
    val = sigma + abs(p * p)
    criteria.append(CriterionResult("ii", val <= 1.0 + tol and abs(s) <= 2.0 + tol, val))
    val = 2.0 * sigma + abs(s * s - 4.0 * p) + abs(s) ** 2
    criteria.append(CriterionResult(
        "iii", val <= 4.0 + 4.0 * tol, val,
        note="evaluated with |s|^2, which equals |s^2| for scalars"))

    beta = solve_beta(s, p, cfg)
    if beta is None:
        criteria.append(CriterionResult("v", False, math.inf, note="no solution found"))
    else:
        res = abs(s - beta - beta.conjugate() * p)
        ok = abs(p) <= 1.0 + tol and abs(beta) <= 1.0 + _beta_tolerance(s, p, rtol) and res <= tol * max(1.0, abs(s))
        criteria.append(CriterionResult("v", bool(ok), abs(beta)))

    if sampled:
        criteria.extend(_sampled_criteria(s, p, cfg))

    on_b = (
        abs(abs(p) - 1.0) <= tol
        and abs(s - s.conjugate() * p) <= tol * max(1.0, abs(s))
        and abs(s) <= 2.0 + tol
    )
    notes = ("criterion iii evaluated with |s|^2",)
    return MembershipReport(pt, verdict, on_b, tuple(criteria), beta, (r1, r2), rtol, notes)


def _sampled_criteria(s, p, cfg):
    tol = cfg.eq_tol
    closed = _disc_grid(cfg, closed=True)
    a_s, a2_p = closed * s, closed * closed * p
    rho = 2.0 * (1.0 - np.abs(a2_p) ** 2) - 2.0 * (a_s - np.conj(a_s) * a2_p).real
    iv = CriterionResult("iv", bool(rho.min() >= -tol * max(1.0, abs(s) ** 2)),
                         float(rho.min()), sampled=True)

    alpha = _disc_grid(cfg, closed=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        den = 2.0 - alpha * s
        q = np.abs((2.0 * alpha * p - s) / den)
        worst_vi = float(np.max(np.where(np.abs(den) > 0, q, np.inf)))
        vi = CriterionResult("vi", abs(s) <= 2.0 + tol and worst_vi <= 1.0 + tol,
                             worst_vi, sampled=True)
        ac = np.conj(alpha)
        den = 1.0 - ac * s + ac * ac * p
        q = np.abs((p - alpha * s + alpha * alpha) / den)
        worst_vii = float(np.max(np.where(np.abs(den) > 0, q, np.inf)))
    vii = CriterionResult("vii", worst_vii <= 1.0 + tol, worst_vii, sampled=True)
    return [iv, vi, vii]

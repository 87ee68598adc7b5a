"""Reproducing kernels on the symmetrized bidisc and finite multiplication sections.

With ``a = 1/((1 - z1 conj(w1))(1 - z2 conj(w2)))`` and
``b = 1/((1 - z1 conj(w2))(1 - z2 conj(w1)))`` the kernels are

* ``symfock(lam)``: ``(a^lam + b^lam) / 2``,
* ``bergman(lam)``: ``(a^lam - b^lam) / (lam (z1 - z2)(conj(w1) - conj(w2)))``,
* ``szego``: ``(a - b) / ((z1 - z2)(conj(w1) - conj(w2)))``.

Each closed form is cross-checked against its series over an orthonormal
basis.  One-variable weights are ``w_m = m! / (lam)_m`` with the rising
factorial, i.e. ``sum_m x^m / w_m = (1 - x)^{-lam}``.

``finite_section`` compresses ``(M_s, M_p)`` to polynomials of bounded
degree.  The orthocomplement is invariant under both multiplications, so the
section is again a Gamma-contraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoConvergence, SingularDenominator
from .numerics import DEFAULT_CONFIG, adjoint, opnorm, psd_check
from .pairs import OperatorPair

__all__ = [
    "KernelSpec",
    "BidiscPoint",
    "GramMatrix",
    "WeightTable",
    "pochhammer_weight",
    "weight_table",
    "eval_kernel",
    "series_kernel",
    "gram",
    "ratio_kernel",
    "ratio_gram",
    "basis_function",
    "basis_coefficients",
    "section_indices",
    "finite_section",
    "transfer_unitary_check",
    "p_chain_cover",
    "disc_quadrature",
    "quadrature_monomial_gram",
    "quadrature_weight",
    "quadrature_inner",
    "SINGULAR_THRESHOLD",
]

SINGULAR_THRESHOLD = 1e-6
_SERIES_CAP = 4000


def pochhammer_weight(lam, m):
    """``m! / (lam (lam + 1) ... (lam + m - 1))``; identically 1 for ``lam = 1``."""
    lam = float(lam)
    if not lam >= 1.0:
        raise DomainError(f"lambda must be >= 1, got {lam}")
    m = int(m)
    if m < 0:
        raise DomainError(f"m must be nonnegative, got {m}")
    w = 1.0
    for j in range(m):
        w *= (j + 1.0) / (lam + j)
    return w


def _weights(lam, count):
    w = np.empty(count)
    acc = 1.0
    for j in range(count):
        w[j] = acc
        acc *= (j + 1.0) / (lam + j)
    return w


@dataclass(frozen=True)
class WeightTable:
    lam: float
    weights: tuple


def weight_table(lam, count):
    if float(lam) < 1.0:
        raise DomainError(f"lambda must be >= 1, got {lam}")
    return WeightTable(float(lam), tuple(_weights(float(lam), int(count))))


@dataclass(frozen=True)
class KernelSpec:
    """``kind`` is ``szego``, ``bergman`` or ``symfock``; ``truncation`` selects series mode."""

    kind: str
    lam: float = 1.0
    truncation: int | None = None
    series_fallback: bool = True

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in ("szego", "bergman", "symfock"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        lam = float(self.lam)
        if kind == "szego":
            lam = 1.0
        elif kind == "bergman" and not lam > 1.0:
            raise DomainError(f"Bergman kernel needs lambda > 1, got {lam}")
        elif kind == "symfock" and not lam >= 1.0:
            raise DomainError(f"symmetric Fock kernel needs lambda >= 1, got {lam}")
        object.__setattr__(self, "lam", lam)
        if self.truncation is not None and int(self.truncation) < 1:
            raise ValueError("series truncation must be positive")

    @classmethod
    def parse(cls, text, truncation=None):
        """``szego``, ``bergman:LAM`` or ``symfock:LAM``."""
        kind, _, lam = text.partition(":")
        return cls(kind, float(lam) if lam else 1.0, truncation)

    @property
    def eval_mode(self):
        return "ClosedForm" if self.truncation is None else f"Series({self.truncation})"

    @property
    def label(self):
        return "szego" if self.kind == "szego" else f"{self.kind}:{self.lam:g}"


@dataclass(frozen=True)
class BidiscPoint:
    z1: complex
    z2: complex

    def __post_init__(self):
        z1, z2 = complex(self.z1), complex(self.z2)
        if not (abs(z1) < 1.0 and abs(z2) < 1.0):
            raise DomainError(f"point ({z1}, {z2}) is not inside the open bidisc")
        object.__setattr__(self, "z1", z1)
        object.__setattr__(self, "z2", z2)


def _pt(z):
    return z if isinstance(z, BidiscPoint) else BidiscPoint(*z)


def _cpow(x, lam):
    if float(lam).is_integer():
        return x ** int(lam)
    return np.exp(lam * np.log(x))


def _ab(z1, z2, w1, w2, lam):
    """``a^lam`` and ``b^lam`` with the power taken on each factor."""
    c1, c2 = np.conj(w1), np.conj(w2)
    a = _cpow(1.0 / (1.0 - z1 * c1), lam) * _cpow(1.0 / (1.0 - z2 * c2), lam)
    b = _cpow(1.0 / (1.0 - z1 * c2), lam) * _cpow(1.0 / (1.0 - z2 * c1), lam)
    return a, b


def _closed(spec, z1, z2, w1, w2):
    a, b = _ab(z1, z2, w1, w2, spec.lam)
    if spec.kind == "symfock":
        return 0.5 * (a + b)
    den = (z1 - z2) * np.conj(w1 - w2)
    if spec.kind == "bergman":
        return (a - b) / (spec.lam * den)
    return (a - b) / den


def _h_table(s, p, count):
    """``h_k(z1, z2)`` for ``k < count`` via ``h_k = s h_{k-1} - p h_{k-2}``."""
    h = np.zeros(max(count, 2), dtype=np.complex128)
    h[0] = 1.0
    if count > 1:
        h[1] = s
    for k in range(2, count):
        h[k] = s * h[k - 1] - p * h[k - 2]
    return h[:count]


def _ratio_tail(r, lam, N, power=0):
    """Bound on ``sum_{m >= N} m^power r^m / w_m`` from the term ratio."""
    if r == 0.0:
        return 0.0
    growth = ((N + 1.0) / N) ** power if N > 0 else 2.0 ** power
    q = r * (lam + N) / (N + 1.0) * growth
    if q >= 1.0:
        return math.inf
    first = (N ** power) * r ** N / pochhammer_weight(lam, N) if N > 0 else 1.0
    return first / (1.0 - q)


def series_kernel(spec, z, w, truncation):
    """Basis-series value and a rigorous tail bound.

    ``symfock`` sums ``f_mn(z) conj(f_mn(w))`` over ``n <= m < truncation``;
    the other kinds sum ``eps_mn(z) conj(eps_mn(w)) / (w_m w_n)`` over
    ``n < m < truncation`` with ``eps_mn = (z1 z2)^n h_{m-n-1}``.
    """
    z, w = _pt(z), _pt(w)
    N = int(truncation)
    lam = spec.lam
    wt = _weights(lam, N + 1)
    if spec.kind == "symfock":
        zm1 = z.z1 ** np.arange(N)
        zm2 = z.z2 ** np.arange(N)
        wm1 = np.conj(w.z1) ** np.arange(N)
        wm2 = np.conj(w.z2) ** np.arange(N)
        # Sum over all ordered (m, n) of z1^m z2^n (conj w1^m conj w2^n + conj w1^n conj w2^m) / 2.
        inv = 1.0 / wt[:N]
        A = np.outer(zm1 * wm1 * inv, zm2 * wm2 * inv)
        B = np.outer(zm1 * wm2 * inv, zm2 * wm1 * inv)
        value = 0.5 * complex(A.sum() + B.sum())
        r = max(abs(z.z1), abs(z.z2)) * max(abs(w.z1), abs(w.z2))
        full = (1.0 - r) ** (-lam) if r < 1 else math.inf
        tail = 2.0 * full * _ratio_tail(r, lam, N)
        return value, tail

    sz, pz = z.z1 + z.z2, z.z1 * z.z2
    sw, pw = w.z1 + w.z2, w.z1 * w.z2
    hz = _h_table(sz, pz, N)
    hw = np.conj(_h_table(sw, pw, N))
    ppz = pz ** np.arange(N)
    ppw = np.conj(pw) ** np.arange(N)
    value = 0j
    for m in range(1, N):
        n = np.arange(m)
        terms = ppz[n] * hz[m - n - 1] * ppw[n] * hw[m - n - 1] / (wt[m] * wt[n])
        value += complex(terms.sum())
    if spec.kind == "bergman":
        value /= lam
    r = max(abs(z.z1), abs(z.z2)) * max(abs(w.z1), abs(w.z2))
    if r == 0.0:
        tail = 0.0
    else:
        full = (1.0 - r) ** (-lam) if r < 1 else math.inf
        tail = full * _ratio_tail(r, lam, N, power=2) / r
        if spec.kind == "bergman":
            tail /= lam
    return value, tail


def _adaptive_series(spec, z, w, rel=1e-15):
    N = 32
    while True:
        value, tail = series_kernel(spec, z, w, N)
        if tail <= rel * max(1.0, abs(value)):
            return value, tail
        if N >= _SERIES_CAP:
            raise NoConvergence(f"kernel series tail {tail:.3e} at {N} terms", max_size=N)
        N *= 2


def eval_kernel(spec, z, w):
    """Kernel value at ``(z, w)``.

    Closed form by default; near the singular set
    ``|z1 - z2| |w1 - w2| < 1e-6`` the divided-difference kernels switch to
    the basis series (adaptive truncation).  With ``spec.truncation`` set the
    fixed-length series is returned instead.
    """
    z, w = _pt(z), _pt(w)
    if spec.truncation is not None:
        return series_kernel(spec, z, w, spec.truncation)[0]
    if spec.kind != "symfock" and abs(z.z1 - z.z2) * abs(w.z1 - w.z2) < SINGULAR_THRESHOLD:
        if not spec.series_fallback:
            raise SingularDenominator("points too close to the diagonal z1 = z2")
        return _adaptive_series(spec, z, w)[0]
    return complex(_closed(spec, z.z1, z.z2, w.z1, w.z2))


@dataclass(frozen=True, eq=False)
class GramMatrix:
    points: tuple
    values: np.ndarray
    psd_verdict: object
    min_eigenvalue: float
    label: str = ""

    def to_dict(self):
        from .io import matrix_to_json

        return {
            "kernel": self.label,
            "points": [[[p.z1.real, p.z1.imag], [p.z2.real, p.z2.imag]] for p in self.points],
            "values": matrix_to_json(self.values),
            "psd_verdict": "PSD" if self.psd_verdict else "NotPSD",
            "min_eigenvalue": self.min_eigenvalue,
        }


def _finish_gram(points, G, cfg, label):
    G = 0.5 * (G + adjoint(G))
    verdict = psd_check(G, cfg)
    return GramMatrix(tuple(points), G, verdict, verdict.min_eigenvalue, label)


def gram(spec, points, cfg=DEFAULT_CONFIG):
    """Gram matrix ``K(z_i, z_j)`` with its PSD verdict."""
    pts = [_pt(p) for p in points]
    n = len(pts)
    G = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            G[i, j] = eval_kernel(spec, pts[i], pts[j])
    return _finish_gram(pts, G, cfg, spec.label)


def ratio_kernel(n, z, w):
    """``(1/n) sum_{k<n} a^{n-1-k} b^k``, the ratio of ``bergman(n)`` to ``szego``."""
    n = int(n)
    if n < 1:
        raise DomainError("n must be a positive integer")
    z, w = _pt(z), _pt(w)
    a, b = _ab(z.z1, z.z2, w.z1, w.z2, 1)
    return complex(sum(a ** (n - 1 - k) * b ** k for k in range(n)) / n)


def ratio_gram(n, points, cfg=DEFAULT_CONFIG):
    pts = [_pt(p) for p in points]
    m = len(pts)
    G = np.empty((m, m), dtype=np.complex128)
    for i in range(m):
        for j in range(m):
            G[i, j] = ratio_kernel(n, pts[i], pts[j])
    return _finish_gram(pts, G, cfg, f"ratio:{int(n)}")


def _check_index(m, n, family):
    if family == "symmetric":
        if not m >= n >= 0:
            raise IndexError(f"symmetric basis needs m >= n >= 0, got ({m}, {n})")
    elif family == "antisymmetric":
        if not m > n >= 0:
            raise IndexError(f"antisymmetric basis needs m > n >= 0, got ({m}, {n})")
    else:
        raise ValueError(f"unknown family {family!r}")


def _norm_sq(lam, m, n, family):
    wm, wn = pochhammer_weight(lam, m), pochhammer_weight(lam, n)
    if family == "symmetric" and m == n:
        return wn * wn
    return 2.0 * wm * wn


def basis_function(lam, m, n, z, family="symmetric", normalized=True):
    """Symmetric ``f_mn`` or antisymmetric ``e_mn`` basis function at ``z``.

    Unnormalized forms are ``z1^m z2^n + z1^n z2^m`` (``(z1 z2)^n`` on the
    diagonal) and ``z1^m z2^n - z1^n z2^m``.
    """
    m, n = int(m), int(n)
    _check_index(m, n, family)
    z1, z2 = (z.z1, z.z2) if isinstance(z, BidiscPoint) else (complex(z[0]), complex(z[1]))
    if family == "symmetric":
        raw = (z1 * z2) ** n if m == n else z1 ** m * z2 ** n + z1 ** n * z2 ** m
    else:
        raw = z1 ** m * z2 ** n - z1 ** n * z2 ** m
    if not normalized:
        return complex(raw)
    return complex(raw / math.sqrt(_norm_sq(lam, m, n, family)))


def basis_coefficients(lam, m, n, family="symmetric", normalized=True, size=None):
    """Coefficient array ``C[a, b]`` of ``z1^a z2^b`` for a basis function."""
    _check_index(m, n, family)
    size = size or m + 1
    C = np.zeros((size, size))
    if family == "symmetric":
        if m == n:
            C[n, n] = 1.0
        else:
            C[m, n] = C[n, m] = 1.0
    else:
        C[m, n], C[n, m] = 1.0, -1.0
    if normalized:
        C /= math.sqrt(_norm_sq(lam, m, n, family))
    return C


def section_indices(M, family):
    """Basis indices ``(m, n)`` with ``m <= M``, ordered by ``m`` then ``n``."""
    if family == "symmetric":
        return [(m, n) for m in range(M + 1) for n in range(m + 1)]
    return [(m, n) for m in range(1, M + 1) for n in range(m)]


def _s_action(m, n, family):
    """``(coefficient, target)`` pairs of ``s * g_mn`` in the unnormalized basis."""
    if family == "antisymmetric":
        out = [(1.0, (m + 1, n))]
        if n + 1 < m:
            out.append((1.0, (m, n + 1)))
        return out
    if m == n:
        return [(1.0, (n + 1, n))]
    if m == n + 1:
        return [(1.0, (m + 1, n)), (2.0, (m, m))]
    return [(1.0, (m + 1, n)), (1.0, (m, n + 1))]


def _section_matrices(lam, M, family):
    idx = section_indices(M, family)
    pos = {ix: k for k, ix in enumerate(idx)}
    norms = np.array([math.sqrt(_norm_sq(lam, m, n, family)) for m, n in idx])
    d = len(idx)
    S = np.zeros((d, d), dtype=np.complex128)
    P = np.zeros((d, d), dtype=np.complex128)
    for col, (m, n) in enumerate(idx):
        for coef, tgt in _s_action(m, n, family):
            row = pos.get(tgt)
            if row is not None:
                S[row, col] = coef * norms[row] / norms[col]
        row = pos.get((m + 1, n + 1))
        if row is not None:
            P[row, col] = norms[row] / norms[col]
    return S, P, idx


def finite_section(lam, M, family="antisymmetric", cfg=DEFAULT_CONFIG):
    """Compression of ``(M_{z1+z2}, M_{z1 z2})`` to basis indices with ``m <= M``."""
    M = int(M)
    if M < 2:
        raise ValueError("cutoff must be at least 2")
    family = _family(family)
    if float(lam) < 1.0:
        raise DomainError(f"lambda must be >= 1, got {lam}")
    S, P, _ = _section_matrices(float(lam), M, family)
    return OperatorPair.from_matrices(S, P, cfg)


def _family(name):
    name = name.lower()
    if name in ("a", "anti", "antisymmetric"):
        return "antisymmetric"
    if name in ("s", "sym", "symmetric"):
        return "symmetric"
    raise ValueError(f"unknown family {name!r}")


def _eps_poly(m, n, size):
    """``eps_mn = p^n h_{m-n-1}(s, p)`` as a coefficient array ``c[i, j]`` of ``s^i p^j``."""
    k = m - n - 1
    hs = [np.zeros((size, size)), np.zeros((size, size))]
    hs[0][0, 0] = 1.0
    hs[1][1, 0] = 1.0
    for _ in range(2, k + 1):
        nxt = np.zeros((size, size))
        nxt[1:, :] += hs[-1][:-1, :]
        nxt[:, 1:] -= hs[-2][:, :-1]
        hs.append(nxt)
    h = hs[k]
    out = np.zeros((size, size))
    out[:, n:] = h[:, : size - n]
    return out


def _gamma_side_section(lam, M):
    """Section of ``(M_s, M_p)`` on the ``eps`` basis built from polynomials in ``(s, p)``."""
    idx = section_indices(M + 1, "antisymmetric")
    size = M + 3
    basis = np.array([_eps_poly(m, n, size).ravel() for m, n in idx]).T
    keep = [k for k, (m, _) in enumerate(idx) if m <= M]
    norms = np.array([math.sqrt(_norm_sq(lam, m, n, "antisymmetric")) for m, n in idx])
    d = len(keep)
    S = np.zeros((d, d), dtype=np.complex128)
    P = np.zeros((d, d), dtype=np.complex128)
    for c, k in enumerate(keep):
        m, n = idx[k]
        poly = _eps_poly(m, n, size)
        for target, mat in ((np.roll(poly, 1, axis=0), S), (np.roll(poly, 1, axis=1), P)):
            coef, *_ = np.linalg.lstsq(basis, target.ravel(), rcond=None)
            for r, k2 in enumerate(keep):
                mat[r, c] = coef[k2] * norms[k2] / norms[k]
    return S, P


@dataclass(frozen=True)
class TransferReport:
    lam: float
    cutoff: int
    s_difference: float
    p_difference: float
    isometry_defect: float | None
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


def transfer_unitary_check(lam, M, cfg=DEFAULT_CONFIG):
    """Compare the bidisc-side and symmetrized-side sections.

    The map ``f -> (f o pi) (z1 - z2)`` sends ``eps_mn`` to ``e_mn``, so with
    matching norms both sections must coincide.  For ``lam = 1`` the
    Gamma-isometry identities ``P*P = I`` and ``S = S*P`` are checked on the
    columns whose images stay below the cutoff.
    """
    M = int(M)
    S1, P1, idx = _section_matrices(float(lam), M, "antisymmetric")
    S2, P2 = _gamma_side_section(float(lam), M)
    ds, dp = opnorm(S1 - S2), opnorm(P1 - P2)
    defect = None
    ok = ds <= cfg.eq_tol and dp <= cfg.eq_tol
    if float(lam) == 1.0:
        cols = [k for k, (m, _) in enumerate(idx) if m + 1 <= M]
        if cols:
            I = np.eye(len(idx))
            d1 = opnorm(((adjoint(P1) @ P1) - I)[:, cols])
            d2 = opnorm((S1 - adjoint(S1) @ P1)[:, cols])
            defect = max(d1, d2)
        else:
            defect = 0.0
        ok = ok and defect <= cfg.eq_tol
    return TransferReport(float(lam), M, ds, dp, defect, bool(ok))


def p_chain_cover(M):
    """Whether the chains ``(m0 + k, k)`` started at ``(m0, 0)`` cover every ``m > n`` index."""
    covered = set()
    for m0 in range(1, M + 1):
        k = 0
        while m0 + k <= M:
            covered.add((m0 + k, k))
            k += 1
    return covered == set(section_indices(M, "antisymmetric"))


def disc_quadrature(lam, n_radial=64, n_angle=128):
    """Nodes and weights for ``((lam - 1)/pi) (1 - |z|^2)^{lam - 2} dA`` on the disc.

    Gauss-Legendre in ``t = |z|^2`` times the trapezoid rule in angle.
    """
    lam = float(lam)
    if not lam > 1.0:
        raise DomainError("the weighted area measure needs lambda > 1")
    t, wt = np.polynomial.legendre.leggauss(n_radial)
    t = 0.5 * (t + 1.0)
    wt = 0.5 * wt * (lam - 1.0) * (1.0 - t) ** (lam - 2.0)
    theta = 2.0 * np.pi * np.arange(n_angle) / n_angle
    nodes = (np.sqrt(t)[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = (wt[:, None] * np.full(n_angle, 1.0 / n_angle)[None, :]).ravel()
    return nodes, weights


def quadrature_monomial_gram(lam, degree, n_radial=64, n_angle=128):
    """``G[j, k] = integral of z^j conj(z)^k`` under the weighted disc measure."""
    nodes, weights = disc_quadrature(lam, n_radial, n_angle)
    V = nodes[None, :] ** np.arange(degree + 1)[:, None]
    return (V * weights[None, :]) @ adjoint(V)


def quadrature_weight(lam, m, **kw):
    return float(quadrature_monomial_gram(lam, m, **kw)[m, m].real)


def quadrature_inner(C1, C2, G):
    """``<f, g>`` for coefficient arrays under the product measure with 1-d Gram ``G``."""
    d = G.shape[0]
    A = np.zeros((d, d), dtype=np.complex128)
    B = np.zeros((d, d), dtype=np.complex128)
    A[: C1.shape[0], : C1.shape[1]] = C1
    B[: C2.shape[0], : C2.shape[1]] = C2
    return complex(np.sum(A * (G @ np.conj(B) @ G.T)))

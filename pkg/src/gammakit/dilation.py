"""Explicit Gamma-isometric dilations and their verification.

``build_schaffer_dilation`` assembles the block operators ``(T_A, V_0)`` on
``H + D_P + D_P + ...`` truncated to ``N`` defect blocks.  Both are block
lower triangular, so ``H`` is co-invariant and compressions of polynomials
are exact for every truncation.  Identities involving adjoints only hold on
the blocks that do not see the cut, which is why the checks are restricted
to the first ``N - 1`` defect blocks.

``build_model_dilation`` realizes the functional model on
``H^2 (x) D_{P*}`` with ``T = I (x) B* + M_z (x) B`` and ``V = M_z (x) I``,
truncated to ``N`` Taylor coefficients.  Its checks work blockwise because
``N`` can be in the hundreds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelNotVerified, NormTooLarge, ResidualTooLarge, ShapeError, SingularSystem
from .fundamental import FundamentalSolution, solve_fundamental, solve_fundamental_adjoint
from .numerics import (
    DEFAULT_CONFIG,
    adjoint,
    defect_decomposition,
    numerical_radius,
    opnorm,
    spectral_radius,
)
from .pairs import as_pair

COMPRESSION_TOL = 1e-11

__all__ = [
    "TruncatedDilation",
    "ModelDilation",
    "build_schaffer_dilation",
    "schaffer_blocks",
    "verify_dilation",
    "uniqueness_probe",
    "build_model_dilation",
    "verify_model_intertwining",
    "extract_C",
    "solve_C_unique",
    "minimality_check",
    "toeplitz_section",
]


@dataclass(frozen=True, eq=False)
class TruncatedDilation:
    n_blocks: int
    dim_H: int
    dim_defect: int
    T_A: np.ndarray
    V_0: np.ndarray
    A: np.ndarray
    S: np.ndarray
    P: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def size(self):
        return self.dim_H + self.n_blocks * self.dim_defect

    def embedding(self):
        E = np.zeros((self.size, self.dim_H), dtype=np.complex128)
        E[: self.dim_H] = np.eye(self.dim_H)
        return E

    def interior(self):
        """Index range of ``H`` plus the first ``N - 1`` defect blocks."""
        return self.dim_H + (self.n_blocks - 1) * self.dim_defect

    def to_dict(self):
        from .io import matrix_to_json

        return {
            "n_blocks": self.n_blocks,
            "dim_H": self.dim_H,
            "dim_defect": self.dim_defect,
            "T_A": matrix_to_json(self.T_A),
            "V_0": matrix_to_json(self.V_0),
            "meta": dict(self.meta),
        }

    @classmethod
    def from_dict(cls, doc):
        from .io import InstanceFormatError, matrix_from_json

        try:
            N, n, k = int(doc["n_blocks"]), int(doc["dim_H"]), int(doc["dim_defect"])
            T = matrix_from_json(doc["T_A"])
            V = matrix_from_json(doc["V_0"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceFormatError(f"bad dilation document: {exc}") from exc
        size = n + N * k
        if T.shape != (size, size) or V.shape != (size, size):
            raise InstanceFormatError("dilation matrices do not match the block layout")
        A = T[n:n + k, n:n + k] if k else np.zeros((0, 0), dtype=np.complex128)
        return cls(N, n, k, T, V, A, T[:n, :n].copy(), V[:n, :n].copy(), dict(doc.get("meta", {})))


def schaffer_blocks(S, P, A, D, N):
    """Dense ``(T_A, V_0)`` from ``S, P``, ``A`` (k x k) and ``D`` (k x n)."""
    n = S.shape[0]
    k = A.shape[0]
    if D.shape != (k, n):
        raise ShapeError(f"D must be {(k, n)}, got {D.shape}")
    size = n + N * k
    T = np.zeros((size, size), dtype=np.complex128)
    V = np.zeros((size, size), dtype=np.complex128)
    T[:n, :n] = S
    V[:n, :n] = P
    if k == 0:
        return T, V
    Ah = adjoint(A)

    def blk(j):
        return slice(n + j * k, n + (j + 1) * k)

    T[blk(0), :n] = Ah @ D
    V[blk(0), :n] = D
    for j in range(N):
        T[blk(j), blk(j)] = A
        if j >= 1:
            T[blk(j), blk(j - 1)] = Ah
            V[blk(j), blk(j - 1)] = np.eye(k)
    return T, V


def build_schaffer_dilation(pair, A=None, N=10, cfg=DEFAULT_CONFIG):
    """Truncated dilation ``(T_A, V_0)`` with ``N`` defect blocks."""
    pair = as_pair(pair, cfg=cfg)
    N = int(N)
    if N < 2:
        raise ValueError("need at least 2 defect blocks")
    if A is None:
        A = solve_fundamental(pair, cfg)
    if not isinstance(A, FundamentalSolution):
        raise TypeError("A must be a FundamentalSolution")
    if A.residual > cfg.eq_tol:
        raise ResidualTooLarge(f"fundamental residual {A.residual:.3e} exceeds {cfg.eq_tol:.1e}")
    D = A.defect_values[:, None] * adjoint(A.basis)
    T, V = schaffer_blocks(pair.S, pair.P, A.A, D, N)
    meta = {"residual": A.residual, "omega_A": A.omega}
    return TruncatedDilation(N, pair.dim, A.dim, T, V, A.A.copy(), pair.S, pair.P, meta)


def toeplitz_section(A, n):
    """The ``n x n`` block section with ``A`` on the diagonal and ``A*`` below it."""
    k = A.shape[0]
    M = np.zeros((n * k, n * k), dtype=np.complex128)
    Ah = adjoint(A)
    for j in range(n):
        M[j * k:(j + 1) * k, j * k:(j + 1) * k] = A
        if j:
            M[j * k:(j + 1) * k, (j - 1) * k:j * k] = Ah
    return M


@dataclass(frozen=True)
class DilationReport:
    compression: float
    commutation: float
    isometry: float
    t_identity: float
    section_norm: float
    spectral_radius_S: float
    scale: float
    checked_blocks: int
    max_degree: int
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


def _first_column_powers(T, V, n, max_degree):
    """``{(i, j): T^i V^j E}`` for ``i + j <= max_degree``."""
    size = T.shape[0]
    E = np.zeros((size, n), dtype=np.complex128)
    E[:n] = np.eye(n)
    vj = [E]
    for _ in range(max_degree):
        vj.append(V @ vj[-1])
    out = {}
    for j, col in enumerate(vj):
        cur = col
        for i in range(max_degree - j + 1):
            out[(i, j)] = cur
            cur = T @ cur
    return out


def verify_dilation(dil, max_degree=4, cfg=DEFAULT_CONFIG):
    """Residuals of the dilation identities.

    Compression is checked for all monomials of degree ``<= max_degree``.
    Commutation is exact for lower triangular truncations and checked on the
    full matrices.  ``V*V = I`` and ``T = T*V`` are checked on ``H`` plus the
    first ``N - 1`` defect blocks.
    """
    if dil.n_blocks < max_degree + 1 and dil.dim_defect:
        raise ValueError("n_blocks must exceed max_degree")
    S, P, T, V = dil.S, dil.P, dil.T_A, dil.V_0
    n, k = dil.dim_H, dil.dim_defect
    sc = max(1.0, opnorm(S), opnorm(P))
    powers = _first_column_powers(T, V, n, max_degree)
    comp = 0.0
    Si = [np.eye(n)]
    for _ in range(max_degree):
        Si.append(Si[-1] @ S)
    Pj = [np.eye(n)]
    for _ in range(max_degree):
        Pj.append(Pj[-1] @ P)
    for (i, j), col in powers.items():
        res = opnorm(col[:n] - Si[i] @ Pj[j]) / sc ** (i + j)
        comp = max(comp, res)

    m = dil.interior()
    comm = opnorm(T @ V - V @ T)
    Vi = V[:, :m]
    iso = opnorm((adjoint(Vi) @ Vi) - np.eye(m))
    tid = opnorm(T[:m, :m] - (adjoint(T[:, :m]) @ Vi))
    sec = opnorm(toeplitz_section(dil.A, dil.n_blocks - 1)) if k else 0.0
    r = spectral_radius(S)
    tol = cfg.eq_tol * sc
    passed = (
        comp <= COMPRESSION_TOL
        and comm <= tol
        and iso <= tol
        and tid <= tol
        and sec <= 2.0 + cfg.eq_tol
        and r <= 2.0 + cfg.eq_tol
    )
    return DilationReport(comp, comm, iso, tid, sec, r, sc, dil.n_blocks - 1, max_degree, bool(passed))


def uniqueness_probe(pair, sol, N=10, eps=0.1, rng=None, cfg=DEFAULT_CONFIG):
    """Largest interior-identity violation after replacing ``A`` by ``A + eps E``.

    ``E`` is a random complex direction of unit Frobenius norm.  Returns
    ``None`` when the defect space is trivial.
    """
    pair = as_pair(pair, cfg=cfg)
    k = sol.dim
    if k == 0:
        return None
    rng = np.random.default_rng(rng)
    E = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    E /= np.linalg.norm(E)
    D = sol.defect_values[:, None] * adjoint(sol.basis)
    T, V = schaffer_blocks(pair.S, pair.P, sol.A + eps * E, D, N)
    m = pair.dim + (N - 1) * k
    Vi = V[:, :m]
    comm = opnorm(T @ V - V @ T)
    tid = opnorm(T[:m, :m] - adjoint(T[:, :m]) @ Vi)
    return max(comm, tid)


@dataclass(frozen=True, eq=False)
class ModelDilation:
    """Truncated functional model ``(T, V)`` on ``N`` copies of ``D_{P*}``.

    ``W_blocks[j]`` is ``D_{P*} P*^j`` in defect coordinates; ``W`` stacks
    them and ``L = W*``.
    """

    n_levels: int
    B: np.ndarray
    W_blocks: np.ndarray
    tail_bound: float
    adjoint_solution: FundamentalSolution | None = None

    @property
    def dim_defect(self):
        return self.B.shape[0]

    @property
    def empty(self):
        return self.dim_defect == 0

    @property
    def W(self):
        N, k, n = self.W_blocks.shape
        return self.W_blocks.reshape(N * k, n)

    @property
    def L(self):
        return adjoint(self.W)

    @property
    def T(self):
        k, N = self.dim_defect, self.n_levels
        M = np.zeros((N * k, N * k), dtype=np.complex128)
        Bh = adjoint(self.B)
        for j in range(N):
            M[j * k:(j + 1) * k, j * k:(j + 1) * k] = Bh
            if j:
                M[j * k:(j + 1) * k, (j - 1) * k:j * k] = self.B
        return M

    @property
    def V(self):
        k, N = self.dim_defect, self.n_levels
        return np.kron(np.eye(N, k=-1), np.eye(k)).astype(np.complex128)


def _model_blocks(Pstar_dec, Pstar, N):
    n = Pstar.shape[0]
    k = Pstar_dec.dim
    W = np.zeros((N, k, n), dtype=np.complex128)
    cur = np.eye(n, dtype=np.complex128)
    D = Pstar_dec.coords()
    for j in range(N):
        W[j] = D @ cur
        cur = Pstar @ cur
    return W, cur


def build_model_dilation(pair, B=None, N=40, cfg=DEFAULT_CONFIG):
    """Truncated model dilation with ``N`` levels; ``tail_bound = ||P*^N||``."""
    pair = as_pair(pair, cfg=cfg)
    N = int(N)
    if N < 1:
        raise ValueError("need at least one level")
    if B is None:
        B = solve_fundamental_adjoint(pair, cfg)
    Ph = adjoint(pair.P)
    dec = defect_decomposition(Ph, cfg)
    W, tail_power = _model_blocks(dec, Ph, N)
    return ModelDilation(N, B.A.copy(), W, opnorm(tail_power), B)


@dataclass(frozen=True)
class ModelReport:
    intertwining_V: float
    intertwining_T: float
    isometry_defect: float
    tail_bound: float
    allowance: float
    passed: bool
    empty: bool = False

    def to_dict(self):
        return dict(self.__dict__)


def _model_residuals(W, B, S, P):
    """Blockwise ``||LV - PL||``, ``||LT - SL||`` and ``||W*W - I||``."""
    N = W.shape[0]
    n = S.shape[0]
    Bh = adjoint(B)
    Lb = [adjoint(W[j]) for j in range(N)]
    zero = np.zeros_like(Lb[0])
    lv = np.hstack([(Lb[j + 1] if j + 1 < N else zero) - P @ Lb[j] for j in range(N)])
    lt = np.hstack([
        Lb[j] @ Bh + (Lb[j + 1] @ B if j + 1 < N else zero) - S @ Lb[j] for j in range(N)
    ])
    gram = sum(Lb[j] @ W[j] for j in range(N))
    return opnorm(lv), opnorm(lt), opnorm(gram - np.eye(n))


def verify_model_intertwining(model, pair, cfg=DEFAULT_CONFIG):
    """Check ``LV = PL``, ``LT = SL`` and ``W*W = I`` up to the truncation tail."""
    pair = as_pair(pair, cfg=cfg)
    S, P = pair.S, pair.P
    sc = max(1.0, opnorm(S), opnorm(P))
    if model.empty:
        return ModelReport(0.0, 0.0, 0.0, model.tail_bound, 0.0, True, empty=True)
    lv, lt, iso = _model_residuals(model.W_blocks, model.B, S, P)
    wnorm = math.sqrt(max(0.0, opnorm(sum(adjoint(w) @ w for w in model.W_blocks))))
    c = 2.0 * sc * max(1.0, wnorm)
    allowance = cfg.eq_tol * sc + c * model.tail_bound
    passed = lv <= allowance and lt <= allowance and iso <= model.tail_bound ** 2 + cfg.eq_tol
    return ModelReport(lv, lt, iso, model.tail_bound, allowance, bool(passed))


@dataclass(frozen=True, eq=False)
class CExtraction:
    C: np.ndarray
    C1: np.ndarray
    residual: float
    residual_C1: float
    omega: float
    omega_C1: float
    allowance: float


def _compress_model(W, M):
    return sum(adjoint(W[j]) @ M @ W[j] for j in range(W.shape[0]))


def extract_C(pair, model, cfg=DEFAULT_CONFIG, verify=True):
    """``C = W* (I (x) B*) W`` with ``S = C + P C*``, and ``C1`` with ``S = C1 + C1* P``."""
    pair = as_pair(pair, cfg=cfg)
    if model.empty:
        raise ModelNotVerified("empty model: the defect space of P* is trivial")
    if verify and not verify_model_intertwining(model, pair, cfg).passed:
        raise ModelNotVerified("model intertwining residuals exceed the truncation allowance")
    S, P = pair.S, pair.P
    C = _compress_model(model.W_blocks, adjoint(model.B))

    sol = solve_fundamental(pair, cfg)
    dec = defect_decomposition(P, cfg)
    W1, _ = _model_blocks(dec, P, model.n_levels)
    C1 = _compress_model(W1, sol.A)

    sc = max(1.0, opnorm(S), opnorm(P))
    allowance = cfg.eq_tol * sc + 2.0 * sc * model.tail_bound
    return CExtraction(
        C, C1,
        opnorm(S - C - P @ adjoint(C)),
        opnorm(S - C1 - adjoint(C1) @ P),
        numerical_radius(C, cfg).value,
        numerical_radius(C1, cfg).value,
        allowance,
    )


def solve_C_unique(pair, cfg=DEFAULT_CONFIG):
    """The unique ``C`` with ``C + C* P = S`` when ``||P|| < 1``.

    The map ``C -> C + C*P`` is real-linear; it is assembled on the real
    and imaginary parts of the entries and solved directly.  Its smallest
    singular value is at least ``1 - ||P||``.
    """
    pair = as_pair(pair, cfg=cfg)
    S, P = pair.S, pair.P
    n = S.shape[0]
    normP = opnorm(P)
    if normP >= 1.0 - cfg.eq_tol:
        raise NormTooLarge(f"||P|| = {normP:.6g} is not below 1")
    m = n * n
    M = np.zeros((2 * m, 2 * m))
    for idx in range(2 * m):
        E = np.zeros(m, dtype=np.complex128)
        E[idx % m] = 1.0 if idx < m else 1.0j
        E = E.reshape(n, n)
        out = E + adjoint(E) @ P
        M[:, idx] = np.concatenate((out.real.ravel(), out.imag.ravel()))
    sv = np.linalg.svd(M, compute_uv=False) if m else np.array([1.0])
    smin = float(sv[-1])
    if smin <= 0.5 * (1.0 - normP) - cfg.eq_tol:
        raise SingularSystem(f"smallest singular value {smin:.3e} below the uniqueness bound")
    rhs = np.concatenate((S.real.ravel(), S.imag.ravel()))
    x = np.linalg.solve(M, rhs) if m else rhs
    return (x[:m] + 1j * x[m:]).reshape(n, n)


@dataclass(frozen=True)
class MinimalityReport:
    rank: int
    expected: int
    minimal: bool
    horizon_blocks: int
    note: str = "rank computed up to the truncation horizon only"

    def to_dict(self):
        return dict(self.__dict__)


def minimality_check(dil, cfg=DEFAULT_CONFIG):
    """Rank of ``[E, V E, ..., V^{N-1} E]`` against ``dim H + (N - 1) dim D_P``."""
    n, k, N = dil.dim_H, dil.dim_defect, dil.n_blocks
    E = dil.embedding()
    cols = [E]
    for _ in range(N - 1):
        cols.append(dil.V_0 @ cols[-1])
    K = np.hstack(cols)
    sv = np.linalg.svd(K, compute_uv=False)
    rank = int(np.sum(sv > cfg.rank_tol * max(sv[0], 1.0))) if sv.size else 0
    expected = n + (N - 1) * k
    return MinimalityReport(rank, expected, rank == expected, N - 1)

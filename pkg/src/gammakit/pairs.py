"""Commuting operator pairs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotCommuting
from .numerics import DEFAULT_CONFIG, adjoint, as_square, hermitian_part, opnorm

__all__ = ["OperatorPair", "rho", "rho_forms", "as_pair"]


@dataclass(frozen=True, eq=False)
class OperatorPair:
    """A commuting pair ``(S, P)`` of square matrices of equal size.

    The commutator ``||SP - PS||`` is checked against
    ``eq_tol * max(1, ||S|| ||P||)`` on construction and kept as
    ``commutator_residual``.
    """

    S: np.ndarray
    P: np.ndarray
    commutator_residual: float

    @classmethod
    def from_matrices(cls, S, P, cfg=DEFAULT_CONFIG):
        S = as_square(S, "S").copy()
        P = as_square(P, "P").copy()
        if S.shape != P.shape:
            raise DimensionMismatch(f"S is {S.shape}, P is {P.shape}")
        res = opnorm(S @ P - P @ S)
        bound = cfg.eq_tol * max(1.0, opnorm(S) * opnorm(P))
        if res > bound:
            raise NotCommuting(f"||SP - PS|| = {res:.3e} exceeds {bound:.3e}")
        S.setflags(write=False)
        P.setflags(write=False)
        return cls(S, P, res)

    @property
    def dim(self):
        return self.S.shape[0]

    @property
    def scale(self):
        return max(1.0, opnorm(self.S), opnorm(self.P))

    def adjoint(self, cfg=DEFAULT_CONFIG):
        return OperatorPair.from_matrices(adjoint(self.S), adjoint(self.P), cfg)

    def scaled(self, alpha, cfg=DEFAULT_CONFIG):
        """The pair ``(alpha S, alpha^2 P)``."""
        return OperatorPair.from_matrices(alpha * self.S, alpha * alpha * self.P, cfg)


def as_pair(pair_or_S, P=None, cfg=DEFAULT_CONFIG):
    if isinstance(pair_or_S, OperatorPair):
        return pair_or_S
    return OperatorPair.from_matrices(pair_or_S, P, cfg)


def rho_forms(S, P):
    """Both expressions of ``rho(S, P)``; they agree identically."""
    S = as_square(S, "S")
    P = as_square(P, "P")
    if S.shape != P.shape:
        raise DimensionMismatch(f"S is {S.shape}, P is {P.shape}")
    n = S.shape[0]
    I = np.eye(n)
    Sh, Ph = adjoint(S), adjoint(P)
    first = 2.0 * (I - Ph @ P) - (S - Sh @ P) - (Sh - Ph @ S)
    u = 2.0 * I - S
    v = 2.0 * P - S
    second = 0.5 * (adjoint(u) @ u - adjoint(v) @ v)
    return first, second


def rho(pair_or_S, P=None):
    """``rho(S, P) = 2(I - P*P) - (S - S*P) - (S* - P*S)``, symmetrized."""
    if isinstance(pair_or_S, OperatorPair):
        S, P = pair_or_S.S, pair_or_S.P
    else:
        S = pair_or_S
    first, _ = rho_forms(S, P)
    return hermitian_part(first)

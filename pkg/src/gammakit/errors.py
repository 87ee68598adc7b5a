"""Exception hierarchy shared by all gammakit modules."""


class GammaKitError(Exception):
    """Base class for all errors raised by gammakit."""


class ShapeError(GammaKitError, ValueError):
    """Raised when an array has the wrong shape or non-finite entries."""


class DimensionMismatch(ShapeError):
    """Raised when the two operators of a pair act on different spaces."""


class NotCommuting(GammaKitError):
    """Raised when S and P fail the commutator check."""


class NotAContraction(GammaKitError):
    """Raised when I - P*P has a significantly negative eigenvalue."""


class NotHermitian(GammaKitError):
    """Raised when a matrix expected to be Hermitian is not."""


class EigenFailure(GammaKitError):
    """Raised when an eigensolver does not converge."""


class SvdFailure(GammaKitError):
    """Raised when an SVD does not converge."""


class DomainError(GammaKitError, ValueError):
    """Raised when a scalar argument is outside its admissible domain."""


class NotGammaUnitary(GammaKitError):
    """Raised when factor extraction is requested for a non Gamma-unitary pair."""


class JointDiagonalizationFailure(GammaKitError):
    """Raised when a commuting normal pair cannot be diagonalized jointly."""


class OmegaExceedsOne(GammaKitError):
    """Raised when an Ando factorization is requested for omega(X) > 1."""


class MajorizationFailed(GammaKitError):
    """Raised when XX* <= DD* fails in a Douglas factorization."""


class NotPositiveOnCircle(GammaKitError):
    """Raised when a trigonometric matrix polynomial is not PSD on the circle."""


class NoConvergence(GammaKitError):
    """Raised when an iterative factorization exhausts its budget."""

    def __init__(self, msg, max_size=None, last_change=None):
        super().__init__(msg)
        self.max_size = max_size
        self.last_change = last_change


class ResidualTooLarge(GammaKitError):
    """Raised when a fundamental solution is too inaccurate to build a dilation."""


class ModelNotVerified(GammaKitError):
    """Raised when a model dilation fails its intertwining checks."""


class NormTooLarge(GammaKitError):
    """Raised when ||P|| is too close to 1 for the unique C + C*P solve."""


class SingularSystem(GammaKitError):
    """Raised when a linear system expected to be invertible is singular."""


class SingularDenominator(GammaKitError):
    """Raised when a divided-difference kernel is evaluated on the diagonal."""


class NotInvariant(GammaKitError):
    """A subspace expected to be jointly invariant is not."""

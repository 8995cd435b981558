"""Exception taxonomy for the package.

Every failure raised by the library derives from CesaroError so callers
(and the CLI) can separate policy failures from programming errors.
"""


class CesaroError(Exception):
    """Base class for all library errors."""


class MatrixFileError(CesaroError):
    """Input could not be parsed into a valid square complex matrix."""


class DimensionMismatch(CesaroError):
    """Operand shapes are incompatible."""


class SingularMatrix(CesaroError):
    """Matrix is singular up to the configured cutoff."""


class RankDeficient(CesaroError):
    """Columns are not linearly independent up to the configured cutoff."""


class NotPSD(CesaroError):
    """Matrix is not Hermitian positive semi-definite within tolerance."""


class EigenFailure(CesaroError):
    """The underlying eigenvalue/Schur routine did not converge."""


class NotPowerBounded(CesaroError):
    """The matrix is not power-bounded, so the requested limit does not exist."""


class NotConverging(CesaroError):
    """Power norms blew past the overflow guard during Cesaro iteration."""


class WrongDimension(CesaroError):
    """Operation is only defined for a specific matrix dimension."""


class NotC11(CesaroError):
    """Operation requires a matrix with trivial stable subspace."""


class Infeasible(CesaroError):
    """Requested spectrum violates the trace condition for its class."""


class NotPositiveDefinite(CesaroError):
    """Target is not Hermitian positive definite."""


class RankMismatch(CesaroError):
    """Target rank is incompatible with the requested stable dimension."""


class NotInSpectralSet(CesaroError):
    """Target is not an attainable norm-limit (fails the spectral-set test)."""


class HorizonTooSmall(CesaroError):
    """Shift-trace horizon is too short for the requested analysis."""

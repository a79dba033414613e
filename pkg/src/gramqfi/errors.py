"""Exception hierarchy shared by every gramqfi module."""


class GramQfiError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(GramQfiError, ValueError):
    pass


class NotHermitian(GramQfiError, ValueError):
    pass


class NotPSD(GramQfiError, ValueError):
    pass


class ConvergenceFailure(GramQfiError, ArithmeticError):
    pass


class EmptyBasis(GramQfiError, ValueError):
    pass


class SingularMetric(GramQfiError, ArithmeticError):
    pass


class ModelInvariantViolation(GramQfiError, ValueError):
    pass


class SolverFailure(GramQfiError, ArithmeticError):
    pass


class IndexOutOfRange(GramQfiError, IndexError):
    pass


class SingularQfi(GramQfiError, ArithmeticError):
    """The QFI matrix cannot be inverted: some parameter direction carries no information."""


class BadWeight(GramQfiError, ValueError):
    pass


class DegenerateFloor(GramQfiError, ArithmeticError):
    pass


class DomainError(GramQfiError, ValueError):
    """A model parameter lies outside the domain of the model."""


class DegenerateBasis(DomainError):
    pass


class RankChange(DomainError):
    """The state changes rank at this parameter value and the QFI diverges."""


class UnsupportedDerivativeOrder(GramQfiError, ValueError):
    pass


class QfiDivergenceWarning(RuntimeWarning):
    pass

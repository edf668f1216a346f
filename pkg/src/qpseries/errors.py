"""Exception hierarchy shared by all modules."""


class QPSeriesError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(QPSeriesError, ValueError):
    """The problem data violate a structural requirement."""


class EvenOrderZero(ValidationError):
    pass


class ZeroLeadingCoefficient(ValidationError):
    pass


class AverageMismatch(ValidationError):
    pass


class DimensionMismatch(QPSeriesError, ValueError):
    pass


class BudgetExceeded(QPSeriesError):
    pass


class ResonanceError(QPSeriesError, ArithmeticError):
    """Some omega . nu vanished (exactly or below the divisor floor)."""


class SolverError(QPSeriesError):
    pass


class NoRealRoot(SolverError):
    pass


class OuterIterationDivergence(SolverError):
    pass


class VerificationError(QPSeriesError):
    """A numerical check that can only fail through a bug did fail."""


class EnvelopeViolation(VerificationError):
    pass


class LemmaViolation(VerificationError):
    pass


class InvalidTree(VerificationError):
    pass


class IntegrationError(QPSeriesError):
    pass


class StepTooLarge(IntegrationError):
    pass


class NonFiniteState(IntegrationError):
    pass

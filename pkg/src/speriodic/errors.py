"""Exception hierarchy with stable error codes for CLI reporting."""


class SPeriodicError(Exception):
    """Base class; ``code`` is a stable machine-readable identifier."""

    code = "error"

    def __init__(self, message=""):
        super().__init__(message or self.code)


class SchemaError(SPeriodicError):
    code = "schema_error"


class NotOrthogonal(SPeriodicError):
    code = "not_orthogonal"


class NonPositivePeriod(SPeriodicError):
    code = "non_positive_period"


class DimensionMismatch(SPeriodicError):
    code = "dimension_mismatch"


class IntegratorFailure(SPeriodicError):
    code = "integrator_failure"


class SingularBoundary(SPeriodicError):
    code = "singular_boundary"


class SingularTruncation(SPeriodicError):
    code = "singular_truncation"


class AsymmetricCutoff(SPeriodicError):
    code = "asymmetric_cutoff"


class NonConvergent(SPeriodicError):
    code = "non_convergent"


class SingularShift(SPeriodicError):
    code = "singular_shift"


class SingularDenominator(SPeriodicError):
    code = "singular_denominator"


class InsufficientOrder(SPeriodicError):
    code = "insufficient_order"


class NonCommutingC(SPeriodicError):
    code = "non_commuting_c"


class NonCommutingAverage(SPeriodicError):
    code = "non_commuting_average"


class ContourThroughZero(SPeriodicError):
    code = "contour_through_zero"


class NonIntegerWinding(SPeriodicError):
    code = "non_integer_winding"

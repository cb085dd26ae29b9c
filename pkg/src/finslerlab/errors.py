"""Exception types shared across the package."""


class FinslerLabError(Exception):
    pass


class ExpressionError(FinslerLabError, ValueError):
    """Malformed expression tree or serialization payload."""


class EvaluationDomainError(FinslerLabError, ArithmeticError):
    """Division, log, or fractional power hit a near-zero base."""


class SingularLocusError(FinslerLabError, ValueError):
    """Evaluation point violates a declared singular-locus predicate."""


class InconsistentPointError(FinslerLabError, ValueError):
    """Fundamental tensor is not Hermitian within tolerance at the point."""


class IllConditionedError(FinslerLabError, ArithmeticError):
    """Levi matrix condition number exceeds the hard limit."""

    def __init__(self, cond, limit):
        super().__init__(f"Levi matrix condition number {cond:.3e} exceeds {limit:.1e}")
        self.cond = cond
        self.limit = limit


class AcceptanceStarvationError(FinslerLabError, RuntimeError):
    """Point sampler could not reach the requested acceptance ratio."""

    def __init__(self, message, histogram):
        super().__init__(message)
        self.histogram = dict(histogram)


class ConfigError(FinslerLabError, ValueError):
    """Run configuration failed to parse or validate."""

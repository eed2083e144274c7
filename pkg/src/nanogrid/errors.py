"""Exception types shared across the nanogrid package."""


class NanogridError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(NanogridError):
    """An argument is non-finite, out of domain, or otherwise unusable."""


class ContractViolationError(NanogridError):
    """An internal invariant was broken (e.g. battery state left its bounds)."""


class InfeasibleDemandError(NanogridError):
    """A demanded output exceeds what a converter path can deliver."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class SchemaError(NanogridError):
    """A CSV file or config failed validation; message names the offending line."""


class SingularFitError(NanogridError):
    """The least-squares design matrix is rank deficient."""


class UndefinedBaselineError(NanogridError):
    """Savings percentage requested against a zero baseline."""

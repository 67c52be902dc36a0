"""Exception hierarchy for the rase package."""


class RaseError(Exception):
    """Base class for every error raised by rase."""


class DataError(RaseError, ValueError):
    """Malformed or inconsistent input data."""


class EmptyClass(DataError):
    """One of the two classes has no rows."""


class IndexOutOfRange(RaseError, IndexError):
    pass


class DimensionMismatch(RaseError, ValueError):
    pass


class InvalidBound(RaseError, ValueError):
    pass


class DomainError(RaseError, ValueError):
    pass


class KTooLarge(RaseError, ValueError):
    pass


class SingularMatrix(RaseError, ArithmeticError):
    pass


class FitFailure(RaseError):
    """A base classifier could not be fit on the given subspace."""

    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


class DegenerateSample(FitFailure):
    pass


class NonConvergence(FitFailure):
    pass


class NonPdParameters(RaseError, ValueError):
    pass


class SchemaError(RaseError, ValueError):
    """A persisted model file does not match the expected schema."""

"""Error hierarchy shared by services, CLI and API."""


class CovcraftError(Exception):
    """Base class for all covcraft errors."""

    exit_code: int = 1

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class ValidationError(CovcraftError, ValueError):
    """Input violates a documented precondition or invariant."""

    exit_code = 1


class NumericalError(CovcraftError, ArithmeticError):
    """Internal numerical failure."""

    exit_code = 2


# Market data
class MissingCell(ValidationError):
    """Empty, non-numeric or non-finite cell in a returns file."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class NonMonotonicDates(ValidationError):
    pass


class TooFewAssets(ValidationError):
    pass


class DuplicateAsset(ValidationError):
    pass


class TooFewSamples(ValidationError):
    pass


class WindowOutOfBounds(ValidationError):
    pass


# Linear algebra
class NotSymmetric(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NotPsd(ValidationError):
    pass


class NoConvergence(NumericalError):
    pass


# Random matrix theory
class InvalidParams(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


# Estimators
class NotDemeaned(ValidationError):
    pass


class RhoOutOfRange(ValidationError):
    pass


class ZeroVariance(ValidationError):
    pass


# Portfolio
class InfeasibleReturn(ValidationError):
    pass


class NegativeVariance(ValidationError):
    pass


# Tuning / backtest / synthetic
class WindowTooSmall(ValidationError):
    pass


class PanelTooShort(ValidationError):
    pass


class InvalidSpec(ValidationError):
    pass

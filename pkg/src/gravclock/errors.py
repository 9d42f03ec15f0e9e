"""Exception types raised across the package."""


class GravClockError(Exception):
    """Base class for all package errors."""


class InvalidInput(GravClockError, ValueError):
    pass


class ApproximationBreach(InvalidInput):
    """An internal energy violates the low-energy guard |E_k| < 0.1 m c^2."""


class OutOfDomain(InvalidInput):
    pass


class GridInvalid(InvalidInput):
    pass


class GridMismatch(InvalidInput):
    pass


class IndexOutOfRange(InvalidInput, IndexError):
    pass


class NoStationaryPoint(GravClockError):
    pass


class NotConfining(GravClockError):
    pass


class NotFree(GravClockError):
    pass


class NonFinite(GravClockError, ArithmeticError):
    pass


class NonUnitary(GravClockError, AssertionError):
    """Norm drift beyond round-off; indicates a propagator bug, not bad input."""


class ConfigInvalid(GravClockError, ValueError):
    """A scenario configuration is incomplete or inconsistent."""

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class ParseError(ConfigInvalid):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f"line {line}" if line is not None else ""
        if column is not None:
            where += f", column {column}"
        super().__init__(f"{where}: {message}" if where else message)


class ValidationError(ConfigInvalid):
    """A parsed value violates a model invariant; the message names it."""


class IoError(GravClockError, OSError):
    pass

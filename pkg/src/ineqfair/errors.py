"""Exception hierarchy.

``DataError`` subclasses describe bad inputs (CLI exit code 3);
``NumericalError`` subclasses describe quantities that are undefined or
optimisations that failed (CLI exit code 4).
"""


class IneqFairError(Exception):
    """Base class for every error raised by this package."""


class DataError(IneqFairError, ValueError):
    pass


class NumericalError(IneqFairError, ArithmeticError):
    pass


class DomainError(DataError):
    """A value lies outside the mathematical domain of an operation."""


class StructuralError(DataError):
    """Mismatched ids, empty groups, wrong dimensions."""


class ParseError(DataError):
    """Malformed input file. Carries the offending row and column."""

    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.row = row
        self.column = column


class ConfigError(DataError):
    pass


class UndefinedBenefitError(DataError):
    """A benefit scheme left no individuals, or only zero benefits."""


class UndefinedIndexError(NumericalError):
    """The index is undefined (zero mean benefit)."""


class UndefinedShareError(NumericalError):
    """Between-group share requested while overall inequality is zero."""


class DegenerateDataError(NumericalError):
    """Training data cannot support the requested fit (e.g. one class only)."""


class ConstrainedTrainingFailed(NumericalError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class EnumerationLimitError(DataError):
    pass

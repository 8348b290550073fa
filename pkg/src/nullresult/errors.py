"""Exception hierarchy shared across the package."""


class NullResultError(Exception):
    """Base class for all package errors."""


class ValidationError(NullResultError, ValueError):
    """Invalid input value. ``path`` names the offending field, if known."""

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class DegenerateInputError(NullResultError, ValueError):
    """Statistic undefined for the given input (zero rate, empty table)."""


class ConfigurationError(NullResultError, ValueError):
    """Analyzer configuration incomplete or inconsistent."""


class SingularityError(NullResultError, ZeroDivisionError):
    """Velocity formula evaluated at its pole."""


class MergeError(NullResultError, ValueError):
    """Attempt to merge counts from different experimental settings."""


class CountsParseError(NullResultError, ValueError):
    """Malformed counts file. Carries line/column when available."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)

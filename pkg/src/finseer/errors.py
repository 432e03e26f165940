"""Exception hierarchy shared by every finseer module."""

from __future__ import annotations


class FinseerError(Exception):
    """Base class for all errors raised by finseer."""


class ParseError(FinseerError, ValueError):
    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(FinseerError, ValueError):
    def __init__(self, message: str, line: int | None = None, rule: str | None = None) -> None:
        self.line = line
        self.rule = rule
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FetchError(FinseerError):
    def __init__(self, message: str, status: int | None = None, cause: BaseException | None = None) -> None:
        self.status = status
        self.cause = cause
        super().__init__(message)


class ParameterError(FinseerError, ValueError):
    pass


class LengthError(FinseerError, ValueError):
    pass


class DegenerateSeriesError(FinseerError, ValueError):
    pass


class DegenerateFeatureError(FinseerError, ValueError):
    def __init__(self, message: str, feature: str | None = None) -> None:
        self.feature = feature
        super().__init__(message)


class SplitError(FinseerError, ValueError):
    pass


class ShapeError(FinseerError, ValueError):
    pass


class DivergenceError(FinseerError, ArithmeticError):
    pass


class SizeError(FinseerError, ValueError):
    pass


class DegenerateRegressorError(FinseerError, ValueError):
    pass


class ComparisonError(FinseerError, ValueError):
    pass


class ModelFormatError(FinseerError, ValueError):
    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

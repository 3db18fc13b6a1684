"""Exception hierarchy shared across the package.

Every user-facing failure is a ``CurveQueryError`` carrying a short stable
``code`` so the HTTP layer and the CLI can map errors without string
matching. Parse errors additionally carry a ``line:col`` position.
"""

from __future__ import annotations


class CurveQueryError(Exception):
    """Base class for all errors raised by curvequery."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ParseError(CurveQueryError):
    """Malformed text input (CSV, equation, or filter expression).

    ``line`` and ``col`` are 1-based. ``position`` renders as ``line:col``.
    """

    code = "parse"

    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.bare_message = message

    @property
    def position(self) -> str:
        return f"{self.line}:{self.col}"


class SchemaError(CurveQueryError):
    """Structural problem with a dataset (duplicate headers, bad columns)."""

    code = "schema"


class ValidationError(CurveQueryError):
    """Input that parsed fine but violates a contract precondition."""

    code = "validation"


class NotFoundError(CurveQueryError):
    """A named dataset, session, or series does not exist."""

    code = "not_found"


class DomainError(CurveQueryError):
    """Numeric evaluation left the function's domain (log(-1), 1/0, ...)."""

    code = "domain"


class AmbiguityError(ValidationError):
    """Duplicate x within a group while aggregation is disabled."""

    code = "ambiguous_duplicate_x"


class EmptyClassError(ValidationError):
    """A dynamic class matched no rows (or no usable series)."""

    code = "empty_class"


class DegenerateSketchError(ValidationError):
    """A sketch collapsed to fewer than two distinct x positions."""

    code = "degenerate_sketch"


class NoDataError(ValidationError):
    """An analytics computation was asked to run on zero observations."""

    code = "no_data"


class VocabularyError(ValidationError):
    """An interaction event named a feature outside the known vocabulary."""

    code = "vocabulary"

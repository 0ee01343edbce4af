"""Structured errors raised across the library.

Every failure mode a caller might want to branch on gets its own class; the
CLI maps these onto exit codes (usage errors -> 1, runtime errors -> 2).
"""

from __future__ import annotations


class GenPMLError(Exception):
    """Base class for all library errors."""


class DataValidationError(GenPMLError):
    """Invalid dataset contents (negative outcome, non-finite design, n < d)."""


class DimensionMismatchError(GenPMLError):
    """Arrays with incompatible shapes, named in the message."""


class NonFiniteEvaluationError(GenPMLError):
    """A moment/objective evaluation overflowed or produced non-finite values.

    Carries the offending parameter vector so the solver can shorten steps.
    """

    def __init__(self, message: str, theta=None):
        super().__init__(message)
        self.theta = theta


class UnsupportedConfigurationError(GenPMLError):
    """Requested a configuration outside the supported family (e.g. c != 0 objective)."""


class RankDeficiencyError(GenPMLError):
    """Design matrix is numerically rank deficient.

    Carries the (unit) null-space direction responsible.
    """

    def __init__(self, message: str, direction=None):
        super().__init__(message)
        self.direction = direction


class SingularMatrixError(GenPMLError):
    """A matrix that must be inverted is numerically singular.

    Carries the condition number when available.
    """

    def __init__(self, message: str, condition_number: float | None = None):
        super().__init__(message)
        self.condition_number = condition_number


class ConvergenceError(GenPMLError):
    """Too many fits failed to converge (bootstrap/holdout budget exceeded, CV all-fail)."""

    def __init__(self, message: str, n_failed: int = 0, n_total: int = 0):
        super().__init__(message)
        self.n_failed = n_failed
        self.n_total = n_total


class CsvFormatError(GenPMLError):
    """CSV ingestion failure with a machine-readable code.

    Codes: ``malformed``, ``missing-column``, ``negative-outcome``,
    ``non-numeric``. ``row`` is the 1-based data row (header excluded) and
    ``column`` the offending column name, where applicable.
    """

    def __init__(self, code: str, message: str, row: int | None = None,
                 column: str | None = None):
        super().__init__(message)
        self.code = code
        self.row = row
        self.column = column

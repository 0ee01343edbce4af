"""Errors raised by the plotting package.

The CLI maps these onto exit codes (bad figure specs -> 1, unreadable or
schema-violating inputs and render failures -> 2).
"""

from __future__ import annotations


class PlotsError(Exception):
    """Base class for all plotting errors."""


class FigureSpecError(PlotsError):
    """A FigureSpec field is invalid (unknown kind, wrong input count, ...)."""


class SchemaError(PlotsError):
    """An input file does not match its published schema.

    The message names the missing or offending column/key; ``column`` carries
    it in machine-readable form when applicable.
    """

    def __init__(self, message: str, column: str | None = None):
        super().__init__(message)
        self.column = column


class RenderError(PlotsError):
    """Inputs were well-formed but the figure cannot be drawn from them."""

"""Exception types shared across the package."""


class DeonticError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(DeonticError):
    """Syntax error in statement text or in a model/automaton file."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class GrammarError(DeonticError):
    """Structurally well-formed text that violates the statement grammar.

    Carries the name of the violated production so callers can report it.
    """

    def __init__(self, message, production=None):
        self.production = production
        if production is not None:
            message = f"{message} [production: {production}]"
        super().__init__(message)


class ModelError(DeonticError):
    """Lookup or evaluation error against an explicit stit model."""


class AutomatonError(DeonticError):
    """Invalid stit automaton, or an operation unsupported on it."""


class ResourceLimitError(DeonticError):
    """An enumeration exceeded the configured resource cap."""

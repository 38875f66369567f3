"""Exception hierarchy.

Validation problems derive from ``ValueError`` so callers that only care
about bad input can catch the builtin.  ``PreconditionError`` marks inputs
that are well formed but too small for a statistical procedure.
"""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class RangeError(ValueError):
    """Index or truncation level beyond the estimable range."""


class ModelError(ValueError):
    """Inconsistent or divergent model configuration."""


class ConfigError(ValueError):
    """Invalid experiment or CLI configuration.

    ``field`` names the offending configuration key.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class PreconditionError(RuntimeError):
    """Statistical precondition not met (e.g. sample too small)."""


class InputError(ValueError):
    """Malformed input file; ``row`` is the 1-based data row when known."""

    def __init__(self, message, row=None):
        self.row = row
        super().__init__(message if row is None else f"row {row}: {message}")

"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Malformed or inconsistent configuration (CLI exit code 2)."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class UnsupportedError(NotImplementedError):
    """Combination of inputs for which no closed form is implemented."""


class NumericError(ArithmeticError):
    """Numerical procedure failed to reach its tolerance (CLI exit code 3)."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}

"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration value or combination of values."""


class ContractError(ValueError):
    """Caller violated an input precondition (e.g. unsorted tag stream)."""


class ExtractionError(ValueError):
    """No constant-fraction crossing could be located in a captured window."""


class FitError(RuntimeError):
    """A curve fit could not be performed or did not converge."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

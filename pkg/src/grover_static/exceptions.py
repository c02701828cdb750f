"""Exception types shared across the package."""


class SizeError(ValueError):
    """Dimension or length mismatch between operands."""


class DomainError(ValueError):
    """Argument outside its mathematical domain."""


class CapacityError(RuntimeError):
    """Requested problem exceeds a hard size or memory limit."""


class FitError(RuntimeError):
    """Model fit could not be carried out."""


class PartialEnsembleError(RuntimeError):
    """Some ensemble cells failed; ``completed`` lists the (eps_index, realization) pairs that finished."""

    def __init__(self, message, completed, failures):
        super().__init__(message)
        self.completed = list(completed)
        self.failures = dict(failures)


class ConfigError(ValueError):
    """Invalid experiment configuration."""

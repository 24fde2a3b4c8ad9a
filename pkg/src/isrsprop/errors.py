"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid scenario description: bad band plan, units, or file contents."""


class NumericalInstabilityError(RuntimeError):
    """The fixed-step integrator produced non-physical (negative) powers.

    Raised instead of silently clamping; the remedy is a larger
    ``steps_per_span``.
    """


class RootBracketError(RuntimeError):
    """A scalar root-find could not bracket a sign change."""

    def __init__(self, message, low, high):
        super().__init__(f"{message} (scanned interval [{low:.6e}, {high:.6e}] W)")
        self.low = low
        self.high = high


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message, history):
        super().__init__(message)
        self.history = tuple(history)

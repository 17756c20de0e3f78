"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A run configuration, preset name, or parameter set is invalid."""


class NumericalError(RuntimeError):
    """A numerical guarantee (trace, Hermiticity, positivity) was violated."""


class UndefinedPolarizationError(ValueError):
    """Raised when both readout populations vanish and P is undefined."""


class FitModelError(RuntimeError):
    """The model returned NaN or non-finite values during a fit."""


class FitConvergenceError(RuntimeError):
    """A fit exhausted its evaluation budget without converging."""

"""Exception types shared across the package."""


class ExprSyntaxError(ValueError):
    """Raised when expression text cannot be parsed.  Carries the 0-based
    character position of the offending token."""

    def __init__(self, message, pos):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class ExprEvalError(ArithmeticError):
    """Raised when an expression hits a domain error (log of a non-positive
    value, division by zero, overflow).  Carries the offending
    sub-expression as text."""

    def __init__(self, message, subexpr):
        super().__init__(f"{message} in sub-expression '{subexpr}'")
        self.subexpr = subexpr


class DimensionError(ValueError):
    """Inconsistent matrix/vector dimensions."""


class ParameterError(ValueError):
    """A numeric parameter violates its documented constraints."""


class ConfigError(ValueError):
    """Invalid scenario configuration.  Messages name the offending field."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class NumericError(RuntimeError):
    """Base class for runtime numeric failures."""


class DelayBoundError(NumericError):
    """The delay function left [0, tau_bar] during integration."""


class SynthesisError(NumericError):
    """Gain synthesis exhausted its budget without certifying feasibility.

    Not a proof of infeasibility; `best_max_eig` is the smallest spectral
    abscissa reached.
    """

    def __init__(self, message, best_max_eig):
        super().__init__(message)
        self.best_max_eig = best_max_eig

"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """Invalid parameters, ranges or scenario settings."""


class ShapeError(ValueError):
    """State and network dimensions disagree."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an analytic formula."""


class InputError(ValueError):
    """Malformed or inconsistent input data.

    ``line`` is the 1-based line number in the offending file, when known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class StiffnessError(ArithmeticError):
    """A compartment undershot zero by more than the clamping tolerance."""


class DivergenceError(ArithmeticError):
    """Quadrature target lies at or beyond the epidemic steady state."""

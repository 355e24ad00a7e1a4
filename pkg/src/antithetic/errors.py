"""Exception types shared across the package."""


class AntitheticError(Exception):
    """Base class for all package errors."""


class StructuralError(AntitheticError, ValueError):
    """Malformed network, dimension mismatch or invalid composition."""


class UnsupportedStructureError(AntitheticError, ValueError):
    """The network is outside the class an analysis supports (e.g. bimolecular)."""


class AnalysisError(AntitheticError, ArithmeticError):
    """Linear-algebra failure inside the moment analysis."""


class DomainError(AnalysisError):
    """Requested quantity lies outside the validity domain of the approximation.

    ``eigenvalue`` carries the offending eigenvalue of R when the refusal comes
    from a Hurwitz check.
    """

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class NumericError(AntitheticError, ArithmeticError):
    """Non-finite propensities or similar runtime numeric failures."""

    def __init__(self, message, state=None, trajectory=None):
        super().__init__(message)
        self.state = state
        self.trajectory = trajectory


class EstimationError(AntitheticError, ValueError):
    """A statistic cannot be estimated from the available samples."""


class ConfigError(AntitheticError, ValueError):
    """Invalid experiment configuration or model file."""

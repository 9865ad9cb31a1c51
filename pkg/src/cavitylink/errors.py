"""Exception types shared across the package."""


class CavityLinkError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(CavityLinkError, ValueError):
    """Invalid or inconsistent parameters / configuration input."""


class UnsupportedConfigurationError(ConfigurationError):
    """Parameters are well formed but outside the regime the requested
    operation is defined for (e.g. a resonance condition not met)."""


class DimensionMismatchError(CavityLinkError, ValueError):
    """Objects built from incompatible Hilbert-space dimensions."""


class TruncationError(CavityLinkError, ValueError):
    """Probability mass beyond the Fock cutoff exceeded the tolerance."""

    def __init__(self, message: str, leaked: float):
        super().__init__(message)
        self.leaked = float(leaked)


class ContractViolationError(CavityLinkError, ValueError):
    """An input violated a documented precondition (e.g. non-Hermitian
    generator passed to a unitary propagator)."""


class ConvergenceError(CavityLinkError, RuntimeError):
    """Step-doubling refinement hit the step bound before the Cauchy
    criterion was met."""

    def __init__(self, message: str, residual: float, steps: int):
        super().__init__(message)
        self.residual = float(residual)
        self.steps = int(steps)


class IntegrationError(CavityLinkError, RuntimeError):
    """A fixed-step integrator violated a conservation guard (trace drift,
    positivity)."""

"""Exception types shared across the package."""


class StaError(Exception):
    """Base class for all package errors."""


class NonPhysical(StaError):
    """Raised when parameters lead to an unphysical trap (d <= 0, rho <= 0, ...)."""


class NonPhysicalEndpoint(NonPhysical):
    """Raised when the configured endpoints have imaginary mode frequencies."""


class DomainError(StaError, ValueError):
    """Raised when a polynomial is evaluated outside ``s in [0, 1]``."""


class DegenerateCloud(StaError, ValueError):
    """Raised when a point cloud has no defined principal direction."""


class NoSmoothRegion(StaError):
    """Raised when the nu = 0 sample of a line sweep did not converge."""


class IonCollision(StaError):
    """Raised when the ions cross during propagation (Coulomb singularity)."""


class ConfigError(StaError, ValueError):
    """Raised for malformed configuration or parameter files."""


class BudgetExhausted(StaError):
    """Raised inside an optimizer when the evaluation budget is used up."""

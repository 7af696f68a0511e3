"""High-probability minimax lower bounds, matching estimators and Monte Carlo checks."""

from .exceptions import CapacityError, DomainError

__version__ = "0.1.0"

__all__ = ["CapacityError", "DomainError", "__version__"]

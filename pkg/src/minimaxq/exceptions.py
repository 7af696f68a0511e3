"""Error types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the mathematical domain of an operation."""


class CapacityError(ValueError):
    """An exhaustive enumeration would exceed its size budget."""

"""Exception types shared across the toolkit."""

__all__ = [
    "GridTooCoarseError",
    "InfeasibleProblemError",
    "PairBudgetExceededError",
    "ConfigError",
]


class GridTooCoarseError(ValueError):
    """The grid cannot resolve the requested construction or step."""


class InfeasibleProblemError(ValueError):
    """No point satisfying both the data and the class constraint was found."""


class PairBudgetExceededError(ValueError):
    """A lattice enumeration would exceed the pair-count guard."""


class ConfigError(ValueError):
    """Invalid experiment configuration (maps to CLI exit code 2)."""

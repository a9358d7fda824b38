"""Exception types shared across the package."""


class SemlatError(Exception):
    """Base class for all package errors."""


class ConfigError(SemlatError, ValueError):
    """Configuration could not be parsed or violates an invariant."""


class DomainError(SemlatError, ValueError):
    """An argument is outside the domain of a link model."""


class InfeasibleError(SemlatError):
    """The requested operating point cannot be reached."""


class InfeasibleQualityError(InfeasibleError):
    """A semantic quality requirement exceeds what its curve can deliver."""

    def __init__(self, metric: str, threshold: float, best: float):
        self.metric = metric
        self.threshold = threshold
        self.best = best
        super().__init__(
            f"{metric}: requirement {threshold:g} exceeds curve maximum {best:g}"
        )


class InfiniteDelayError(SemlatError):
    """A stream has zero achievable rate, so its delay is unbounded."""

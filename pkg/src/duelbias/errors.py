"""Exception hierarchy shared across the package."""


class DuelBiasError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(DuelBiasError, ValueError):
    """Input violates a structural invariant (bad group label, self-duel, ...)."""


class ParseError(DuelBiasError, ValueError):
    """A file could not be parsed; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ReferentialError(ValidationError):
    """A record references an unknown item or category."""


class DegenerateFitError(DuelBiasError, ValueError):
    """No duels and no regularization: the likelihood has no maximizer."""


class UnidentifiableItemsError(DuelBiasError, ValueError):
    """Items never appear in any duel and alpha is zero."""

    def __init__(self, item_ids):
        self.item_ids = tuple(item_ids)
        super().__init__(
            "items appear in no duel and cannot be identified without "
            f"regularization: {', '.join(map(str, self.item_ids))}"
        )


class SizeMismatchError(DuelBiasError, ValueError):
    """The two groups of a schedule must have equal sizes."""


class InfeasibleScheduleError(DuelBiasError, ValueError):
    """The requested schedule cannot be realized."""


class UnstableBootstrapError(DuelBiasError, RuntimeError):
    """More than 10% of bootstrap replicates failed."""


class NumericalError(DuelBiasError, RuntimeError):
    """A numerical routine failed to produce a finite result."""

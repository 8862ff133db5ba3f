"""Exception types shared across the package."""

#: In-band marker for a count or index that did not close within its budget.
EXCEEDED = "exceeded-budget"


class DomainError(ValueError):
    """An operand or argument lies outside the domain of an operation."""


class BudgetExceeded(RuntimeError):
    """A computation that needed a finite answer ran out of budget."""

    def __init__(self, message, what=None):
        super().__init__(message)
        self.what = what


class ConsistencyError(RuntimeError):
    """An internal invariant failed (indicates a bug, not bad input)."""


class ConfigError(ValueError):
    """Raised by the config parser; carries every error found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))

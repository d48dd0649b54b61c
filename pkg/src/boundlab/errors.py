"""Exception types shared across modules and mapped to CLI exit codes."""


class SchemaError(ValueError):
    """A configuration or argument failed validation (CLI exit code 2)."""


class BudgetError(RuntimeError):
    """A computation would exceed its size/compute guard (CLI exit code 3).

    Carries ``required`` so callers can report what budget would be needed.
    """

    def __init__(self, message: str, required=None):
        super().__init__(message)
        self.required = required


class InvariantError(RuntimeError):
    """A named internal invariant was violated (CLI exit code 4)."""

    def __init__(self, invariant: str, message: str = ""):
        super().__init__(f"invariant '{invariant}' violated" + (f": {message}" if message else ""))
        self.invariant = invariant

"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: configuration problems
exit 1, numerical failures exit 2, violated invariants exit 3.
"""


class ConfigError(Exception):
    """Invalid scenario configuration; carries a JSON pointer to the bad key."""

    def __init__(self, message: str, pointer: str = ""):
        self.pointer = pointer
        super().__init__(f"{message} (at {pointer or '/'})")


class NumericalFailure(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""


class InvariantViolation(RuntimeError):
    """An internal consistency invariant was found broken."""

"""Exception types shared across the package.

Argument and domain violations raise plain :class:`ValueError`; the one
failure mode that callers are expected to dispatch on (a computation that
cannot reach its requested precision) gets its own class so the CLI can map
it to a dedicated exit code.
"""


class PrecisionFailure(ArithmeticError):
    """A computation could not be certified at the requested precision.

    ``achieved`` carries the best error bound that was reached, when known.
    """

    def __init__(self, message: str, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class UsageError(ValueError):
    """Bad command-line or config-file input (CLI exit code 2)."""

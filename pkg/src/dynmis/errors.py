"""Exception types shared across the package."""


class StructuralIntegrityError(RuntimeError):
    """An internal invariant of the maintained structure was violated.

    Raised when an operation detects a state that a correct update pipeline
    can never produce (e.g. two adjacent vertices both in the independent
    set, or a failed membership assertion during the affected-set search).
    """


class VerificationError(RuntimeError):
    """A maintained structure disagreed with a brute-force oracle.

    Carries enough context (seeds, event index) to rebuild the failing run.
    """

    def __init__(self, message: str, *, perm_seed: int | None = None,
                 trace_seed: int | None = None, event_index: int | None = None,
                 violations: list[str] | None = None):
        super().__init__(message)
        self.perm_seed = perm_seed
        self.trace_seed = trace_seed
        self.event_index = event_index
        self.violations = violations or []


class TraceFormatError(ValueError):
    """A trace file could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number

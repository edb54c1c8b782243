"""Exception hierarchy shared across the package."""


class HenonLabError(Exception):
    """Base class for all package-specific failures."""


class ValidationError(HenonLabError):
    """An object violates its structural invariants or a config is bad."""


class BracketError(HenonLabError):
    """A root bracket has no sign change."""


class ConvergenceError(HenonLabError):
    """An iterative solver failed to converge."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NotRenormalizable(HenonLabError):
    """A map fails a renormalizability test."""


class RefinementBudget(HenonLabError):
    """Adaptive curve refinement exceeded its point budget."""


class DegenerateMap(HenonLabError):
    """Operation undefined for a degenerate (zero-thickness) map."""


class PrecisionExhausted(HenonLabError):
    """Requested depth exceeds what the working precision resolves."""

    def __init__(self, message, max_level=None):
        super().__init__(message)
        self.max_level = max_level

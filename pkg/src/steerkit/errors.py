"""Exception hierarchy shared by all steerkit modules."""


class SteerkitError(Exception):
    """Base class for every error raised by steerkit."""


class ShapeError(SteerkitError, ValueError):
    """Structural problem: wrong matrix sizes, missing elements, mismatched shapes."""


class ConstraintError(SteerkitError, ValueError):
    """A domain constraint (positivity, normalisation, feasibility) is violated."""


class BudgetError(SteerkitError):
    """A requested computation exceeds a configured size budget."""


class SolverError(SteerkitError, RuntimeError):
    """The interior-point solver failed to reach the requested accuracy.

    The last iterate and solver diagnostics are attached so callers can
    inspect how far the solve got.
    """

    def __init__(self, message, diagnostics=None, last_iterate=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
        self.last_iterate = last_iterate

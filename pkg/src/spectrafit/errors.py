"""Exception types shared across the package."""


class SpectraFitError(Exception):
    """Base class for all package errors."""


class MalformedLineError(SpectraFitError):
    """Edge-list line that cannot be parsed as two integer vertex ids."""

    def __init__(self, line_number: int, line: str):
        self.line_number = line_number
        self.line = line
        super().__init__(f"malformed edge-list line {line_number}: {line!r}")


class EmptyGraphError(SpectraFitError):
    """Edge list declared neither vertices nor edges."""


class ResourceLimitError(SpectraFitError):
    """Graph too large for a dense operation."""


class InfeasibleDegreeError(SpectraFitError):
    """Regular-graph degree sequence that no simple graph realizes."""


class GenerationFailureError(SpectraFitError):
    """Random generator exhausted its retry budget."""


class ConvergenceFailureError(SpectraFitError):
    """Iterative eigensolver failed to converge."""


class DegenerateSpectrumError(SpectraFitError):
    """All eigenvalues equal; bandwidth selection undefined."""


class GridTooNarrowError(SpectraFitError):
    """Density grid excludes a non-negligible share of kernel mass."""


class NoConvergenceError(SpectraFitError):
    """Fixed-point solver did not converge within the iteration budget."""

    def __init__(self, max_iter: int, residual: float, point=None):
        self.max_iter = max_iter
        self.residual = residual
        self.point = point
        at = f" at z={point}" if point is not None else ""
        super().__init__(
            f"no convergence after {max_iter} iterations{at} (residual {residual:.3e})"
        )


class BranchViolationError(SpectraFitError):
    """Fixed point converged onto the wrong branch of the transform."""


class InfeasibleSpaceError(SpectraFitError):
    """Search space contains no admissible parameter value."""

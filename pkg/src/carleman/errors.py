"""Exception types shared across the toolkit."""


class CarlemanError(Exception):
    """Base class for toolkit errors."""


class NonFiniteError(CarlemanError):
    """An integrand or field evaluated to NaN/inf."""


class DegenerateFitError(CarlemanError):
    """Least-squares fit attempted on a degenerate abscissa set."""


class RingOutsideWindowError(CarlemanError):
    """Requested ring R-2 <= |j| <= R+1 does not fit inside the window."""


class ToleranceExceededError(CarlemanError):
    """A batch check exceeded its tolerance; carries the offending trial."""

    def __init__(self, message, trial=None, defect=None):
        super().__init__(message)
        self.trial = trial
        self.defect = defect


class SupportViolationError(CarlemanError):
    """Test function has mass outside the admissible support set."""


class SolverDivergenceError(CarlemanError):
    """Linear solve residual stalled above tolerance."""


class ZeroObservationError(CarlemanError):
    """Observation integral too small to normalize against."""


class RepairInfeasibleError(CarlemanError):
    """Exact repair system has no solution; carries rank diagnostics."""

    def __init__(self, message, rank=None, n_unknowns=None):
        super().__init__(message)
        self.rank = rank
        self.n_unknowns = n_unknowns


class VerificationFailureError(CarlemanError):
    """Exact verification failed; carries offending sites with residuals."""

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)


class ConfigError(CarlemanError):
    """Bad CLI/config input (maps to exit code 2)."""

"""Exception types shared across the package."""

from __future__ import annotations


class CheapSvrgError(Exception):
    """Base class for errors raised by this package."""


class RankDeficientError(CheapSvrgError):
    """The design matrix has no strictly positive smallest singular value,
    so the strong convexity constant of the least squares objective is zero
    and the convergence theory does not apply."""


class InfeasibleStepError(CheapSvrgError):
    """The step size violates the stability condition of a rate formula.

    ``inequality`` holds a human-readable statement of the violated
    condition, e.g. ``"eta >= q / (4 L)"``.
    """

    def __init__(self, message: str, inequality: str):
        super().__init__(message)
        self.inequality = inequality


class NoConvergenceError(CheapSvrgError):
    """A rate or horizon computation was requested for parameters whose
    contraction factor is not below one."""


class DivergenceError(CheapSvrgError):
    """An optimization run blew up.

    The trace recorded up to the last completed epoch is attached as
    ``trace`` so callers can still inspect or persist the partial run.
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class InfeasibleBudgetError(CheapSvrgError):
    """A gradient budget is too small to schedule even one epoch."""


class DatasetFormatError(CheapSvrgError):
    """A dataset file could not be parsed; the message names the
    offending line."""

"""Exception hierarchy for the slowlight package.

Every error raised by this package derives from :class:`SlowlightError`.
Configuration and input problems derive from :class:`ValidationError`;
iterative solvers that fail to converge raise :class:`DivergenceError`.
The command-line interface maps these onto distinct exit codes.
"""

from __future__ import annotations


class SlowlightError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SlowlightError):
    """Invalid configuration or input values."""


class InvalidSolitonError(ValidationError):
    """The spectral parameter must lie strictly in the lower half plane."""


class DegenerateSpectrumError(ValidationError):
    """The spectral parameter lies on the branch cut of k(lambda)."""


class GridError(ValidationError):
    """A time grid is too coarse, misaligned, or otherwise unusable."""


class OutOfRangeError(ValidationError):
    """A requested evaluation point falls outside the solved grid."""


class ScenarioError(ValidationError):
    """The configured scenario does not admit the requested quantity."""


class TruncationError(ValidationError):
    """A quadrature tail estimate exceeds the accepted fraction.

    Attributes
    ----------
    tail_estimate:
        Estimated magnitude of the truncated tail contribution.
    """

    def __init__(self, message: str, tail_estimate: float = float("nan")):
        super().__init__(message)
        self.tail_estimate = tail_estimate


class DivergenceError(SlowlightError):
    """An iterative solver failed to reach its tolerance.

    Attributes
    ----------
    residual:
        Last fixed-point residual observed before giving up.
    iterations:
        Number of iterations performed.
    """

    def __init__(self, message: str, residual: float = float("nan"),
                 iterations: int = 0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SmoothnessWarning(UserWarning):
    """A quantity defined for smooth fields was evaluated by one-sided limits."""

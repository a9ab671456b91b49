"""Exception hierarchy.

``SolverError`` subclasses map to CLI exit code 2, ``ValidationFailed`` and
plain ``ValueError`` from argument checks to exit code 3.
"""


class FracwaveError(Exception):
    pass


class SolverError(FracwaveError):
    """An iterative solve did not produce a wave."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class MaxItersExceeded(SolverError):
    pass


class DivergenceDetected(SolverError):
    pass


class TrivialCollapse(SolverError):
    """The iteration converged to the constant solution (no wave)."""


class SpeedUnreachable(SolverError):
    """No admissible w reproduces the requested speed."""


class SingularSpeed(SolverError):
    pass


class SingularJacobian(SolverError):
    pass


class EigenFailure(SolverError):
    pass


class ValidationFailed(FracwaveError):
    pass


class InconsistentSpacing(FracwaveError, ValueError):
    pass


class DegenerateD(FracwaveError):
    pass


class BlowupDetected(SolverError):
    pass

# errors.py
"""Exception hierarchy shared by every module.

Input problems derive from ``CurveDistanceError`` directly; anything a solver
gives up on derives from ``SolverError`` so callers (and the CLI exit codes)
can tell the two apart.
"""

from __future__ import annotations


class CurveDistanceError(ValueError):
    """Base class for all domain errors."""


# ------- input errors -------

class DimensionMismatch(CurveDistanceError):
    pass


class AngleAtCut(CurveDistanceError):
    """A rotation angle reached the branch cut of the principal logarithm."""

    def __init__(self, angle: float):
        self.angle = float(angle)
        super().__init__(
            f"rotation angle {self.angle:.12g} is at or beyond the log branch cut; "
            "refine the grid"
        )


class ComponentMismatch(CurveDistanceError):
    pass


class SingularMatrix(CurveDistanceError):
    pass


class NotARotation(CurveDistanceError):
    pass


class UnsupportedOrder(CurveDistanceError):
    pass


class GridTooCoarse(CurveDistanceError):
    pass


class NonMonotoneProfile(CurveDistanceError):
    pass


class UnsupportedProfile(CurveDistanceError):
    pass


class MalformedFile(CurveDistanceError):
    pass


class NonUniformGrid(CurveDistanceError):
    pass


class InvalidConfig(CurveDistanceError):
    pass


# ------- solver errors -------

class SolverError(CurveDistanceError):
    """A numerical method stopped without meeting its tolerance."""


class NoConvergence(SolverError):
    def __init__(self, iterations: int, residual: float, reason: str = ""):
        self.iterations = iterations
        self.residual = float(residual)
        msg = f"Newton did not converge after {iterations} iterations (|r| = {self.residual:.3e})"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class SingularJacobian(SolverError):
    def __init__(self, condition: float):
        self.condition = float(condition)
        super().__init__(f"shooting Jacobian is singular (condition estimate {self.condition:.3e})")


class AllStartsFailed(SolverError):
    def __init__(self, failures: list[str]):
        self.failures = list(failures)
        super().__init__(f"all {len(self.failures)} shooting starts failed")


class MaxIterReached(SolverError):
    def __init__(self, iterations: int, gradient_norm: float):
        self.iterations = iterations
        self.gradient_norm = float(gradient_norm)
        super().__init__(
            f"direct minimizer hit {iterations} iterations (|grad| = {self.gradient_norm:.3e})"
        )

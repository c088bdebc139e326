"""Exception types shared across the package."""


class QuatrodError(Exception):
    """Base class for all quatrod errors."""


class DegenerateQuaternion(QuatrodError):
    """Quaternion norm at or below the degeneracy threshold."""


class NotARotation(QuatrodError):
    """Matrix is not orthonormal with positive determinant."""


class AngleNearPi(QuatrodError):
    """Rotation angle too close to pi for a well-defined logarithm."""


class ZeroTangent(QuatrodError):
    """Reference tangent vanishes at a quadrature point."""


class DegenerateFrame(QuatrodError):
    """Curve has no usable normal direction (vanishing second derivative)."""


class SingularJacobian(QuatrodError):
    """Linear solve inside a Newton iteration failed."""


class NonConvergence(QuatrodError):
    """Newton iteration exhausted its iteration budget.

    Carries enough context to report and to flush partial results.
    """

    def __init__(self, step, iteration, residual, partial=None):
        self.step = step
        self.iteration = iteration
        self.residual = residual
        self.partial = partial
        super().__init__(
            f"no convergence at step {step} after {iteration} iterations "
            f"(residual {residual:.3e})"
        )


class FitDivergence(QuatrodError):
    """Levenberg-Marquardt exceeded its iteration budget."""


class ScenarioError(QuatrodError):
    """Scenario file failed validation.

    ``field`` is a dotted path into the document, e.g. ``analysis.dt_s``.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")

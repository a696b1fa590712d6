"""3D Pendulum Optimal Control - Exceptions"""
from typing import Optional


class PendulumError(Exception):
    """Base class for all errors raised by this package."""


class NonSkewInput(PendulumError):
    """Matrix handed to vee() is not skew-symmetric."""

    def __init__(self, asymmetry: float, tol: float):
        self.asymmetry = asymmetry
        self.tol = tol
        super().__init__(f"Matrix is not skew-symmetric: ||M + M^T||_F = {asymmetry:.3e} > {tol:.1e}")


class InvalidRotation(PendulumError):
    """Matrix is not a member of SO(3) within tolerance."""

    def __init__(self, orthogonality: float, determinant: float, tol: float):
        self.orthogonality = orthogonality
        self.determinant = determinant
        self.tol = tol
        super().__init__(
            f"Not a rotation: ||R^T R - I||_F = {orthogonality:.3e}, det(R) = {determinant:.15f} (tol {tol:.1e})"
        )


class InvalidBody(PendulumError):
    """Body parameters violate physical constraints."""


class NoConvergence(PendulumError):
    """An implicit solve did not reach its tolerance."""

    def __init__(self, what: str, iterations: int, residual: float, step: Optional[int] = None):
        self.what = what
        self.iterations = iterations
        self.residual = residual
        self.step = step
        super().__init__(self._message())

    def _message(self) -> str:
        where = f" at step {self.step}" if self.step is not None else ""
        return f"{self.what} did not converge{where} after {self.iterations} iterations (residual {self.residual:.3e})"

    def at_step(self, step: int) -> "NoConvergence":
        self.step = step
        self.args = (self._message(),)
        return self


class SingularVariation(PendulumError):
    """Matrix inverted inside the variational model is numerically singular."""

    def __init__(self, what: str, condition: float, step: Optional[int] = None):
        self.what = what
        self.condition = condition
        self.step = step
        super().__init__(self._message())

    def _message(self) -> str:
        where = f" at step {self.step}" if self.step is not None else ""
        return f"{self.what} is singular{where} (condition {self.condition:.3e})"

    def at_step(self, step: int) -> "SingularVariation":
        self.step = step
        self.args = (self._message(),)
        return self


class IllConditioned(PendulumError):
    """Reduced sensitivity cannot be pseudo-inverted reliably."""

    def __init__(self, condition: float, limit: float):
        self.condition = condition
        self.limit = limit
        super().__init__(f"cond(Xi Xi^T) = {condition:.3e} exceeds {limit:.1e}")


class AllStartsFailed(PendulumError):
    """Every start of a multistart solve stopped on a numerical error."""

    def __init__(self, failures: list[str]):
        self.failures = failures
        super().__init__(f"All {len(failures)} starts failed; " + "; ".join(failures[:3]))


class InfeasibleProblem(PendulumError):
    """Boundary conditions disagree on the conserved vertical momentum."""

    def __init__(self, pi3_initial: float, pi3_target: float, tol: float):
        self.pi3_initial = pi3_initial
        self.pi3_target = pi3_target
        self.tol = tol
        super().__init__(
            f"Vertical momentum mismatch: e3^T R0 Pi0 = {pi3_initial:.6e}, "
            f"e3^T RNd PiNd = {pi3_target:.6e} (tol {tol:.1e})"
        )


class OpenLoop(PendulumError):
    """Reduced trajectory does not close."""

    def __init__(self, gap: float, tol: float):
        self.gap = gap
        self.tol = tol
        super().__init__(f"Reduced trajectory is not closed: ||Gamma_0 - Gamma_N|| = {gap:.3e} > {tol:.1e}")


class NotVerticalRelation(PendulumError):
    """Two attitudes are not related by a rotation about the gravity direction."""

    def __init__(self, tilt: float, tol: float):
        self.tilt = tilt
        self.tol = tol
        super().__init__(f"Relative rotation has a horizontal component of {tilt:.3e} rad (tol {tol:.1e})")


class ConfigParseError(PendulumError):
    """Configuration file is not valid JSON."""

    def __init__(self, path: str, line: int, column: int, reason: str):
        self.path = path
        self.line = line
        self.column = column
        self.reason = reason
        super().__init__(f"{path}:{line}:{column}: {reason}")


class ConfigValidationError(PendulumError):
    """Configuration parsed but violates the schema or a problem invariant."""

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"Invalid configuration field '{field}': {reason}")


# Errors that signal a numerical failure of a run (exit code 4)
NUMERICAL_ERRORS = (
    NoConvergence, SingularVariation, IllConditioned, AllStartsFailed, OpenLoop, NotVerticalRelation, InvalidRotation
)

"""3D Pendulum Optimal Control - Dynamics and Lie group variational integrator

Discrete flow map (R_k, Pi_k) -> (R_{k+1}, Pi_{k+1}):

    h S(Pi_k) = F_k J_d - J_d F_k^T
    R_{k+1}   = R_k F_k
    Pi_{k+1}  = F_k^T Pi_k + h m g rho x R_{k+1}^T e3 + h R_{k+1}^T e3 x u_{k+1}

The only implicit part is the first equation, solved by Newton iteration in
the Lie algebra. The continuous equations are kept as a test oracle.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import solve_ivp

from .errors import InvalidBody, NoConvergence
from .so3 import E3, Mat3, RotationMatrix, Vec3, exp_so3, hat, orthogonality_error, right_jacobian, validate_rotation

logger = logging.getLogger(__name__)

DEFAULT_GRAVITY = 9.81
MAX_NEWTON = 50
NEWTON_TOL = 1e-14


@dataclass(frozen=True)
class BodyParams:
    """Mass, gravity, inertia about the pivot, and pivot-to-mass-center offset."""
    m: float
    J: Mat3
    rho: Vec3
    g: float = DEFAULT_GRAVITY
    J_d: Mat3 = field(init=False, repr=False)
    J_inv: Mat3 = field(init=False, repr=False)

    def __post_init__(self):
        J = np.array(self.J, dtype=float)
        rho = np.array(self.rho, dtype=float)
        if J.ndim == 1:
            J = np.diag(J)
        if J.shape != (3, 3) or rho.shape != (3,):
            raise InvalidBody(f"J must be 3x3 and rho a 3-vector, got {J.shape} and {rho.shape}")
        if not (np.all(np.isfinite(J)) and np.all(np.isfinite(rho))):
            raise InvalidBody("Body parameters must be finite")
        if self.m <= 0 or self.g <= 0:
            raise InvalidBody(f"Mass and gravity must be positive (m={self.m}, g={self.g})")
        if np.linalg.norm(J - J.T) > 1e-12 * max(1.0, np.linalg.norm(J)):
            raise InvalidBody("Inertia matrix must be symmetric")
        eigenvalues = np.linalg.eigvalsh(J)
        if eigenvalues.min() <= 0:
            raise InvalidBody(f"Inertia matrix must be positive definite (eigenvalues {eigenvalues})")

        object.__setattr__(self, "J", J)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "J_d", 0.5 * np.trace(J) * np.eye(3) - J)
        object.__setattr__(self, "J_inv", np.linalg.inv(J))

    @property
    def mgrho(self) -> Vec3:
        return self.m * self.g * self.rho


@dataclass(frozen=True)
class DiscreteState:
    """Attitude R_k and body angular momentum Pi_k."""
    R: RotationMatrix
    Pi: Vec3

    @classmethod
    def create(cls, R: ArrayLike, Pi: ArrayLike, tol: float = 1e-12) -> "DiscreteState":
        """Validated constructor for externally supplied states."""
        Pi = np.array(Pi, dtype=float)
        if Pi.shape != (3,) or not np.all(np.isfinite(Pi)):
            raise ValueError(f"Pi must be a finite 3-vector, got {Pi!r}")
        return cls(validate_rotation(R, tol), Pi)


@dataclass
class StateTrajectory:
    """States k = 0..N stacked as arrays; controls[k] is u_{k+1}, applied on step k -> k+1."""
    h: float
    R: NDArray[np.float64]  # (N+1, 3, 3)
    Pi: NDArray[np.float64]  # (N+1, 3)
    controls: NDArray[np.float64]  # (N, 3)

    def __len__(self) -> int:
        return self.R.shape[0]

    @property
    def steps(self) -> int:
        return self.R.shape[0] - 1

    @property
    def times(self) -> NDArray[np.float64]:
        return self.h * np.arange(len(self))

    def state(self, k: int) -> DiscreteState:
        return DiscreteState(self.R[k], self.Pi[k])

    @property
    def terminal(self) -> DiscreteState:
        return self.state(len(self) - 1)

    def pi3(self) -> NDArray[np.float64]:
        """Vertical inertial momentum e3^T R_k Pi_k at every step."""
        return np.einsum("ki,ki->k", self.R[:, 2, :], self.Pi)

    def energies(self, body: BodyParams) -> NDArray[np.float64]:
        return np.array([energy(self.state(k), body) for k in range(len(self))])

    def max_orthogonality_error(self) -> float:
        return max(orthogonality_error(R) for R in self.R)


class NewtonInfo(NamedTuple):
    iterations: int
    residual: float


def _implicit_residual(F: RotationMatrix, hPi: Vec3, J_d: Mat3) -> tuple[Vec3, Mat3]:
    A = F @ J_d
    D = A - A.T  # F J_d - J_d F^T
    return hPi - np.array([D[2, 1], D[0, 2], D[1, 0]]), A


def _fd_jacobian(f: Vec3, hPi: Vec3, J_d: Mat3, eps: float = 1e-7) -> Mat3:
    """Central-difference Jacobian of the map f -> vee(exp(f) J_d - J_d exp(f)^T)."""
    jac = np.empty((3, 3))
    for j in range(3):
        df = np.zeros(3)
        df[j] = eps
        r_plus, _ = _implicit_residual(exp_so3(f + df), hPi, J_d)
        r_minus, _ = _implicit_residual(exp_so3(f - df), hPi, J_d)
        jac[:, j] = (r_minus - r_plus) / (2 * eps)
    return jac


def _newton_step(jac: Mat3, res: Vec3) -> Optional[Vec3]:
    """jac^-1 res, or None when the solve fails or is not finite."""
    try:
        step = np.linalg.solve(jac, res)
    except np.linalg.LinAlgError:
        return None
    return step if np.all(np.isfinite(step)) else None


def solve_relative_attitude(
    Pi: ArrayLike,
    body: BodyParams,
    h: float,
    *,
    max_newton: int = MAX_NEWTON,
    tol: float = NEWTON_TOL,
    full_output: bool = False,
):
    """
    Solve h S(Pi) = F J_d - J_d F^T for the relative attitude F = exp(f).

    Newton iteration on f starting from the continuous-limit guess h J^-1 Pi.
    The Jacobian comes from the variation identity
    d vee(F J_d - J_d F^T) = {tr(F J_d) I - F J_d} F Jr(f) df.

    Returns F, or (F, NewtonInfo) when full_output is set.

    Raises:
        ValueError: if h is not positive
        NoConvergence: if the residual is not met within max_newton iterations
    """
    if h <= 0:
        raise ValueError(f"Step size must be positive, got {h}")
    Pi = np.asarray(Pi, dtype=float)
    if not np.all(np.isfinite(Pi)):
        raise NoConvergence("Relative attitude Newton solve", 0, float("inf"))
    hPi = h * Pi
    scale = max(1.0, float(np.linalg.norm(hPi)))
    J_d = body.J_d

    if not np.any(hPi):
        F = np.eye(3)
        return (F, NewtonInfo(0, 0.0)) if full_output else F

    f = body.J_inv @ hPi
    F = exp_so3(f)
    res, A = _implicit_residual(F, hPi, J_d)
    res_norm = float(np.linalg.norm(res))
    iterations = 0

    while res_norm > tol * scale:
        if iterations >= max_newton or not np.isfinite(res_norm):
            raise NoConvergence("Relative attitude Newton solve", iterations, res_norm)

        jac = (np.trace(A) * np.eye(3) - A) @ F @ right_jacobian(f)
        step = _newton_step(jac, res)
        if step is None:
            logger.debug("Analytic Newton Jacobian unusable, falling back to central differences")
            step = _newton_step(_fd_jacobian(f, hPi, J_d), res)
            if step is None:
                raise NoConvergence("Relative attitude Newton solve", iterations, res_norm)
        f = f + step
        F = exp_so3(f)
        iterations += 1

        res, A = _implicit_residual(F, hPi, J_d)
        previous, res_norm = res_norm, float(np.linalg.norm(res))
        # roundoff floor: accept once the residual stops improving at the 1e-13 level
        if res_norm <= 1e-13 * scale and res_norm >= previous:
            break

    logger.debug(f"Relative attitude converged in {iterations} Newton iterations (residual {res_norm:.2e})")
    return (F, NewtonInfo(iterations, res_norm)) if full_output else F


def advance(R: RotationMatrix, Pi: Vec3, F: RotationMatrix, u_next: Vec3, body: BodyParams, h: float) -> tuple[RotationMatrix, Vec3]:
    """Explicit part of the step for a known relative attitude F."""
    R_next = R @ F
    gamma = R_next[2, :]  # R_{k+1}^T e3
    Pi_next = F.T @ Pi + h * np.cross(body.mgrho, gamma) + h * np.cross(gamma, u_next)
    return R_next, Pi_next


def lgvi_step(state: DiscreteState, u_next: ArrayLike, body: BodyParams, h: float, **newton) -> DiscreteState:
    """One Lie group variational integrator step with control u_{k+1}."""
    F = solve_relative_attitude(state.Pi, body, h, **newton)
    R_next, Pi_next = advance(state.R, state.Pi, F, np.asarray(u_next, dtype=float), body, h)
    return DiscreteState(R_next, Pi_next)


def integrate(initial: DiscreteState, controls: ArrayLike, body: BodyParams, h: float, **newton) -> StateTrajectory:
    """
    Repeat lgvi_step over a control sequence.

    Raises:
        ValueError: if controls are not a finite (N, 3) array
        NoConvergence: with the failing step index attached
    """
    controls = np.asarray(controls, dtype=float).reshape(-1, 3)
    if not np.all(np.isfinite(controls)):
        raise ValueError("Controls must be finite")
    n = controls.shape[0]

    R = np.empty((n + 1, 3, 3))
    Pi = np.empty((n + 1, 3))
    R[0], Pi[0] = initial.R, initial.Pi

    for k in range(n):
        try:
            F = solve_relative_attitude(Pi[k], body, h, **newton)
        except NoConvergence as e:
            raise e.at_step(k)
        R[k + 1], Pi[k + 1] = advance(R[k], Pi[k], F, controls[k], body, h)

    return StateTrajectory(h=h, R=R, Pi=Pi, controls=controls)


def energy(state: DiscreteState, body: BodyParams) -> float:
    """Kinetic plus potential energy, 0.5 Omega^T J Omega - m g e3^T R rho."""
    omega = body.J_inv @ state.Pi
    kinetic = 0.5 * float(omega @ state.Pi)
    potential = -body.m * body.g * float(state.R[2, :] @ body.rho)
    return kinetic + potential


def momentum_pi3(state: DiscreteState, body: Optional[BodyParams] = None) -> float:
    """Momentum map of the vertical symmetry, e3^T R Pi."""
    return float(state.R[2, :] @ state.Pi)


def continuous_rhs(state: DiscreteState, u: ArrayLike, body: BodyParams) -> tuple[Mat3, Vec3]:
    """(R_dot, Pi_dot) of the continuous equations with moment M = R^T e3 x u."""
    omega = body.J_inv @ state.Pi
    gamma = state.R.T @ E3
    R_dot = state.R @ hat(omega)
    Pi_dot = np.cross(state.Pi, omega) + np.cross(body.mgrho, gamma) + np.cross(gamma, np.asarray(u, dtype=float))
    return R_dot, Pi_dot


def simulate_reference(
    initial: DiscreteState,
    body: BodyParams,
    t_final: float,
    u_of_t: Optional[Callable[[float], ArrayLike]] = None,
    rtol: float = 1e-12,
    atol: float = 1e-12,
) -> DiscreteState:
    """High-order (DOP853) integration of the continuous equations; test oracle only."""
    zero = np.zeros(3)

    def rhs(t, y):
        state = DiscreteState(y[:9].reshape(3, 3), y[9:])
        u = zero if u_of_t is None else u_of_t(t)
        R_dot, Pi_dot = continuous_rhs(state, u, body)
        return np.concatenate([R_dot.ravel(), Pi_dot])

    y0 = np.concatenate([initial.R.ravel(), initial.Pi])
    sol = solve_ivp(rhs, (0.0, t_final), y0, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"Reference integration failed: {sol.message}")
    y = sol.y[:, -1]
    return DiscreteState(y[:9].reshape(3, 3), y[9:])


def measure_convergence_order(initial: DiscreteState, body: BodyParams, t_final: float = 1.0, h: float = 0.01) -> float:
    """
    Empirical order of the integrator from terminal errors at h and h/2
    against the reference solution (zero controls).
    """
    reference = simulate_reference(initial, body, t_final)
    errors = []
    for step in (h, h / 2):
        n = int(round(t_final / step))
        end = integrate(initial, np.zeros((n, 3)), body, step).terminal
        errors.append(np.linalg.norm(end.R - reference.R) + np.linalg.norm(end.Pi - reference.Pi))
    order = float(np.log2(errors[0] / errors[1]))
    logger.info(f"Measured convergence order {order:.3f} (errors {errors[0]:.3e}, {errors[1]:.3e})")
    return order


def random_structured_controls(n: int, rng: np.random.Generator, scale: float = 1.0) -> NDArray[np.float64]:
    """Uniform control parameters u in [-scale, scale]^3; the moment R^T e3 x u keeps pi3 fixed."""
    return rng.uniform(-scale, scale, size=(n, 3))


def free_flow_endpoint(initial: DiscreteState, body: BodyParams, h: float, N: int) -> DiscreteState:
    """Terminal state of the uncontrolled flow after N steps."""
    return integrate(initial, np.zeros((N, 3)), body, h).terminal

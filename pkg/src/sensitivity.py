"""3D Pendulum Optimal Control - Sensitivity of the terminal state to the initial multiplier

Linearizing the extremal flow about a trajectory gives, with x_k = [zeta_k; dPi_k],

    x_{k+1}   = A11_k x_k + A12_k dlambda_k
    dlambda_k = A21_{k+1} x_{k+1} + A11_{k+1}^T dlambda_{k+1}

and with x_0 = 0 the terminal perturbation is x_N = Psi12 dlambda_0. Vertical
momentum is conserved along every extremal, so Psi12 is rank deficient by one.
Rewriting the momentum rows in terms of the inertial momentum R_N Pi_N moves
the deficiency into the last row, which is dropped before pseudo-inversion.
"""
import logging
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import cho_factor, cho_solve

from .errors import IllConditioned
from .extremal import COND_LIMIT, Costate, ExtremalTrajectory, propagate_extremal, variation_blocks
from .problem import ProblemSpec
from .so3 import RotationMatrix, Vec3, hat, log_so3, vee

logger = logging.getLogger(__name__)

FD_EPS = 1e-6


@dataclass(frozen=True)
class PerturbationState:
    """x_k = [zeta_k; dPi_k]."""
    zeta: Vec3
    dPi: Vec3

    @classmethod
    def from_vector(cls, x: ArrayLike) -> "PerturbationState":
        x = np.asarray(x, dtype=float)
        return cls(x[:3].copy(), x[3:].copy())

    def as_vector(self) -> NDArray[np.float64]:
        return np.concatenate([self.zeta, self.dPi])


@dataclass
class TransitionMatrix:
    """Psi12 maps dlambda_0 to x_N. lambda_map maps dlambda_0 to dlambda_{N-1}."""
    Psi12: NDArray[np.float64]
    lambda_map: Optional[NDArray[np.float64]] = None

    def predict(self, dlambda0: ArrayLike) -> PerturbationState:
        return PerturbationState.from_vector(self.Psi12 @ np.asarray(dlambda0, dtype=float))


@dataclass
class ReducedSensitivity:
    Xi: NDArray[np.float64]  # (5, 6)
    last_row_norm: float
    cond: float
    gram_cond: float


@dataclass
class TerminalError:
    """Reduced terminal error x'_N and the reported norms."""
    x: NDArray[np.float64]  # (5,) [zeta; first two components of the inertial momentum error]
    zeta: Vec3
    inertial_momentum_error: Vec3
    body_momentum_error: Vec3
    attitude_norm: float
    momentum_norm: float

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.x))

    @property
    def raw(self) -> NDArray[np.float64]:
        """Untransformed 6-vector [zeta; PiNd - Pi_N]."""
        return np.concatenate([self.zeta, self.body_momentum_error])


def linearized_step_blocks(trajectory: ExtremalTrajectory, k: int) -> tuple[NDArray, NDArray, NDArray]:
    """
    (A11_k, A12_k, A21_k) of the linearized optimality system at step k.

    A11_k, A12_k propagate x_k -> x_{k+1} with dlambda_k entering only through
    the control u_{k+1} = R_{k+1}^T e3 x lambda2_k. A21_k is the derivative of
    the multiplier recursion lambda_{k-1} = G(x_k, lambda_k) with respect to x_k,
    where G is written in closed form as

        G_top = F (a + v)
        G_bot = F b + B^T (a - p x b + v)

    with (a, b) = lambda_k, p = F^T Pi_k, w = m g rho - u_{k+1}, v = h Gamma' x (w x b)
    and Gamma' = R_{k+1}^T e3. A21_0 is returned for completeness; the
    accumulation never uses it.

    Raises:
        SingularVariation: propagated from variation_blocks
    """
    body, h = trajectory.body, trajectory.h
    F = trajectory.F[k]
    Pi = trajectory.Pi[k]
    a = trajectory.lam[k, :3]
    b = trajectory.lam[k, 3:]
    u = trajectory.controls[k]

    blocks = variation_blocks(F, Pi, trajectory.R[k + 1], body, h, k=k)
    gamma = blocks.gamma
    B = blocks.B
    Sg = hat(gamma)
    p = F.T @ Pi

    # control and multiplier feedback through Gamma'
    W = -h * (hat(u) + Sg @ hat(b)) @ Sg

    A11 = np.empty((6, 6))
    A11[:3, :3] = blocks.A
    A11[:3, 3:] = B
    A11[3:, :3] = blocks.C + W @ F.T
    A11[3:, 3:] = blocks.D + W @ B

    A12 = np.zeros((6, 6))
    A12[3:, 3:] = h * Sg @ Sg

    FJd = F @ body.J_d
    K_inv_T = np.linalg.inv(np.trace(FJd) * np.eye(3) - FJd).T
    Bt = B.T
    w = body.mgrho - u
    wb = np.cross(w, b)
    v = h * np.cross(gamma, wb)
    y = a - np.cross(p, b) + v
    q = K_inv_T @ F @ y
    X = body.J_d @ F
    omega = vee(X - X.T)
    Sb = hat(b)
    V = -h * (hat(wb) + Sg @ Sb @ Sb) @ Sg

    A21 = np.empty((6, 6))
    A21[:3, :3] = F @ V @ F.T
    A21[:3, 3:] = -F @ hat(a + v) @ B + F @ V @ B
    A21[3:, :3] = Bt @ V @ F.T
    A21[3:, 3:] = (
        (-F @ Sb + h * K_inv_T @ (np.outer(q, omega) + body.J_d @ hat(F.T @ q) - F @ hat(y))) @ B
        + Bt @ (Sb @ (hat(p) @ B + F.T) + V @ B)
    )
    return A11, A12, A21


def accumulate_transition(trajectory: ExtremalTrajectory) -> TransitionMatrix:
    """
    Psi12 by forward sweep of the linearized system with x_0 = 0, dlambda_0 = I.

    The multiplier perturbation is advanced by solving
    A11_{k+1}^T dlambda_{k+1} = dlambda_k - A21_{k+1} x_{k+1}.
    """
    N = trajectory.N
    X = np.zeros((6, 6))
    L = np.eye(6)
    A11, A12, _ = linearized_step_blocks(trajectory, 0)

    for k in range(N):
        X = A11 @ X + A12 @ L
        if k + 1 == N:
            break
        A11, A12, A21 = linearized_step_blocks(trajectory, k + 1)
        L = np.linalg.solve(A11.T, L - A21 @ X)

    return TransitionMatrix(Psi12=X, lambda_map=L)


def _terminal_state(args) -> tuple[RotationMatrix, Vec3]:
    problem, lam = args
    extremal = propagate_extremal(problem.R0, problem.Pi0, Costate.from_vector(lam), problem.N, problem.body, problem.h)
    return extremal.R[-1], extremal.Pi[-1]


def fd_transition(
    problem: ProblemSpec,
    lambda0: Costate,
    eps: float = FD_EPS,
    executor: Optional[Executor] = None,
) -> TransitionMatrix:
    """
    Central-difference Psi12. Column j perturbs lambda_0 by +-eps e_j; the
    attitude part is measured as log(R_N^T R_N(+-eps)) about the nominal end.
    The 12 perturbed propagations are independent and run through executor
    when one is given.
    """
    base = lambda0.as_vector()
    nominal_R, _ = _terminal_state((problem, base))

    jobs = []
    for j in range(6):
        for sign in (1.0, -1.0):
            lam = base.copy()
            lam[j] += sign * eps
            jobs.append((problem, lam))
    results = list(executor.map(_terminal_state, jobs)) if executor is not None else [_terminal_state(j) for j in jobs]

    Psi = np.empty((6, 6))
    for j in range(6):
        (R_plus, Pi_plus), (R_minus, Pi_minus) = results[2 * j], results[2 * j + 1]
        Psi[:3, j] = (log_so3(nominal_R.T @ R_plus) - log_so3(nominal_R.T @ R_minus)) / (2 * eps)
        Psi[3:, j] = (Pi_plus - Pi_minus) / (2 * eps)
    logger.debug(f"Finite-difference transition matrix computed with eps={eps:g}")
    return TransitionMatrix(Psi12=Psi)


def symmetry_transform(Psi12: ArrayLike, R_N: RotationMatrix, Pi_N: Vec3) -> NDArray[np.float64]:
    """
    Rewrite the momentum rows in terms of the inertial momentum variation
    d(R_N Pi_N) = R_N (dPi_N - S(Pi_N) zeta_N).
    """
    Psi12 = np.asarray(Psi12, dtype=float)
    T = Psi12.copy()
    T[3:, :] = R_N @ (Psi12[3:, :] - hat(Pi_N) @ Psi12[:3, :])
    return T


def reduce_and_pinv(
    transformed: ArrayLike,
    target: ArrayLike,
    cond_limit: float = COND_LIMIT,
) -> tuple[NDArray[np.float64], ReducedSensitivity]:
    """
    Minimum-norm dlambda_0 with Xi dlambda_0 = target, Xi the first five rows.
    Solves the normal equations Xi Xi^T by Cholesky factorization.

    Raises:
        IllConditioned: if cond(Xi Xi^T) exceeds cond_limit
    """
    transformed = np.asarray(transformed, dtype=float)
    Xi = transformed[:5, :]
    gram = Xi @ Xi.T
    gram_cond = float(np.linalg.cond(gram))
    if not np.isfinite(gram_cond) or gram_cond > cond_limit:
        raise IllConditioned(gram_cond, cond_limit)

    direction = Xi.T @ cho_solve(cho_factor(gram), np.asarray(target, dtype=float))
    reduced = ReducedSensitivity(
        Xi=Xi,
        last_row_norm=float(np.linalg.norm(transformed[5, :])),
        cond=float(np.linalg.cond(Xi)),
        gram_cond=gram_cond,
    )
    return direction, reduced


def raw_newton_direction(Psi12: ArrayLike, x_N: ArrayLike) -> tuple[NDArray[np.float64], float]:
    """Undecomposed step Psi12^-1 x_N and cond(Psi12). Diagnostic only."""
    Psi12 = np.asarray(Psi12, dtype=float)
    cond = float(np.linalg.cond(Psi12))
    try:
        direction = np.linalg.solve(Psi12, np.asarray(x_N, dtype=float))
    except np.linalg.LinAlgError:
        direction = np.full(6, np.inf)
    return direction, cond


def terminal_error(R_N: RotationMatrix, Pi_N: Vec3, problem: ProblemSpec) -> TerminalError:
    """
    zeta = log(R_N^T RNd) moves R_N toward RNd under dR = R S(zeta). The momentum
    error is RNd PiNd - R_N Pi_N, whose vertical component is fixed by conservation
    and is therefore left out of x'_N.
    """
    zeta = log_so3(R_N.T @ problem.RNd)
    inertial = problem.RNd @ problem.PiNd - R_N @ Pi_N
    body = problem.PiNd - Pi_N
    return TerminalError(
        x=np.concatenate([zeta, inertial[:2]]),
        zeta=zeta,
        inertial_momentum_error=inertial,
        body_momentum_error=body,
        attitude_norm=float(np.linalg.norm(log_so3(problem.RNd.T @ R_N))),
        momentum_norm=float(np.linalg.norm(body)),
    )


def singular_values(transformed: ArrayLike) -> NDArray[np.float64]:
    """Singular values of the transformed sensitivity, largest first."""
    return np.linalg.svd(np.asarray(transformed, dtype=float), compute_uv=False)


def rank_deficiency_report(transformed: ArrayLike) -> dict[str, float]:
    """sigma6/sigma5 should be tiny and sigma5/sigma1 moderate when exactly one direction is lost."""
    s = singular_values(transformed)
    return {
        "sigma_max": float(s[0]),
        "sigma_min": float(s[-1]),
        "sigma6_over_sigma5": float(s[5] / s[4]) if s[4] > 0 else float("inf"),
        "sigma5_over_sigma1": float(s[4] / s[0]) if s[0] > 0 else 0.0,
    }

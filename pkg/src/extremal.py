"""3D Pendulum Optimal Control - Extremal flow

Forward propagation of the discrete necessary conditions for optimality:
equations of motion, the control law u_{k+1} = R_{k+1}^T e3 x lambda2_k, and
the multiplier recursion

    [lambda1_k]   [A^T   C'^T] [lambda1_{k+1}]
    [lambda2_k] = [B^T   D'^T] [lambda2_{k+1}]

where the primed blocks carry the control term evaluated at u_{k+2}. Since
u_{k+2} depends on lambda2_{k+1}, each multiplier step is solved by fixed
point iteration.
"""
import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import root

from .dynamics import MAX_NEWTON, NEWTON_TOL, BodyParams, StateTrajectory, advance, solve_relative_attitude
from .errors import NoConvergence, SingularVariation
from .so3 import Mat3, RotationMatrix, Vec3, hat

logger = logging.getLogger(__name__)

MAX_FP = 50
FP_TOL = 1e-13
COND_LIMIT = 1e12


@dataclass(frozen=True)
class Costate:
    """Multipliers of the kinematic (lambda1) and momentum (lambda2) equations."""
    lambda1: Vec3
    lambda2: Vec3

    @classmethod
    def from_vector(cls, v: ArrayLike) -> "Costate":
        v = np.asarray(v, dtype=float)
        if v.shape != (6,) or not np.all(np.isfinite(v)):
            raise ValueError(f"Costate needs six finite components, got {v!r}")
        return cls(v[:3].copy(), v[3:].copy())

    @classmethod
    def zero(cls) -> "Costate":
        return cls(np.zeros(3), np.zeros(3))

    def as_vector(self) -> NDArray[np.float64]:
        return np.concatenate([self.lambda1, self.lambda2])


@dataclass(frozen=True)
class VariationBlocks:
    """
    Blocks of the linearized step at index k with the control held fixed:
    zeta_{k+1} = A zeta_k + B dPi_k and the gravity part of dPi_{k+1} = C zeta_k + D dPi_k.
    gamma is R_{k+1}^T e3, needed for the control term.
    """
    k: int
    A: Mat3
    B: Mat3
    C: Mat3
    D: Mat3
    gamma: Vec3


@dataclass
class ExtremalTrajectory:
    """Full forward sweep of the optimality system from (R0, Pi0, lambda0)."""
    h: float
    body: BodyParams
    R: NDArray[np.float64]  # (N+1, 3, 3)
    Pi: NDArray[np.float64]  # (N+1, 3)
    F: NDArray[np.float64]  # (N, 3, 3)
    lam: NDArray[np.float64]  # (N, 6), lambda_k for k = 0..N-1
    controls: NDArray[np.float64]  # (N, 3), controls[k] = u_{k+1}
    cost: float
    fp_sweeps: NDArray[np.int64]  # (N-1,) fixed-point sweeps per multiplier step

    @property
    def N(self) -> int:
        return self.F.shape[0]

    @property
    def trajectory(self) -> StateTrajectory:
        return StateTrajectory(h=self.h, R=self.R, Pi=self.Pi, controls=self.controls)

    def costate(self, k: int) -> Costate:
        return Costate.from_vector(self.lam[k])

    def gamma(self) -> NDArray[np.float64]:
        """Reduced trajectory R_k^T e3."""
        return self.R[:, 2, :].copy()


def control_from_costate(R_next: RotationMatrix, lambda2: ArrayLike) -> Vec3:
    """Optimal control u_{k+1} = R_{k+1}^T e3 x lambda2_k."""
    return np.cross(np.asarray(R_next)[2, :], np.asarray(lambda2, dtype=float))


def variation_blocks(
    F: RotationMatrix,
    Pi: Vec3,
    R_next: RotationMatrix,
    body: BodyParams,
    h: float,
    k: int = 0,
    cond_limit: float = COND_LIMIT,
) -> VariationBlocks:
    """
    A = F^T
    B = h F^T {tr(F J_d) I - F J_d}^-1
    C = h m g S(rho) S(R_{k+1}^T e3) F^T
    D = F^T + S(F^T Pi) B + h m g S(rho) S(R_{k+1}^T e3) B

    Raises:
        SingularVariation: if tr(F J_d) I - F J_d has condition above cond_limit
    """
    FJd = F @ body.J_d
    K = np.trace(FJd) * np.eye(3) - FJd
    cond = float(np.linalg.cond(K))
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularVariation("tr(F J_d) I - F J_d", cond, k)

    gamma = R_next[2, :]
    B = h * F.T @ np.linalg.inv(K)
    G = h * hat(body.mgrho) @ hat(gamma)
    return VariationBlocks(
        k=k,
        A=F.T,
        B=B,
        C=G @ F.T,
        D=F.T + hat(F.T @ Pi) @ B + G @ B,
        gamma=gamma.copy(),
    )


def costate_matrix(blocks: VariationBlocks, u_next: Vec3, h: float) -> NDArray[np.float64]:
    """
    6x6 state transition of step k with the control u_{k+1} held fixed.
    Its transpose maps lambda_{k} to lambda_{k-1}.
    """
    U = h * hat(u_next) @ hat(blocks.gamma)
    M = np.empty((6, 6))
    M[:3, :3] = blocks.A
    M[:3, 3:] = blocks.B
    M[3:, :3] = blocks.C - U @ blocks.A
    M[3:, 3:] = blocks.D - U @ blocks.B
    return M


def costate_residual(lam_next: ArrayLike, lam_k: ArrayLike, blocks: VariationBlocks, h: float) -> NDArray[np.float64]:
    """Residual of the multiplier recursion with u_{k+2} taken from lam_next."""
    lam_next = np.asarray(lam_next, dtype=float)
    u = np.cross(blocks.gamma, lam_next[3:])
    return costate_matrix(blocks, u, h).T @ lam_next - np.asarray(lam_k, dtype=float)


def costate_step(
    lam_k: Costate,
    blocks_next: VariationBlocks,
    h: float,
    *,
    max_fp: int = MAX_FP,
    tol: float = FP_TOL,
    cond_limit: float = COND_LIMIT,
    full_output: bool = False,
):
    """
    Solve the multiplier recursion for lambda_{k+1} given lambda_k.

    blocks_next are the variation blocks at k+1 (they depend on R_{k+1}, Pi_{k+1},
    F_{k+1} and R_{k+2}, none of which depend on lambda_{k+1}). Fixed point:
    evaluate the coefficient matrix at the current u_{k+2} guess, solve the
    linear system, repeat. Falls back to a Newton-type root solve when a sweep
    removes less than 10% of the previous correction.

    Returns lambda_{k+1}, or (lambda_{k+1}, sweeps) when full_output is set.
    """
    target = lam_k.as_vector()
    guess = target.copy()
    previous_delta = np.inf
    sweeps = 0

    while True:
        sweeps += 1
        u = np.cross(blocks_next.gamma, guess[3:])
        M = costate_matrix(blocks_next, u, h)
        try:
            updated = np.linalg.solve(M.T, target)
        except np.linalg.LinAlgError:
            updated = None
        if updated is None or not np.all(np.isfinite(updated)):
            cond = float(np.linalg.cond(M))
            if not np.isfinite(cond) or cond > cond_limit:
                raise SingularVariation("Multiplier recursion matrix", cond, blocks_next.k)
            raise NoConvergence("Multiplier fixed-point iteration", sweeps, float("inf"))

        delta = float(np.linalg.norm(updated - guess))
        guess = updated
        if delta <= tol * max(1.0, float(np.linalg.norm(updated))):
            break
        if sweeps >= max_fp:
            raise NoConvergence("Multiplier fixed-point iteration", sweeps, delta)
        if sweeps >= 2 and delta > 0.9 * previous_delta:
            logger.warning(f"Multiplier fixed point stagnating at step {blocks_next.k} (delta {delta:.2e}), switching to root solve")
            sol = root(costate_residual, guess, args=(target, blocks_next, h), method="hybr", tol=tol)
            residual = float(np.linalg.norm(costate_residual(sol.x, target, blocks_next, h)))
            if not sol.success and residual > 1e-12 * max(1.0, float(np.linalg.norm(target))):
                raise NoConvergence("Multiplier root solve", sweeps, residual)
            guess = sol.x
            break
        previous_delta = delta

    logger.debug(f"Multiplier step {blocks_next.k} converged in {sweeps} sweeps")
    result = Costate.from_vector(guess)
    return (result, sweeps) if full_output else result


def propagate_extremal(
    R0: RotationMatrix,
    Pi0: Vec3,
    lambda0: Costate,
    N: int,
    body: BodyParams,
    h: float,
    *,
    max_newton: int = MAX_NEWTON,
    newton_tol: float = NEWTON_TOL,
    max_fp: int = MAX_FP,
    fp_tol: float = FP_TOL,
) -> ExtremalTrajectory:
    """
    Forward sweep: F_k from Pi_k, R_{k+1} = R_k F_k, u_{k+1} from lambda2_k,
    Pi_{k+1}, then F_{k+1} and lambda_{k+1} from the multiplier recursion.
    The last recursion evaluated is k = N-2; lambda_N is never needed.

    Raises:
        ValueError: if N < 2
        NoConvergence, SingularVariation: with the failing step index attached
    """
    if N < 2:
        raise ValueError(f"Horizon must be at least 2 steps, got {N}")

    R = np.empty((N + 1, 3, 3))
    Pi = np.empty((N + 1, 3))
    F = np.empty((N, 3, 3))
    lam = np.empty((N, 6))
    controls = np.empty((N, 3))
    sweeps = np.zeros(N - 1, dtype=np.int64)

    R[0] = R0
    Pi[0] = Pi0
    lam[0] = lambda0.as_vector()
    newton = dict(max_newton=max_newton, tol=newton_tol)

    k = 0
    try:
        F[0] = solve_relative_attitude(Pi[0], body, h, **newton)
        for k in range(N):
            controls[k] = control_from_costate(R[k] @ F[k], lam[k, 3:])
            R[k + 1], Pi[k + 1] = advance(R[k], Pi[k], F[k], controls[k], body, h)
            if k + 1 == N:
                break
            F[k + 1] = solve_relative_attitude(Pi[k + 1], body, h, **newton)
            blocks = variation_blocks(F[k + 1], Pi[k + 1], R[k + 1] @ F[k + 1], body, h, k=k + 1)
            lam_next, sweeps[k] = costate_step(
                Costate.from_vector(lam[k]), blocks, h, max_fp=max_fp, tol=fp_tol, full_output=True
            )
            lam[k + 1] = lam_next.as_vector()
    except (NoConvergence, SingularVariation) as e:
        raise e.at_step(k)

    cost = float(0.5 * h * np.sum(controls * controls))
    return ExtremalTrajectory(
        h=h, body=body, R=R, Pi=Pi, F=F, lam=lam, controls=controls, cost=cost, fp_sweeps=sweeps
    )


def multiplier_recursion_residuals(extremal: ExtremalTrajectory) -> NDArray[np.float64]:
    """||M_{k+1}(u_{k+2})^T lambda_{k+1} - lambda_k|| for k = 0..N-2."""
    out = np.empty(extremal.N - 1)
    for k in range(extremal.N - 1):
        blocks = variation_blocks(extremal.F[k + 1], extremal.Pi[k + 1], extremal.R[k + 2], extremal.body, extremal.h, k=k + 1)
        out[k] = np.linalg.norm(costate_residual(extremal.lam[k + 1], extremal.lam[k], blocks, extremal.h))
    return out

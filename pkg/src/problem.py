"""3D Pendulum Optimal Control - Two-point boundary value problem"""
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .dynamics import BodyParams, DiscreteState
from .errors import InfeasibleProblem
from .so3 import RotationMatrix, Vec3, validate_rotation

FEASIBILITY_TOL = 1e-10


@dataclass(frozen=True)
class ProblemSpec:
    """Fixed initial state, desired terminal state, horizon and body."""
    R0: RotationMatrix
    Pi0: Vec3
    RNd: RotationMatrix
    PiNd: Vec3
    N: int
    h: float
    body: BodyParams

    @classmethod
    def create(
        cls,
        R0: ArrayLike,
        Pi0: ArrayLike,
        RNd: ArrayLike,
        PiNd: ArrayLike,
        N: int,
        h: float,
        body: BodyParams,
        rotation_tol: float = 1e-12,
    ) -> "ProblemSpec":
        """
        Validated constructor.

        Raises:
            InvalidRotation: if R0 or RNd is not in SO(3)
            ValueError: if N < 2, h <= 0 or a momentum is not a finite 3-vector
            InfeasibleProblem: if the vertical momenta e3^T R Pi disagree
        """
        if int(N) != N or N < 2:
            raise ValueError(f"Horizon N must be an integer >= 2, got {N}")
        if not h > 0:
            raise ValueError(f"Step size h must be positive, got {h}")

        momenta = []
        for name, value in (("Pi0", Pi0), ("PiNd", PiNd)):
            v = np.array(value, dtype=float)
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be a finite 3-vector, got {value!r}")
            momenta.append(v)

        problem = cls(
            R0=validate_rotation(R0, rotation_tol),
            Pi0=momenta[0],
            RNd=validate_rotation(RNd, rotation_tol),
            PiNd=momenta[1],
            N=int(N),
            h=float(h),
            body=body,
        )
        problem.check_feasible()
        return problem

    @property
    def pi3_initial(self) -> float:
        return float(self.R0[2, :] @ self.Pi0)

    @property
    def pi3_target(self) -> float:
        return float(self.RNd[2, :] @ self.PiNd)

    def check_feasible(self, tol: float = FEASIBILITY_TOL) -> None:
        """Vertical momentum is conserved by every admissible control, so both ends must agree."""
        if abs(self.pi3_initial - self.pi3_target) > tol:
            raise InfeasibleProblem(self.pi3_initial, self.pi3_target, tol)

    @property
    def initial_state(self) -> DiscreteState:
        return DiscreteState(self.R0, self.Pi0)

    @property
    def target_state(self) -> DiscreteState:
        return DiscreteState(self.RNd, self.PiNd)

    @property
    def duration(self) -> float:
        return self.N * self.h

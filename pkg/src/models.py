"""3D Pendulum Optimal Control - Pydantic Models"""
from enum import Enum
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

CaseId = Literal["i", "ii", "iii", "iv"]


class RunMode(str, Enum):
    """What a run computes."""
    SIMULATE = "simulate"
    SOLVE = "solve"
    PHASE = "phase"


class SolveStatus(str, Enum):
    """Outcome of a shooting solve."""
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"


class RunStatus(str, Enum):
    """Outcome of a run as written to the summary."""
    OK = "ok"
    MAX_ITERATIONS = "max_iterations"
    INVALID_CONFIG = "invalid_config"
    NUMERICAL_FAILURE = "numerical_failure"


class BodyConfig(BaseModel):
    """Rigid body about the pivot. J is a 3x3 matrix or its diagonal."""
    model_config = ConfigDict(extra="forbid")

    m: float = Field(..., gt=0, description="Mass (kg)")
    J: list[float] | list[list[float]] = Field(..., description="Inertia about the pivot (kg m^2)")
    rho: list[float] = Field(..., min_length=3, max_length=3, description="Pivot to mass center, body frame (m)")
    g: Optional[float] = Field(None, gt=0, description="Gravity (m/s^2); defaults to the PENDULUM_GRAVITY setting")

    @field_validator("J")
    @classmethod
    def inertia_shape(cls, v):
        if v and isinstance(v[0], list):
            if len(v) != 3 or any(len(row) != 3 for row in v):
                raise ValueError("J must be 3x3 or a 3-vector diagonal")
        elif len(v) != 3:
            raise ValueError("J must be 3x3 or a 3-vector diagonal")
        return v


class SolverConfig(BaseModel):
    """Newton-Armijo shooting parameters."""
    model_config = ConfigDict(extra="forbid")

    eps_S: float = Field(1e-10, gt=0, description="Stopping tolerance on ||x'_N||")
    alpha: float = Field(1e-4, gt=0, lt=0.5, description="Armijo scale")
    c_shrink: float = Field(0.1, gt=0, lt=1, description="Backtracking factor")
    max_outer: int = Field(200, ge=1)
    max_backtracks: int = Field(12, ge=1)
    fd_eps: float = Field(1e-6, gt=0, description="Central-difference step of the fallback sensitivity")
    newton_tol: float = Field(1e-14, gt=0)
    max_newton: int = Field(50, ge=1)
    fp_tol: float = Field(1e-13, gt=0)
    max_fp: int = Field(50, ge=1)
    cond_limit: float = Field(1e12, gt=1)
    seed: int = 0
    decompose: bool = Field(True, description="Drop the conserved direction before inverting the sensitivity")
    multistart: int = Field(1, ge=1, description="Seeded guesses to solve from; the cheapest converged extremal is kept")


class RunConfig(BaseModel):
    """One simulate/solve/phase run. Named cases fill in the problem; explicit fields override."""
    model_config = ConfigDict(extra="forbid")

    mode: RunMode
    case: Optional[CaseId] = None

    body: Optional[BodyConfig] = None
    R0: Optional[list[list[float]]] = None
    Pi0: Optional[list[float]] = None
    RNd: Optional[list[list[float]]] = None
    PiNd: Optional[list[float]] = None
    N: Optional[int] = Field(None, ge=2)
    h: Optional[float] = Field(None, gt=0)

    solver: SolverConfig = Field(default_factory=SolverConfig)
    lambda0: Optional[list[float]] = Field(None, min_length=6, max_length=6)
    seed: Optional[int] = None
    out: Optional[str] = None

    # simulate
    steps: Optional[int] = Field(None, ge=1)
    controls: Literal["zero", "random"] = "zero"
    control_scale: float = Field(1.0, ge=0)

    # phase
    trajectory: Optional[str] = Field(None, description="Trajectory CSV to evaluate in phase mode")
    density_lat: int = Field(19, ge=2)
    density_lon: int = Field(36, ge=3)

    @field_validator("Pi0", "PiNd")
    @classmethod
    def three_vector(cls, v):
        if v is not None and len(v) != 3:
            raise ValueError("must have three components")
        return v

    @field_validator("R0", "RNd")
    @classmethod
    def three_by_three(cls, v):
        if v is not None and (len(v) != 3 or any(len(row) != 3 for row in v)):
            raise ValueError("must be a 3x3 matrix")
        return v

    @model_validator(mode="after")
    def body_available(self) -> "RunConfig":
        if self.case is None and self.body is None:
            raise ValueError("either 'case' or 'body' must be given")
        if self.mode == RunMode.PHASE and self.trajectory is None:
            raise ValueError("phase mode needs a 'trajectory' file")
        return self

    @property
    def effective_seed(self) -> int:
        return self.seed if self.seed is not None else self.solver.seed


class ConvergenceRow(BaseModel):
    """One line search trial (inner >= 1) or the initial evaluation (outer = inner = 0)."""
    outer: int
    inner: int
    error: float
    c: float
    cond: float
    last_row_norm: float
    accepted: bool = False


class RunSummary(BaseModel):
    """Result of one run."""
    case_id: Optional[str] = None
    mode: RunMode
    status: RunStatus
    exit_code: int
    error: Optional[str] = None

    cost: Optional[float] = None
    attitude_error: Optional[float] = None
    momentum_error: Optional[float] = None
    outer_iterations: Optional[int] = None
    total_iterations: Optional[int] = None
    cond_min: Optional[float] = None
    cond_max: Optional[float] = None
    last_row_norm_max: Optional[float] = None
    lambda0: Optional[list[float]] = None
    wall_time: Optional[float] = None

    theta_geo: Optional[float] = None
    theta_geo_degenerate: Optional[bool] = None
    yaw: Optional[float] = None

    steps: Optional[int] = None
    pi3_drift: Optional[float] = None
    max_orthogonality_error: Optional[float] = None
    energy_min: Optional[float] = None
    energy_max: Optional[float] = None

    artifacts: list[str] = Field(default_factory=list)
    config: dict[str, Any] = Field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.status == RunStatus.OK

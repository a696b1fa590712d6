"""3D Pendulum Optimal Control - Run orchestration

Turns a RunConfig into a simulate, solve or phase computation, writes the
artifacts into the run's output directory and maps outcomes to exit codes.
A summary JSON is written for every run, including failed ones.
"""
import asyncio
import json
import logging
import time
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from enum import IntEnum
from pathlib import Path
from typing import Any, Optional

import numpy as np
from pydantic import ValidationError

from .artifacts import (
    read_trajectory_csv,
    write_convergence_csv,
    write_phase_density_csv,
    write_summary_json,
    write_trajectory_csv,
)
from .cases import case_boundary_conditions, get_case, make_body
from .config import settings
from .dynamics import BodyParams, DiscreteState, integrate, random_structured_controls
from .errors import (
    NUMERICAL_ERRORS,
    ConfigParseError,
    ConfigValidationError,
    InfeasibleProblem,
    InvalidBody,
    InvalidRotation,
    NotVerticalRelation,
    OpenLoop,
)
from .extremal import Costate
from .models import RunConfig, RunMode, RunStatus, RunSummary, SolveStatus
from .phase import reduced_trajectory, surface_phase, yaw_between
from .problem import ProblemSpec
from .solver import solve, solve_multistart

logger = logging.getLogger(__name__)


class ExitCode(IntEnum):
    OK = 0
    MAX_ITERATIONS = 2
    INVALID_CONFIG = 3
    NUMERICAL_FAILURE = 4


def build_config(data: dict[str, Any]) -> RunConfig:
    """
    Validate a config mapping. Problems with boundary conditions (rotations,
    vertical momentum) are checked here as well, not only at run time.

    Raises:
        ConfigValidationError: naming the first offending field
    """
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise ConfigValidationError(field, first["msg"]) from e

    if config.mode == RunMode.SOLVE or config.RNd is not None or config.PiNd is not None:
        resolve_problem(config)
    else:
        resolve_body(config)
    return config


def load_config(path: str | Path, overrides: Optional[dict[str, Any]] = None) -> RunConfig:
    """
    Read a JSON run config. Keys in overrides (CLI flags) win over the file.

    Raises:
        ConfigParseError: if the file is missing or not valid JSON
        ConfigValidationError: if the content violates the schema or a problem invariant
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigParseError(str(path), 0, 0, e.strerror or str(e)) from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParseError(str(path), e.lineno, e.colno, e.msg) from e
    if not isinstance(data, dict):
        raise ConfigParseError(str(path), 1, 1, "top level must be a JSON object")

    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return build_config(data)


def resolve_body(config: RunConfig) -> BodyParams:
    try:
        if config.body is not None:
            g = config.body.g if config.body.g is not None else settings.gravity
            return BodyParams(m=config.body.m, J=config.body.J, rho=config.body.rho, g=g)
        return make_body(get_case(config.case).body, settings.gravity)
    except InvalidBody as e:
        raise ConfigValidationError("body", str(e)) from e


def _boundary_values(config: RunConfig) -> dict[str, Any]:
    values: dict[str, Any] = case_boundary_conditions(config.case) if config.case else {}
    for name in ("R0", "Pi0", "RNd", "PiNd"):
        explicit = getattr(config, name)
        if explicit is not None:
            values[name] = explicit
    return values


def resolve_problem(config: RunConfig) -> ProblemSpec:
    """
    Case defaults, then explicit fields, then Settings for N and h.

    Raises:
        ConfigValidationError: for missing or inconsistent boundary conditions
    """
    body = resolve_body(config)
    values = _boundary_values(config)
    for name in ("R0", "Pi0", "RNd", "PiNd"):
        if name not in values:
            raise ConfigValidationError(name, "required when no named case is given")

    N = config.N if config.N is not None else settings.default_horizon
    h = config.h if config.h is not None else settings.default_step
    try:
        return ProblemSpec.create(
            values["R0"], values["Pi0"], values["RNd"], values["PiNd"], N, h, body, settings.rotation_tol
        )
    except InfeasibleProblem as e:
        raise ConfigValidationError("PiNd", str(e)) from e
    except InvalidRotation as e:
        raise ConfigValidationError("R0/RNd", str(e)) from e
    except ValueError as e:
        raise ConfigValidationError("problem", str(e)) from e


def _simulate(config: RunConfig, out_dir: Path, summary: RunSummary) -> ExitCode:
    body = resolve_body(config)
    values = _boundary_values(config)
    try:
        initial = DiscreteState.create(
            values.get("R0", np.eye(3)), values.get("Pi0", np.zeros(3)), settings.rotation_tol
        )
    except (InvalidRotation, ValueError) as e:
        raise ConfigValidationError("R0/Pi0", str(e)) from e

    h = config.h if config.h is not None else settings.default_step
    steps = config.steps or config.N or settings.default_horizon
    if config.controls == "random":
        rng = np.random.default_rng(config.effective_seed)
        controls = random_structured_controls(steps, rng, config.control_scale)
    else:
        controls = np.zeros((steps, 3))

    logger.info(f"Simulating {steps} steps (h={h}, controls={config.controls})")
    trajectory = integrate(initial, controls, body, h)
    summary.artifacts.append(str(write_trajectory_csv(out_dir / "trajectory.csv", trajectory, body)))

    pi3 = trajectory.pi3()
    energies = trajectory.energies(body)
    summary.steps = steps
    summary.pi3_drift = float(np.max(np.abs(pi3 - pi3[0])))
    summary.max_orthogonality_error = trajectory.max_orthogonality_error()
    summary.energy_min = float(energies.min())
    summary.energy_max = float(energies.max())
    logger.info(f"pi3 drift {summary.pi3_drift:.2e}, max ||R^T R - I|| {summary.max_orthogonality_error:.2e}")
    return ExitCode.OK


def _attach_phase(R: np.ndarray, body: BodyParams, summary: RunSummary) -> None:
    """Geometric phase of the reduced loop and the achieved yaw, when they are defined."""
    loop = reduced_trajectory(R)
    try:
        estimate = surface_phase(loop, body.J, full_output=True)
        summary.theta_geo = estimate.theta
        summary.theta_geo_degenerate = estimate.degenerate
    except OpenLoop as e:
        logger.warning(f"No geometric phase: {e}")
    try:
        summary.yaw = yaw_between(R[0], R[-1])
    except NotVerticalRelation as e:
        logger.warning(f"No yaw angle: {e}")


def _solve(config: RunConfig, out_dir: Path, summary: RunSummary) -> ExitCode:
    problem = resolve_problem(config)
    solver_config = config.solver.model_copy(update={"seed": config.effective_seed})
    guess = Costate.from_vector(config.lambda0) if config.lambda0 is not None else None

    logger.info(f"Solving N={problem.N}, h={problem.h}, seed={solver_config.seed}")
    if guess is None and solver_config.multistart > 1:
        solution = solve_multistart(problem, solver_config)
    else:
        solution = solve(problem, solver_config, guess)
    extremal = solution.extremal

    summary.artifacts.append(str(write_trajectory_csv(out_dir / "trajectory.csv", extremal.trajectory, problem.body, extremal.lam)))
    summary.artifacts.append(str(write_convergence_csv(out_dir / "convergence.csv", solution.record.rows)))
    summary.artifacts.append(str(write_phase_density_csv(out_dir / "phase_density.csv", problem.body.J, config.density_lat, config.density_lon)))

    cond_min, cond_max = solution.record.cond_range()
    summary.cost = solution.cost
    summary.attitude_error = solution.attitude_error
    summary.momentum_error = solution.momentum_error
    summary.outer_iterations = solution.record.outer_iterations
    summary.total_iterations = solution.record.total_iterations
    summary.cond_min = cond_min
    summary.cond_max = cond_max
    summary.last_row_norm_max = solution.record.max_last_row_norm()
    summary.lambda0 = solution.lambda0.as_vector().tolist()
    summary.wall_time = solution.wall_time
    _attach_phase(extremal.R, problem.body, summary)

    if solution.status == SolveStatus.MAX_ITERATIONS:
        summary.error = solution.message
        return ExitCode.MAX_ITERATIONS
    return ExitCode.OK


def _phase(config: RunConfig, out_dir: Path, summary: RunSummary) -> ExitCode:
    body = resolve_body(config)
    try:
        trajectory = read_trajectory_csv(Path(config.trajectory))
    except (OSError, ValueError, KeyError) as e:
        raise ConfigValidationError("trajectory", str(e)) from e

    loop = reduced_trajectory(trajectory.R)
    estimate = surface_phase(loop, body.J, full_output=True)
    summary.theta_geo = estimate.theta
    summary.theta_geo_degenerate = estimate.degenerate
    summary.steps = trajectory.steps
    try:
        summary.yaw = yaw_between(trajectory.R[0], trajectory.R[-1])
    except NotVerticalRelation as e:
        logger.warning(f"No yaw angle: {e}")
    summary.artifacts.append(str(write_phase_density_csv(out_dir / "phase_density.csv", body.J, config.density_lat, config.density_lon)))
    logger.info(f"Geometric phase {estimate.theta:.6f} rad over {estimate.area:.4f} sr")
    return ExitCode.OK


_MODES = {RunMode.SIMULATE: _simulate, RunMode.SOLVE: _solve, RunMode.PHASE: _phase}

_STATUS = {
    ExitCode.OK: RunStatus.OK,
    ExitCode.MAX_ITERATIONS: RunStatus.MAX_ITERATIONS,
    ExitCode.INVALID_CONFIG: RunStatus.INVALID_CONFIG,
    ExitCode.NUMERICAL_FAILURE: RunStatus.NUMERICAL_FAILURE,
}


def run(config: RunConfig) -> RunSummary:
    """
    Execute one run and write its artifacts. Never raises for numerical or
    validation failures: they end up in the summary's status, error and
    exit_code fields.
    """
    out_dir = Path(config.out or settings.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = RunSummary(
        case_id=config.case,
        mode=config.mode,
        status=RunStatus.OK,
        exit_code=ExitCode.OK,
        config=config.model_dump(mode="json"),
    )

    logger.info("=" * 60)
    logger.info(f"Run: mode={config.mode.value} case={config.case or '-'} out={out_dir.resolve()}")
    logger.info("=" * 60)

    start = time.perf_counter()
    try:
        code = _MODES[config.mode](config, out_dir, summary)
    except (ConfigValidationError, ConfigParseError) as e:
        logger.error(f"Invalid configuration: {e}")
        code, summary.error = ExitCode.INVALID_CONFIG, str(e)
    except NUMERICAL_ERRORS as e:
        logger.error(f"Numerical failure: {e}")
        code, summary.error = ExitCode.NUMERICAL_FAILURE, str(e)

    if summary.wall_time is None:
        summary.wall_time = time.perf_counter() - start
    summary.exit_code = int(code)
    summary.status = _STATUS[code]
    summary_path = out_dir / "summary.json"
    summary.artifacts.append(str(summary_path))
    write_summary_json(summary_path, summary)
    return summary


def case_configs(config: RunConfig, case_ids: list[str], base_out: str) -> list[RunConfig]:
    """One config per case id, each writing into <base_out>/case_<id>/."""
    return [
        config.model_copy(update={"case": case_id, "out": str(settings.get_case_folder(base_out, case_id))})
        for case_id in case_ids
    ]


def _make_executor(workers: int) -> Executor:
    if settings.batch_executor == "thread":
        return ThreadPoolExecutor(max_workers=workers)
    return ProcessPoolExecutor(max_workers=workers)


async def run_batch(configs: list[RunConfig], executor: Optional[Executor] = None) -> list[RunSummary]:
    """
    Run independent cases concurrently, at most settings.max_concurrent_cases
    at a time. Results are returned in input order.
    """
    semaphore = asyncio.Semaphore(settings.max_concurrent_cases)
    loop = asyncio.get_running_loop()
    owned = executor is None
    pool = executor or _make_executor(settings.max_concurrent_cases)

    async def run_one(config: RunConfig) -> RunSummary:
        async with semaphore:
            logger.info(f"Batch: starting case {config.case}")
            summary = await loop.run_in_executor(pool, run, config)
            logger.info(f"Batch: case {config.case} finished with status {summary.status.value}")
            return summary

    try:
        return list(await asyncio.gather(*(run_one(c) for c in configs)))
    finally:
        if owned:
            pool.shutdown(wait=True)


def batch_exit_code(summaries: list[RunSummary]) -> int:
    """Worst exit code of a batch."""
    return max((s.exit_code for s in summaries), default=int(ExitCode.OK))

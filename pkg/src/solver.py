"""3D Pendulum Optimal Control - Newton-Armijo shooting on the initial multiplier"""
import logging
import time
from concurrent.futures import Executor
from dataclasses import dataclass, field
from itertools import repeat
from typing import Optional

import numpy as np

from .errors import NUMERICAL_ERRORS, AllStartsFailed, IllConditioned, NoConvergence, SingularVariation
from .extremal import Costate, ExtremalTrajectory, propagate_extremal
from .models import ConvergenceRow, SolverConfig, SolveStatus
from .problem import ProblemSpec
from .sensitivity import (
    TerminalError,
    accumulate_transition,
    fd_transition,
    raw_newton_direction,
    reduce_and_pinv,
    symmetry_transform,
    terminal_error,
)

logger = logging.getLogger(__name__)

# failures of a trial propagation that count as an infinite error rather than aborting the solve
TRIAL_FAILURES = (NoConvergence, SingularVariation, np.linalg.LinAlgError, ValueError, FloatingPointError)

INITIAL_SHRINK = 0.5


@dataclass
class ConvergenceRecord:
    """Every evaluation of the terminal error, in order."""
    rows: list[ConvergenceRow] = field(default_factory=list)

    def add(self, **kwargs) -> ConvergenceRow:
        row = ConvergenceRow(**kwargs)
        self.rows.append(row)
        return row

    @property
    def accepted(self) -> list[ConvergenceRow]:
        return [row for row in self.rows if row.accepted]

    @property
    def accepted_errors(self) -> list[float]:
        return [row.error for row in self.accepted]

    @property
    def outer_iterations(self) -> int:
        return max((row.outer for row in self.rows), default=0)

    @property
    def total_iterations(self) -> int:
        """Outer plus inner iterations: the number of line search trials."""
        return sum(1 for row in self.rows if row.inner > 0)

    def cond_range(self) -> tuple[Optional[float], Optional[float]]:
        values = [row.cond for row in self.rows if row.inner > 0 and np.isfinite(row.cond)]
        if not values:
            return None, None
        return min(values), max(values)

    def max_last_row_norm(self) -> Optional[float]:
        values = [row.last_row_norm for row in self.rows if row.inner > 0 and np.isfinite(row.last_row_norm)]
        return max(values) if values else None


@dataclass
class Solution:
    status: SolveStatus
    lambda0: Costate
    extremal: ExtremalTrajectory
    error: TerminalError
    record: ConvergenceRecord
    wall_time: float
    message: str = ""
    start: int = 0

    @property
    def converged(self) -> bool:
        return self.status == SolveStatus.CONVERGED

    @property
    def cost(self) -> float:
        return self.extremal.cost

    @property
    def attitude_error(self) -> float:
        return self.error.attitude_norm

    @property
    def momentum_error(self) -> float:
        return self.error.momentum_norm


def initialize_multiplier(
    config: SolverConfig,
    problem: ProblemSpec,
    guess: Optional[Costate] = None,
    start: int = 0,
) -> Costate:
    """
    Supplied guess unchanged, otherwise seeded uniform components in [-1, 1].
    Start j of a multistart run takes row j of the seeded draws, so start 0
    is the single-start guess.
    """
    if guess is not None:
        return guess
    rng = np.random.default_rng(config.seed)
    return Costate.from_vector(rng.uniform(-1.0, 1.0, (start + 1, 6))[start])


def _propagate(problem: ProblemSpec, lam: Costate, config: SolverConfig) -> ExtremalTrajectory:
    return propagate_extremal(
        problem.R0,
        problem.Pi0,
        lam,
        problem.N,
        problem.body,
        problem.h,
        max_newton=config.max_newton,
        newton_tol=config.newton_tol,
        max_fp=config.max_fp,
        fp_tol=config.fp_tol,
    )


def _initial_sweep(problem: ProblemSpec, lam: Costate, config: SolverConfig) -> tuple[Costate, ExtremalTrajectory]:
    """Forward sweep from the guess, scaling lambda_0 toward zero until it succeeds."""
    for attempt in range(config.max_backtracks + 1):
        try:
            return lam, _propagate(problem, lam, config)
        except TRIAL_FAILURES as e:
            if attempt == config.max_backtracks:
                raise
            logger.warning(f"Initial sweep failed ({e}); scaling lambda_0 by {INITIAL_SHRINK}")
            lam = Costate.from_vector(INITIAL_SHRINK * lam.as_vector())


def _search_direction(
    problem: ProblemSpec,
    lam: Costate,
    extremal: ExtremalTrajectory,
    te: TerminalError,
    config: SolverConfig,
    use_fd: bool,
) -> tuple[np.ndarray, float, float]:
    """Direction D, the condition number it was computed with and the last-row norm."""
    if use_fd:
        Psi12 = fd_transition(problem, lam, config.fd_eps).Psi12
    else:
        Psi12 = accumulate_transition(extremal).Psi12

    transformed = symmetry_transform(Psi12, extremal.R[-1], extremal.Pi[-1])
    last_row_norm = float(np.linalg.norm(transformed[5, :]))
    if config.decompose:
        direction, reduced = reduce_and_pinv(transformed, te.x, config.cond_limit)
        return direction, reduced.cond, last_row_norm
    direction, cond = raw_newton_direction(Psi12, te.raw)
    return direction, cond, last_row_norm


def solve(problem: ProblemSpec, config: SolverConfig, lambda0_guess: Optional[Costate] = None) -> Solution:
    """
    Newton-Armijo iteration on lambda_0.

    Outer loop: sensitivity Psi12 along the current extremal, symmetry transform,
    minimum-norm direction D = Xi^+ x'_N. Inner loop: trial lambda_0 + c D with
    c = 1, c_shrink, c_shrink^2, ... until Error_t <= (1 - 2 alpha c) Error.
    When the line search is exhausted the best trial is taken if it lowers the
    error at all; otherwise the next outer iteration uses a finite-difference
    sensitivity instead of the analytic one. An ill-conditioned analytic
    sensitivity is also retried once by finite differences.

    If the sweep from the initial guess fails, lambda_0 is scaled toward zero
    until it succeeds. Running out of outer iterations is not an error: the
    best iterate is returned with status MAX_ITERATIONS.

    Raises:
        InfeasibleProblem: if the vertical momenta of the two ends disagree
        IllConditioned: if Xi Xi^T cannot be factored reliably even by finite differences
        NoConvergence, SingularVariation: if no scaled initial guess can be propagated
    """
    start = time.perf_counter()
    problem.check_feasible()

    lam, extremal = _initial_sweep(problem, initialize_multiplier(config, problem, lambda0_guess), config)
    te = terminal_error(extremal.R[-1], extremal.Pi[-1], problem)
    error = te.norm

    record = ConvergenceRecord()
    record.add(outer=0, inner=0, error=error, c=0.0, cond=float("nan"), last_row_norm=float("nan"), accepted=True)
    logger.info(f"Shooting start: error {error:.3e}, decompose={config.decompose}")

    outer = 0
    use_fd = False
    status = SolveStatus.CONVERGED
    message = ""

    while error > config.eps_S:
        if outer >= config.max_outer:
            status = SolveStatus.MAX_ITERATIONS
            message = f"Not converged after {outer} outer iterations (error {error:.3e})"
            logger.warning(message)
            break
        outer += 1

        try:
            direction, cond, last_row_norm = _search_direction(problem, lam, extremal, te, config, use_fd)
        except IllConditioned as e:
            if use_fd:
                raise
            logger.warning(f"Outer {outer}: {e}; retrying with a finite-difference sensitivity")
            direction, cond, last_row_norm = _search_direction(problem, lam, extremal, te, config, True)
        use_fd = False

        base = lam.as_vector()
        c = 1.0
        best = None
        accepted = None
        for inner in range(1, config.max_backtracks + 1):
            trial_error = float("inf")
            trial = None
            try:
                trial_lam = Costate.from_vector(base + c * direction)
                trial_extremal = _propagate(problem, trial_lam, config)
                trial_te = terminal_error(trial_extremal.R[-1], trial_extremal.Pi[-1], problem)
                if np.isfinite(trial_te.norm):
                    trial_error = trial_te.norm
                    trial = (trial_lam, trial_extremal, trial_te)
            except TRIAL_FAILURES as e:
                logger.debug(f"Trial {outer}.{inner} failed: {e}")

            row = record.add(
                outer=outer, inner=inner, error=trial_error, c=c, cond=cond, last_row_norm=last_row_norm
            )
            logger.debug(f"Trial {outer}.{inner}: c={c:.1e} error {trial_error:.3e}")

            if trial is not None and (best is None or trial_error < best[0]):
                best = (trial_error, row, trial)
            if trial is not None and trial_error <= (1.0 - 2.0 * config.alpha * c) * error:
                accepted = (row, trial)
                break
            c *= config.c_shrink

        if accepted is None:
            if best is not None and best[0] < error:
                logger.warning(f"Line search exhausted at outer {outer}; taking best trial (error {best[0]:.3e})")
                accepted = (best[1], best[2])
            else:
                logger.warning(f"Line search exhausted at outer {outer} without descent; recomputing sensitivity by finite differences")
                use_fd = True
                continue

        row, (lam, extremal, te) = accepted
        row.accepted = True
        error = te.norm
        logger.info(f"Outer {outer}: error {error:.3e}, c={row.c:.1e}, cond {cond:.2e}, last row {last_row_norm:.1e}")

    wall_time = time.perf_counter() - start
    if status == SolveStatus.CONVERGED:
        logger.info(f"Converged in {outer} outer / {record.total_iterations} total iterations ({wall_time:.2f}s), cost {extremal.cost:.6f}")
    return Solution(
        status=status,
        lambda0=lam,
        extremal=extremal,
        error=te,
        record=record,
        wall_time=wall_time,
        message=message,
    )


def _solve_start(problem: ProblemSpec, config: SolverConfig, start: int) -> tuple[int, Optional[Solution], str]:
    """One multistart run. Failures come back as text so they cross process boundaries."""
    guess = initialize_multiplier(config, problem, start=start)
    try:
        solution = solve(problem, config, guess)
    except NUMERICAL_ERRORS as e:
        logger.warning(f"Start {start} failed: {e}")
        return start, None, str(e)
    solution.start = start
    return start, solution, ""


def solve_multistart(problem: ProblemSpec, config: SolverConfig, executor: Optional[Executor] = None) -> Solution:
    """
    Solve from config.multistart seeded guesses and keep the cheapest converged
    extremal. Without any converged start the iterate with the smallest
    terminal error is returned. Starts run through executor when one is given.

    Raises:
        InfeasibleProblem: if the vertical momenta of the two ends disagree
        AllStartsFailed: if every start stopped on a numerical error
    """
    problem.check_feasible()
    starts = range(config.multistart)
    if executor is None:
        outcomes = [_solve_start(problem, config, s) for s in starts]
    else:
        outcomes = list(executor.map(_solve_start, repeat(problem), repeat(config), starts))

    solutions = [solution for _, solution, _ in outcomes if solution is not None]
    if not solutions:
        raise AllStartsFailed([f"start {s}: {msg}" for s, _, msg in outcomes])

    converged = [s for s in solutions if s.converged]
    if converged:
        best = min(converged, key=lambda s: (s.cost, s.start))
    else:
        best = min(solutions, key=lambda s: (s.error.norm, s.start))
    costs = ", ".join(f"{s.start}:{s.cost:.6f}" for s in converged)
    logger.info(f"Multistart: {len(converged)}/{config.multistart} converged ({costs or 'none'}); keeping start {best.start}")
    return best


def tail_contraction_ratios(record: ConvergenceRecord, count: int = 3) -> list[float]:
    """
    Ratios of successive log10 error drops over the last `count` accepted
    outer iterations. Values above one mean the decay is faster than linear.
    """
    errors = [e for e in record.accepted_errors if e > 0]
    logs = np.log10(errors[-(count + 1):])
    drops = -np.diff(logs)
    return [float(drops[i + 1] / drops[i]) for i in range(len(drops) - 1) if drops[i] > 0]

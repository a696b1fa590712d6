"""Pytest configuration and shared fixtures."""
import pytest
import sys
import os
import tempfile

import numpy as np

# Ensure src is in path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

# Set environment for tests BEFORE importing config
_TEST_ROOT = tempfile.mkdtemp(prefix="pendulum-tests-")
os.environ.setdefault('PENDULUM_OUTPUT_DIR', os.path.join(_TEST_ROOT, 'runs'))
os.environ.setdefault('PENDULUM_LOG_DIR', os.path.join(_TEST_ROOT, 'logs'))
os.environ.setdefault('PENDULUM_MAX_CONCURRENT_CASES', '2')
os.environ.setdefault('PENDULUM_BATCH_EXECUTOR', 'thread')


@pytest.fixture
def body_a():
    """Body A: m=1, J=diag[0.13, 0.28, 0.17], rho=0.3 e3."""
    from src.cases import make_body
    return make_body("A", 9.81)


@pytest.fixture
def body_b():
    """Body B: m=1, J=diag[0.22, 0.23, 0.03], rho=0.4 e3."""
    from src.cases import make_body
    return make_body("B", 9.81)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_rotation(rng):
    """Factory for random rotation matrices."""
    from src.so3 import exp_so3

    def make():
        v = rng.normal(size=3)
        return exp_so3(rng.uniform(0.1, 3.0) * v / np.linalg.norm(v))
    return make


@pytest.fixture
def case_i_problem(body_a):
    """Case (i) with N=100, h=0.01."""
    from src.cases import YAW_90
    from src.problem import ProblemSpec
    return ProblemSpec.create(np.eye(3), np.zeros(3), YAW_90, np.zeros(3), 100, 0.01, body_a)


@pytest.fixture
def moving_extremal(body_a):
    """Short extremal from a tilted, spinning start with nonzero multipliers."""
    from src.extremal import Costate, propagate_extremal
    from src.so3 import exp_so3

    R0 = exp_so3([0.3, -0.2, 0.5])
    Pi0 = np.array([0.05, -0.08, 0.03])
    lam0 = Costate.from_vector([0.4, -0.3, 0.2, 0.5, -0.6, 0.3])
    return propagate_extremal(R0, Pi0, lam0, 6, body_a, 0.01)


@pytest.fixture(scope="session")
def solved_case_i():
    """Converged case (i) solution, shared by the slow tests."""
    from src.cases import YAW_90, make_body
    from src.models import SolverConfig
    from src.problem import ProblemSpec
    from src.solver import solve

    problem = ProblemSpec.create(np.eye(3), np.zeros(3), YAW_90, np.zeros(3), 100, 0.01, make_body("A", 9.81))
    return problem, solve(problem, SolverConfig(seed=0))


@pytest.fixture
def output_dir(tmp_path):
    """Fresh output directory for one run."""
    out = tmp_path / "out"
    out.mkdir()
    return out

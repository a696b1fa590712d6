"""Tests for Pydantic models."""
import pytest


class TestRunConfig:
    """Test RunConfig validation."""

    def test_named_case(self):
        """Test a minimal solve config for a built-in case."""
        from src.models import RunConfig, RunMode

        config = RunConfig(mode="solve", case="i")
        assert config.mode == RunMode.SOLVE
        assert config.solver.eps_S == 1e-10
        assert config.solver.decompose is True
        assert config.controls == "zero"

    def test_unknown_key_rejected(self):
        """Test that misspelled keys are not silently ignored."""
        from pydantic import ValidationError
        from src.models import RunConfig

        with pytest.raises(ValidationError) as exc:
            RunConfig(mode="solve", case="i", solvr={})
        assert exc.value.errors()[0]["loc"] == ("solvr",)

    def test_unknown_solver_key_rejected(self):
        """Test that SolverConfig forbids extra fields."""
        from pydantic import ValidationError
        from src.models import RunConfig

        with pytest.raises(ValidationError):
            RunConfig(mode="solve", case="i", solver={"eps": 1e-8})

    def test_multistart_defaults_and_bounds(self):
        """Test multistart defaults to a single start and must be positive."""
        from pydantic import ValidationError
        from src.models import RunConfig

        assert RunConfig(mode="solve", case="i").solver.multistart == 1
        with pytest.raises(ValidationError):
            RunConfig(mode="solve", case="i", solver={"multistart": 0})

    def test_needs_case_or_body(self):
        """Test that a body source is required."""
        from pydantic import ValidationError
        from src.models import RunConfig

        with pytest.raises(ValidationError):
            RunConfig(mode="simulate")

    def test_phase_needs_trajectory(self):
        """Test that phase mode requires a trajectory file."""
        from pydantic import ValidationError
        from src.models import RunConfig

        with pytest.raises(ValidationError):
            RunConfig(mode="phase", case="i")

    def test_unknown_case_rejected(self):
        """Test that case ids outside i..iv fail."""
        from pydantic import ValidationError
        from src.models import RunConfig

        with pytest.raises(ValidationError):
            RunConfig(mode="solve", case="v")

    @pytest.mark.parametrize("field,value", [
        ("Pi0", [0.0, 0.0]),
        ("RNd", [[1, 0, 0], [0, 1, 0]]),
        ("lambda0", [0.0] * 5),
        ("N", 1),
        ("h", 0.0),
    ])
    def test_shape_and_range_checks(self, field, value):
        """Test vector shapes and numeric ranges."""
        from pydantic import ValidationError
        from src.models import RunConfig

        with pytest.raises(ValidationError):
            RunConfig(mode="solve", case="i", **{field: value})

    def test_effective_seed(self):
        """Test the top-level seed wins over the solver seed."""
        from src.models import RunConfig

        assert RunConfig(mode="solve", case="i", solver={"seed": 3}).effective_seed == 3
        assert RunConfig(mode="solve", case="i", seed=7, solver={"seed": 3}).effective_seed == 7


class TestBodyConfig:
    """Test BodyConfig validation."""

    def test_diagonal_and_full_inertia(self):
        """Test both inertia forms are accepted."""
        from src.models import BodyConfig

        assert BodyConfig(m=1.0, J=[0.1, 0.2, 0.3], rho=[0, 0, 0.3]).J == [0.1, 0.2, 0.3]
        full = [[0.1, 0, 0], [0, 0.2, 0], [0, 0, 0.3]]
        assert BodyConfig(m=1.0, J=full, rho=[0, 0, 0.3]).J == full

    def test_bad_inertia_shape(self):
        """Test a 2x2 inertia is rejected."""
        from pydantic import ValidationError
        from src.models import BodyConfig

        with pytest.raises(ValidationError):
            BodyConfig(m=1.0, J=[[1, 0], [0, 1]], rho=[0, 0, 0.3])

    def test_nonpositive_mass(self):
        """Test m must be positive."""
        from pydantic import ValidationError
        from src.models import BodyConfig

        with pytest.raises(ValidationError):
            BodyConfig(m=0.0, J=[0.1, 0.2, 0.3], rho=[0, 0, 0.3])


class TestRunSummary:
    """Test RunSummary model."""

    def test_success_property(self):
        """Test only OK counts as success."""
        from src.models import RunMode, RunStatus, RunSummary

        ok = RunSummary(mode=RunMode.SOLVE, status=RunStatus.OK, exit_code=0)
        capped = RunSummary(mode=RunMode.SOLVE, status=RunStatus.MAX_ITERATIONS, exit_code=2, error="capped")
        assert ok.success is True
        assert capped.success is False
        assert ok.artifacts == []

    def test_json_serialization(self):
        """Test enums serialize as their values."""
        from src.models import RunMode, RunStatus, RunSummary

        summary = RunSummary(mode=RunMode.PHASE, status=RunStatus.OK, exit_code=0, theta_geo=1.5)
        data = summary.model_dump(mode="json")
        assert data["mode"] == "phase"
        assert data["status"] == "ok"
        assert data["theta_geo"] == 1.5

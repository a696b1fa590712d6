"""Tests for CSV and JSON run artifacts."""
import csv
import json

import pytest
import numpy as np


@pytest.fixture
def controlled_trajectory(body_a, rng):
    """Twenty controlled steps from a tilted start."""
    from src.dynamics import DiscreteState, integrate, random_structured_controls
    from src.so3 import exp_so3

    initial = DiscreteState(exp_so3([0.2, -0.1, 0.4]), np.array([0.03, 0.01, -0.02]))
    return integrate(initial, random_structured_controls(20, rng), body_a, 0.01)


class TestTrajectoryCsv:
    """Test trajectory files."""

    def test_header_and_rows(self, controlled_trajectory, body_a, tmp_path):
        """Test one row per state with the documented columns."""
        from src.artifacts import TRAJECTORY_COLUMNS, write_trajectory_csv

        path = write_trajectory_csv(tmp_path / "trajectory.csv", controlled_trajectory, body_a)
        with path.open(newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == TRAJECTORY_COLUMNS
        assert len(rows) == 22
        assert rows[-1][TRAJECTORY_COLUMNS.index("u1")] == ""
        assert rows[1][TRAJECTORY_COLUMNS.index("lambda1_1")] == ""

    def test_read_back_is_exact(self, controlled_trajectory, body_a, tmp_path):
        """Test states and controls survive the text format bit for bit."""
        from src.artifacts import read_trajectory_csv, write_trajectory_csv

        path = write_trajectory_csv(tmp_path / "trajectory.csv", controlled_trajectory, body_a)
        loaded = read_trajectory_csv(path)
        np.testing.assert_array_equal(loaded.R, controlled_trajectory.R)
        np.testing.assert_array_equal(loaded.Pi, controlled_trajectory.Pi)
        np.testing.assert_array_equal(loaded.controls, controlled_trajectory.controls)
        assert loaded.h == pytest.approx(0.01, abs=1e-15)

    def test_multiplier_columns(self, moving_extremal, body_a, tmp_path):
        """Test lambda_k is written next to state k."""
        from src.artifacts import TRAJECTORY_COLUMNS, write_trajectory_csv

        path = write_trajectory_csv(tmp_path / "t.csv", moving_extremal.trajectory, body_a, moving_extremal.lam)
        with path.open(newline="") as f:
            rows = list(csv.DictReader(f))
        assert float(rows[0]["lambda2_1"]) == moving_extremal.lam[0, 3]
        assert rows[-1]["lambda1_1"] == ""
        assert set(rows[0]) == set(TRAJECTORY_COLUMNS)

    def test_missing_columns_rejected(self, tmp_path):
        """Test a file without the trajectory header raises ValueError."""
        from src.artifacts import read_trajectory_csv

        path = tmp_path / "bad.csv"
        path.write_text("k,t\n0,0\n1,0.01\n")
        with pytest.raises(ValueError, match="missing trajectory columns"):
            read_trajectory_csv(path)


class TestOtherArtifacts:
    """Test convergence, density and summary files."""

    def test_convergence_csv(self, tmp_path):
        """Test every record row is written with an accepted flag."""
        from src.artifacts import CONVERGENCE_COLUMNS, write_convergence_csv
        from src.solver import ConvergenceRecord

        record = ConvergenceRecord()
        record.add(outer=0, inner=0, error=1.0, c=0.0, cond=float("nan"), last_row_norm=float("nan"), accepted=True)
        record.add(outer=1, inner=1, error=float("inf"), c=1.0, cond=10.0, last_row_norm=1e-15)
        path = write_convergence_csv(tmp_path / "convergence.csv", record.rows)
        with path.open(newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == CONVERGENCE_COLUMNS
        assert rows[1][-1] == "1" and rows[2][-1] == "0"
        assert rows[2][2] == "inf"

    def test_phase_density_csv(self, body_b, tmp_path):
        """Test one row per grid point."""
        from src.artifacts import write_phase_density_csv

        path = write_phase_density_csv(tmp_path / "phase_density.csv", body_b.J, 5, 8)
        with path.open(newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["lat", "lon", "value"]
        assert len(rows) == 1 + 5 * 8

    def test_summary_json(self, tmp_path):
        """Test the summary is valid JSON with enum values."""
        from src.artifacts import write_summary_json
        from src.models import RunMode, RunStatus, RunSummary

        summary = RunSummary(case_id="i", mode=RunMode.SOLVE, status=RunStatus.OK, exit_code=0, cost=1.25)
        data = json.loads(write_summary_json(tmp_path / "summary.json", summary).read_text())
        assert data["status"] == "ok"
        assert data["cost"] == 1.25

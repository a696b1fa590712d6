"""3D Pendulum Optimal Control - Run artifacts (CSV and JSON)"""
import csv
import logging
from pathlib import Path
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from .dynamics import BodyParams, StateTrajectory, energy
from .models import RunSummary
from .phase import phase_density_grid

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = (
    ["k", "t"]
    + [f"R{i}{j}" for i in range(1, 4) for j in range(1, 4)]
    + ["Pi1", "Pi2", "Pi3"]
    + ["u1", "u2", "u3"]
    + ["lambda1_1", "lambda1_2", "lambda1_3"]
    + ["lambda2_1", "lambda2_2", "lambda2_3"]
    + ["pi3", "energy"]
)
CONVERGENCE_COLUMNS = ["outer", "inner", "error", "c", "cond", "last_row_norm", "accepted"]


def _fmt(x: float) -> str:
    # 17 significant digits round-trip a double exactly
    return f"{x:.17g}"


def write_trajectory_csv(
    path: Path,
    trajectory: StateTrajectory,
    body: BodyParams,
    multipliers: Optional[NDArray[np.float64]] = None,
) -> Path:
    """
    One row per state k = 0..N. The control and multiplier columns of row k
    hold u_{k+1} and lambda_k; they are left empty where undefined.
    """
    path = Path(path)
    pi3 = trajectory.pi3()
    times = trajectory.times
    n_controls = trajectory.controls.shape[0]
    n_multipliers = 0 if multipliers is None else multipliers.shape[0]

    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRAJECTORY_COLUMNS)
        for k in range(len(trajectory)):
            state = trajectory.state(k)
            row = [str(k), _fmt(times[k])]
            row += [_fmt(x) for x in state.R.ravel()]
            row += [_fmt(x) for x in state.Pi]
            row += [_fmt(x) for x in trajectory.controls[k]] if k < n_controls else [""] * 3
            row += [_fmt(x) for x in multipliers[k]] if k < n_multipliers else [""] * 6
            row += [_fmt(pi3[k]), _fmt(energy(state, body))]
            writer.writerow(row)

    logger.info(f"Trajectory written: {path} ({len(trajectory)} rows)")
    return path


def read_trajectory_csv(path: Path) -> StateTrajectory:
    """
    Inverse of write_trajectory_csv for the state and control columns.

    Raises:
        ValueError: if the header or a row is malformed
    """
    path = Path(path)
    with path.open(newline="") as f:
        reader = csv.DictReader(f)
        missing = set(TRAJECTORY_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing trajectory columns {sorted(missing)}")
        rows = list(reader)
    if len(rows) < 2:
        raise ValueError(f"{path}: trajectory needs at least two rows")

    R_names = [f"R{i}{j}" for i in range(1, 4) for j in range(1, 4)]
    R = np.array([[float(row[c]) for c in R_names] for row in rows]).reshape(-1, 3, 3)
    Pi = np.array([[float(row[c]) for c in ("Pi1", "Pi2", "Pi3")] for row in rows])
    controls = np.array([[float(row[c]) for c in ("u1", "u2", "u3")] for row in rows if row["u1"] != ""])
    h = float(rows[1]["t"]) - float(rows[0]["t"])
    return StateTrajectory(h=h, R=R, Pi=Pi, controls=controls.reshape(-1, 3))


def write_convergence_csv(path: Path, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CONVERGENCE_COLUMNS)
        for row in rows:
            writer.writerow([
                row.outer, row.inner, _fmt(row.error), _fmt(row.c), _fmt(row.cond), _fmt(row.last_row_norm), int(row.accepted)
            ])
    logger.info(f"Convergence record written: {path} ({len(rows)} rows)")
    return path


def write_phase_density_csv(path: Path, J, n_lat: int, n_lon: int) -> Path:
    path = Path(path)
    lat, lon, values = phase_density_grid(J, n_lat, n_lon)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["lat", "lon", "value"])
        for i, phi in enumerate(lat):
            for j, lam in enumerate(lon):
                writer.writerow([_fmt(phi), _fmt(lam), _fmt(values[i, j])])
    return path


def write_summary_json(path: Path, summary: RunSummary) -> Path:
    path = Path(path)
    path.write_text(summary.model_dump_json(indent=2) + "\n")
    logger.info(f"Summary written: {path}")
    return path

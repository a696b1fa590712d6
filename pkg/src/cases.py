"""3D Pendulum Optimal Control - Built-in bodies and reorientation cases

All cases start at rest in the reference attitude and end at rest after a
pure rotation about the gravity direction, so the vertical momentum is zero
at both ends.
"""
from dataclasses import dataclass

import numpy as np

from .dynamics import BodyParams
from .so3 import RotationMatrix

BODIES = {
    "A": {"m": 1.0, "J": [0.13, 0.28, 0.17], "rho": [0.0, 0.0, 0.3]},
    "B": {"m": 1.0, "J": [0.22, 0.23, 0.03], "rho": [0.0, 0.0, 0.4]},
}

YAW_90 = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
YAW_180 = np.diag([-1.0, -1.0, 1.0])


@dataclass(frozen=True)
class CaseDefinition:
    case_id: str
    body: str
    RNd: RotationMatrix
    description: str


CASES = {
    "i": CaseDefinition("i", "A", YAW_90, "Body A, 90 degree yaw"),
    "ii": CaseDefinition("ii", "A", YAW_180, "Body A, 180 degree yaw"),
    "iii": CaseDefinition("iii", "B", YAW_90, "Body B, 90 degree yaw"),
    "iv": CaseDefinition("iv", "B", YAW_180, "Body B, 180 degree yaw"),
}


def case_ids() -> list[str]:
    return list(CASES)


def get_case(case_id: str) -> CaseDefinition:
    if case_id not in CASES:
        raise KeyError(f"Unknown case '{case_id}'. Available: {', '.join(CASES)}")
    return CASES[case_id]


def make_body(name: str, g: float) -> BodyParams:
    params = BODIES[name]
    return BodyParams(m=params["m"], J=params["J"], rho=params["rho"], g=g)


def case_boundary_conditions(case_id: str) -> dict:
    """R0, Pi0, RNd, PiNd of a named case as plain lists (JSON friendly)."""
    case = get_case(case_id)
    return {
        "R0": np.eye(3).tolist(),
        "Pi0": [0.0, 0.0, 0.0],
        "RNd": case.RNd.tolist(),
        "PiNd": [0.0, 0.0, 0.0],
    }

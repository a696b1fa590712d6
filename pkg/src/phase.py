"""3D Pendulum Optimal Control - Geometric phase of closed reduced trajectories

At zero vertical momentum a closed loop of Gamma = R^T e3 on the unit sphere
produces a net rotation about e3 equal to the surface integral of

    (2 ||J Gamma||^2 - tr(J) Gamma^T J Gamma) / (Gamma^T J Gamma)^2

over the region the loop bounds. Area is signed: positive for loops running
counterclockwise when seen from outside the sphere.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import NotVerticalRelation, OpenLoop
from .so3 import Mat3, RotationMatrix, Vec3, log_so3

logger = logging.getLogger(__name__)

CLOSURE_TOL = 1e-8
DEGENERATE_AREA = 1e-12
QUADRATURE_TOL = 1e-6
MAX_DEPTH = 12
VERTICAL_TOL = 1e-6


@dataclass(frozen=True)
class ReducedTrajectory:
    """Unit vectors Gamma_k = R_k^T e3."""
    points: NDArray[np.float64]  # (n, 3)

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 3 or points.shape[0] < 2:
            raise ValueError(f"Reduced trajectory needs at least two 3-vectors, got shape {points.shape}")
        norms = np.linalg.norm(points, axis=1)
        worst = float(np.max(np.abs(norms - 1.0)))
        if worst > 1e-12:
            raise ValueError(f"Reduced trajectory points must be unit vectors (worst deviation {worst:.3e})")
        object.__setattr__(self, "points", points)

    def __len__(self) -> int:
        return self.points.shape[0]

    @classmethod
    def from_rotations(cls, R_seq: ArrayLike) -> "ReducedTrajectory":
        return cls(np.asarray(R_seq, dtype=float)[:, 2, :])

    @property
    def closure_gap(self) -> float:
        return float(np.linalg.norm(self.points[0] - self.points[-1]))

    def reversed(self) -> "ReducedTrajectory":
        return ReducedTrajectory(self.points[::-1].copy())


@dataclass
class PhaseEstimate:
    theta: float  # wrapped to (-pi, pi]
    theta_unwrapped: float
    area: float  # signed, steradian
    degenerate: bool
    triangles: int  # leaf triangles evaluated


def reduced_trajectory(R_seq: ArrayLike) -> ReducedTrajectory:
    return ReducedTrajectory.from_rotations(R_seq)


def wrap_angle(theta: float) -> float:
    """Map to (-pi, pi]."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


def angular_distance(a: float, b: float) -> float:
    return abs(wrap_angle(a - b))


def phase_integrand(Gamma: ArrayLike, J: ArrayLike) -> float:
    Gamma = np.asarray(Gamma, dtype=float)
    J = np.asarray(J, dtype=float)
    if J.ndim == 1:
        J = np.diag(J)
    JG = J @ Gamma
    q = float(Gamma @ JG)
    return (2.0 * float(JG @ JG) - float(np.trace(J)) * q) / (q * q)


def _normalize(v: Vec3) -> Vec3:
    return v / np.linalg.norm(v)


def spherical_triangle_area(a: Vec3, b: Vec3, c: Vec3) -> float:
    """Signed area of the geodesic triangle (a, b, c); positive when counterclockwise from outside."""
    triple = float(a @ np.cross(b, c))
    return 2.0 * math.atan2(triple, 1.0 + float(a @ b) + float(b @ c) + float(c @ a))


class _TriangleQuadrature:
    """Adaptive midpoint-subdivision quadrature of the phase density on spherical triangles."""

    def __init__(self, J: Mat3, tol: float = QUADRATURE_TOL, max_depth: int = MAX_DEPTH):
        self.J = J
        self.tol = tol
        self.max_depth = max_depth
        self.leaves = 0

    def estimate(self, a: Vec3, b: Vec3, c: Vec3) -> float:
        area = spherical_triangle_area(a, b, c)
        if area == 0.0:
            return 0.0
        return area * phase_integrand(_normalize(a + b + c), self.J)

    def integrate(self, a: Vec3, b: Vec3, c: Vec3, coarse: float | None = None, depth: int = 0) -> float:
        if coarse is None:
            coarse = self.estimate(a, b, c)
        ab, bc, ca = _normalize(a + b), _normalize(b + c), _normalize(c + a)
        children = [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        estimates = [self.estimate(*tri) for tri in children]
        refined = sum(estimates)

        if abs(refined - coarse) < self.tol or depth >= self.max_depth:
            self.leaves += 4
            return refined
        return sum(self.integrate(*tri, coarse=est, depth=depth + 1) for tri, est in zip(children, estimates))


def surface_phase(loop: ReducedTrajectory, J: ArrayLike, *, tol: float = QUADRATURE_TOL, full_output: bool = False):
    """
    Integral of phase_integrand over the region bounded by a closed reduced loop.

    The region is fanned into geodesic triangles from the normalized centroid of
    the loop points; each triangle is subdivided at edge midpoints until the
    estimate changes by less than tol. Loops enclosing no area give 0 and are
    flagged degenerate in the full output.

    Returns the phase wrapped to (-pi, pi], or a PhaseEstimate when full_output is set.

    Raises:
        OpenLoop: if ||Gamma_0 - Gamma_N|| > 1e-8
    """
    J = np.asarray(J, dtype=float)
    if J.ndim == 1:
        J = np.diag(J)
    gap = loop.closure_gap
    if gap > CLOSURE_TOL:
        raise OpenLoop(gap, CLOSURE_TOL)

    vertices = loop.points[:-1]
    mean = vertices.mean(axis=0)
    apex = _normalize(mean) if np.linalg.norm(mean) > 1e-8 else vertices[0]
    edges = list(zip(vertices, np.roll(vertices, -1, axis=0)))

    area = sum(spherical_triangle_area(apex, p, q) for p, q in edges)
    if abs(area) < DEGENERATE_AREA:
        logger.warning(f"Degenerate reduced loop (enclosed area {area:.2e}); geometric phase set to 0")
        result = PhaseEstimate(theta=0.0, theta_unwrapped=0.0, area=area, degenerate=True, triangles=0)
        return result if full_output else 0.0

    quad = _TriangleQuadrature(J, tol=tol)
    theta = sum(quad.integrate(apex, p, q) for p, q in edges)
    logger.debug(f"Surface phase {theta:.6f} over area {area:.6f} sr ({quad.leaves} leaf triangles)")

    result = PhaseEstimate(
        theta=wrap_angle(theta), theta_unwrapped=theta, area=area, degenerate=False, triangles=quad.leaves
    )
    return result if full_output else result.theta


def yaw_between(R_start: RotationMatrix, R_end: RotationMatrix, tol: float = VERTICAL_TOL) -> float:
    """
    Angle of the rotation about e3 taking R_start to R_end.

    Raises:
        NotVerticalRelation: if R_end R_start^T has a horizontal rotation component above tol
    """
    v = log_so3(np.asarray(R_end) @ np.asarray(R_start).T)
    tilt = float(np.linalg.norm(v[:2]))
    if tilt > tol:
        raise NotVerticalRelation(tilt, tol)
    return float(v[2])


def phase_density_grid(J: ArrayLike, n_lat: int = 19, n_lon: int = 36) -> tuple[NDArray, NDArray, NDArray]:
    """
    Integrand sampled on a latitude/longitude grid (degrees). Latitudes span
    [-90, 90] inclusive; longitudes [0, 360) exclusive.
    Returns (lat, lon, values) with values of shape (n_lat, n_lon).
    """
    lat = np.linspace(-90.0, 90.0, n_lat)
    lon = np.linspace(0.0, 360.0, n_lon, endpoint=False)
    values = np.empty((n_lat, n_lon))
    for i, phi in enumerate(np.radians(lat)):
        for j, lam in enumerate(np.radians(lon)):
            Gamma = np.array([math.cos(phi) * math.cos(lam), math.cos(phi) * math.sin(lam), math.sin(phi)])
            values[i, j] = phase_integrand(Gamma, J)
    return lat, lon, values


def peak_phase_density(J: ArrayLike, n_lat: int = 37, n_lon: int = 72) -> tuple[Vec3, float]:
    """Grid point with the largest |integrand| and its value."""
    lat, lon, values = phase_density_grid(J, n_lat, n_lon)
    i, j = np.unravel_index(int(np.argmax(np.abs(values))), values.shape)
    phi, lam = math.radians(lat[i]), math.radians(lon[j])
    Gamma = np.array([math.cos(phi) * math.cos(lam), math.cos(phi) * math.sin(lam), math.sin(phi)])
    return Gamma, float(values[i, j])

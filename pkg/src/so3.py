"""3D Pendulum Optimal Control - Rotation group utilities

Hat/vee isomorphism between R^3 and so(3), closed-form exponential and
logarithm on SO(3), and the right Jacobian of the exponential map used by
the implicit step solver.
"""
import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidRotation, NonSkewInput

Vec3 = NDArray[np.float64]
Mat3 = NDArray[np.float64]
RotationMatrix = NDArray[np.float64]

E3 = np.array([0.0, 0.0, 1.0])

# Below this angle the Rodrigues coefficients are evaluated by Taylor series
SMALL_ANGLE = 1e-6


def hat(v: ArrayLike) -> Mat3:
    """Skew matrix S(v) with S(v) @ y == cross(v, y)."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def vee(m: ArrayLike, tol: float = 1e-10) -> Vec3:
    """Inverse of hat(); rejects matrices that are not skew-symmetric."""
    m = np.asarray(m, dtype=float)
    asymmetry = float(np.linalg.norm(m + m.T))
    if asymmetry > tol:
        raise NonSkewInput(asymmetry, tol)
    # average the mirrored entries so tiny asymmetries do not bias the result
    return 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def _rodrigues_coefficients(theta: float) -> tuple[float, float]:
    """(sin t / t, (1 - cos t) / t^2) with a series near zero."""
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        return 1.0 - t2 / 6.0, 0.5 - t2 / 24.0
    return np.sin(theta) / theta, (1.0 - np.cos(theta)) / (theta * theta)


def exp_so3(v: ArrayLike) -> RotationMatrix:
    """Exponential map so(3) -> SO(3) by the Rodrigues formula."""
    v = np.asarray(v, dtype=float)
    theta = float(np.linalg.norm(v))
    a, b = _rodrigues_coefficients(theta)
    k = hat(v)
    return np.eye(3) + a * k + b * (k @ k)


def log_so3(R: ArrayLike) -> Vec3:
    """
    Principal logarithm SO(3) -> R^3 with norm in [0, pi].

    At a rotation angle of exactly pi both +n and -n are valid axes; the one
    whose first nonzero component is positive is returned.
    """
    R = np.asarray(R, dtype=float)
    s = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])  # sin(t) n
    sin_t = float(np.linalg.norm(s))
    cos_t = 0.5 * (np.trace(R) - 1.0)
    theta = float(np.arctan2(sin_t, cos_t))

    if theta < SMALL_ANGLE:
        return (1.0 + theta * theta / 6.0) * s

    if sin_t > 1e-3 or cos_t > 0.0:
        return (theta / sin_t) * s

    # Near pi: recover the axis from the symmetric part, n n^T = (R_sym - cos t I) / (1 - cos t)
    nnT = (0.5 * (R + R.T) - cos_t * np.eye(3)) / (1.0 - cos_t)
    col = int(np.argmax(np.diag(nnT)))
    n = nnT[:, col] / np.sqrt(nnT[col, col])
    n /= np.linalg.norm(n)

    alignment = float(s @ n)
    if abs(alignment) > 1e-15:
        if alignment < 0.0:
            n = -n
    else:
        nonzero = np.flatnonzero(np.abs(n) > 1e-12)
        if nonzero.size and n[nonzero[0]] < 0.0:
            n = -n
    return theta * n


def right_jacobian(v: ArrayLike) -> Mat3:
    """
    Right Jacobian of exp_so3: d/de exp(v + e) = exp(v) hat(Jr(v) e) to first order.
    """
    v = np.asarray(v, dtype=float)
    theta = float(np.linalg.norm(v))
    k = hat(v)
    if theta < SMALL_ANGLE:
        return np.eye(3) - 0.5 * k + (k @ k) / 6.0
    t2 = theta * theta
    return np.eye(3) - ((1.0 - np.cos(theta)) / t2) * k + ((theta - np.sin(theta)) / (t2 * theta)) * (k @ k)


def orthogonality_error(R: ArrayLike) -> float:
    """||R^T R - I||_F"""
    R = np.asarray(R, dtype=float)
    return float(np.linalg.norm(R.T @ R - np.eye(3)))


def validate_rotation(R: ArrayLike, tol: float = 1e-12) -> RotationMatrix:
    """Return R as a float array, or raise InvalidRotation. No re-orthonormalization."""
    R = np.array(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        raise InvalidRotation(float("inf"), float("nan"), tol)
    ortho = orthogonality_error(R)
    det = float(np.linalg.det(R))
    if ortho > tol or abs(det - 1.0) > tol:
        raise InvalidRotation(ortho, det, tol)
    return R


def yaw(theta: float) -> RotationMatrix:
    """Rotation by theta about the gravity direction e3."""
    return exp_so3(theta * E3)

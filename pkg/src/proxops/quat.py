"""Unit-quaternion utilities for attitude representation.

Convention: scalar-first, ``q = [qw, qx, qy, qz]``, representing the
rotation that maps body-frame vectors into the world frame:

    v_world = R(q) @ v_body

Composition follows Hamilton's product, so ``mul(q1, q2)`` applies q2
first, then q1. All functions take and return plain numpy arrays; none
of them mutate their inputs.
"""

import numpy as np

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def normalize(q):
    """Rescale to unit norm. Raises on a near-zero quaternion."""
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise ValueError("cannot normalize a near-zero quaternion")
    return q / n


def mul(q1, q2):
    """Hamilton product q1 * q2."""
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def conj(q):
    """Conjugate (inverse for unit quaternions)."""
    return np.array([q[0], -q[1], -q[2], -q[3]])


def to_matrix(q):
    """Rotation matrix R such that R @ v_body = v_world."""
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def from_matrix(R):
    """Quaternion from an orthonormal rotation matrix (Shepperd's method).

    Picks the numerically largest of the four candidate denominators, so
    the conversion is stable for all attitudes.
    """
    R = np.asarray(R, dtype=float)
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0.0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array([
            0.25 * s,
            (R[2, 1] - R[1, 2]) / s,
            (R[0, 2] - R[2, 0]) / s,
            (R[1, 0] - R[0, 1]) / s,
        ])
    elif R[0, 0] >= R[1, 1] and R[0, 0] >= R[2, 2]:
        s = np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
        q = np.array([
            (R[2, 1] - R[1, 2]) / s,
            0.25 * s,
            (R[0, 1] + R[1, 0]) / s,
            (R[0, 2] + R[2, 0]) / s,
        ])
    elif R[1, 1] >= R[2, 2]:
        s = np.sqrt(1.0 - R[0, 0] + R[1, 1] - R[2, 2]) * 2.0
        q = np.array([
            (R[0, 2] - R[2, 0]) / s,
            (R[0, 1] + R[1, 0]) / s,
            0.25 * s,
            (R[1, 2] + R[2, 1]) / s,
        ])
    else:
        s = np.sqrt(1.0 - R[0, 0] - R[1, 1] + R[2, 2]) * 2.0
        q = np.array([
            (R[1, 0] - R[0, 1]) / s,
            (R[0, 2] + R[2, 0]) / s,
            (R[1, 2] + R[2, 1]) / s,
            0.25 * s,
        ])
    if q[0] < 0.0:
        q = -q
    return normalize(q)


def from_axis_angle(axis, angle):
    """Quaternion for a rotation of ``angle`` radians about ``axis``."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n < 1e-12:
        return IDENTITY.copy()
    half = 0.5 * angle
    return np.concatenate([[np.cos(half)], np.sin(half) / n * axis])


def from_rotation_vector(phi):
    """Exponential map: quaternion for the rotation vector ``phi``.

    Uses the sinc form so the small-angle limit is exact without a
    branch discontinuity.
    """
    phi = np.asarray(phi, dtype=float)
    angle = np.linalg.norm(phi)
    half = 0.5 * angle
    # np.sinc(x) = sin(pi x)/(pi x); sin(half)/angle = 0.5*sinc(half/pi)
    return np.concatenate([[np.cos(half)], 0.5 * np.sinc(half / np.pi) * phi])


def rotate(q, v):
    """Rotate a 3-vector by the quaternion (body -> world)."""
    return to_matrix(q) @ np.asarray(v, dtype=float)


def geodesic_angle(R):
    """Rotation angle of a rotation matrix, in [0, pi]."""
    c = 0.5 * (np.trace(R) - 1.0)
    return float(np.arccos(np.clip(c, -1.0, 1.0)))

"""Rotation-group utilities: hat/vee, elementary rotations, exponential map.

Rotations are plain 3x3 numpy arrays. Elementary rotations are active and
right-handed, so ``rot_z(g) @ e1 == [cos g, sin g, 0]`` and
``rot_y(d) @ e1 == [cos d, 0, -sin d]``.
"""

from __future__ import annotations

import math

import numpy as np

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])

SKEW_TOL = 1e-9
SMALL_ANGLE = 1e-8


def hat(v) -> np.ndarray:
    """Skew-symmetric matrix such that ``hat(v) @ w == cross(v, w)``."""
    x, y, z = float(v[0]), float(v[1]), float(v[2])
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(S) -> np.ndarray:
    """Inverse of :func:`hat`.

    The input is symmetrized as ``(S - S.T) / 2`` before extraction; matrices
    that are not skew-symmetric to within ``SKEW_TOL`` are rejected.
    """
    S = np.asarray(S, dtype=float)
    if S.shape != (3, 3):
        raise ValueError(f"vee expects a 3x3 matrix, got shape {S.shape}")
    if np.linalg.norm(S + S.T) > SKEW_TOL:
        raise ValueError("vee: matrix is not skew-symmetric")
    A = 0.5 * (S - S.T)
    return np.array([A[2, 1], A[0, 2], A[1, 0]])


def skew_part(A) -> np.ndarray:
    """Antisymmetric part ``(A - A.T) / 2``."""
    A = np.asarray(A, dtype=float)
    return 0.5 * (A - A.T)


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def exp_so3(w) -> np.ndarray:
    """Rodrigues formula for ``expm(hat(w))``.

    Below ``SMALL_ANGLE`` the coefficients switch to their second-order series.
    """
    x, y, z = float(w[0]), float(w[1]), float(w[2])
    th2 = x * x + y * y + z * z
    th = math.sqrt(th2)
    if th < SMALL_ANGLE:
        a = 1.0 - th2 / 6.0
        b = 0.5 - th2 / 24.0
    else:
        a = math.sin(th) / th
        b = (1.0 - math.cos(th)) / th2
    # I + a*W + b*W^2, written out
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    return np.array(
        [
            [1.0 - b * (yy + zz), b * xy - a * z, b * xz + a * y],
            [b * xy + a * z, 1.0 - b * (xx + zz), b * yz - a * x],
            [b * xz - a * y, b * yz + a * x, 1.0 - b * (xx + yy)],
        ]
    )


def det3(M) -> float:
    (a, b, c), (d, e, f), (g, h, i) = M.tolist()
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def project_to_so3(M) -> np.ndarray:
    """Nearest rotation to ``M`` in the Frobenius norm (SVD polar factor)."""
    M = np.asarray(M, dtype=float)
    if not det3(M) > 0.0:
        raise ValueError("project_to_so3 requires det(M) > 0")
    U, _, Vt = np.linalg.svd(M)
    R = U @ Vt
    if det3(R) < 0.0:
        U[:, 2] = -U[:, 2]
        R = U @ Vt
    return R


def is_rotation(R, tol: float = 1e-9) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    return (
        np.linalg.norm(R @ R.T - np.eye(3)) <= tol
        and abs(np.linalg.det(R) - 1.0) <= tol
    )

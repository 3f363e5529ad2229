"""Rigid transforms and rotation parameterizations.

All rotations are 3x3 orthonormal matrices with unit determinant; all
translations are 3-vectors in meters. Quaternions use the scipy layout
(x, y, z, w) and Euler angles use the intrinsic XYZ convention throughout
the package.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.spatial.transform import Rotation

ORTHONORMALITY_TOL = 1e-9


class RigidTransform:
    """A rotation plus translation, composable and applicable to points."""

    __slots__ = ("rotation", "translation")

    def __init__(self, rotation=None, translation=None):
        self.rotation = (
            np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
        )
        self.translation = (
            np.zeros(3) if translation is None else np.asarray(translation, dtype=float)
        )
        if self.rotation.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {self.rotation.shape}")
        if self.translation.shape != (3,):
            raise ValueError(f"translation must be a 3-vector, got {self.translation.shape}")

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls()

    @classmethod
    def from_matrix(cls, m) -> "RigidTransform":
        m = np.asarray(m, dtype=float)
        if m.shape == (16,):
            m = m.reshape(4, 4)
        if m.shape != (4, 4):
            raise ValueError(f"expected 4x4 homogeneous matrix, got {m.shape}")
        return cls(m[:3, :3], m[:3, 3])

    @classmethod
    def from_rpy(cls, xyz, rpy) -> "RigidTransform":
        """URDF-style origin: fixed-axis roll, pitch, yaw (R = Rz Ry Rx)."""
        r, p, y = rpy
        return cls(rotation_z(y) @ rotation_y(p) @ rotation_x(r), xyz)

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return self.compose(other)

    def apply(self, points) -> np.ndarray:
        """Transform a (3,) point or an (N, 3) array of points."""
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            return self.rotation @ points + self.translation
        return points @ self.rotation.T + self.translation

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)

    def is_valid(self, tol: float = ORTHONORMALITY_TOL) -> bool:
        r = self.rotation
        return (
            np.all(np.isfinite(r))
            and np.all(np.isfinite(self.translation))
            and np.abs(r.T @ r - np.eye(3)).max() <= tol
            and abs(np.linalg.det(r) - 1.0) <= tol
        )

    def __repr__(self):
        return f"RigidTransform(t={self.translation.round(4).tolist()})"


def rotation_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_about_axis(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis."""
    axis = np.asarray(axis, dtype=float)
    k = _skew(axis)
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def _skew(v) -> np.ndarray:
    return np.array(
        [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]]
    )


def quaternion_from_rotation(r: np.ndarray) -> np.ndarray:
    """Unit quaternion (x, y, z, w) for a rotation matrix."""
    return Rotation.from_matrix(r).as_quat()


def euler_xyz_from_rotation(r: np.ndarray) -> np.ndarray:
    """Intrinsic XYZ Euler angles; gimbal-adjacent inputs return values, never raise."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return Rotation.from_matrix(r).as_euler("XYZ")


def rotation_from_euler_xyz(e) -> np.ndarray:
    return Rotation.from_euler("XYZ", e).as_matrix()


def quaternion_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of (x, y, z, w) quaternions."""
    av, aw = a[:3], a[3]
    bv, bw = b[:3], b[3]
    v = aw * bv + bw * av + np.cross(av, bv)
    w = aw * bw - av @ bv
    return np.array([v[0], v[1], v[2], w])


def geodesic_angle(r_a: np.ndarray, r_b: np.ndarray) -> float:
    """Angle of the relative rotation between two rotation matrices, in [0, pi]."""
    rel = r_a @ r_b.T
    c = (np.trace(rel) - 1.0) / 2.0
    return float(np.arccos(np.clip(c, -1.0, 1.0)))

import numpy as np
from scipy.spatial.transform import Rotation

from graspmotion.transforms import (
    RigidTransform,
    euler_xyz_from_rotation,
    geodesic_angle,
    quaternion_from_rotation,
    quaternion_multiply,
    rotation_about_axis,
    rotation_from_euler_xyz,
    rotation_z,
)


def random_transform(rng):
    return RigidTransform(
        Rotation.random(random_state=rng.integers(1 << 31)).as_matrix(),
        rng.uniform(-1, 1, size=3),
    )


def test_compose_inverse_roundtrip():
    rng = np.random.default_rng(0)
    for _ in range(20):
        t = random_transform(rng)
        ident = t @ t.inverse()
        np.testing.assert_allclose(ident.rotation, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(ident.translation, 0.0, atol=1e-12)


def test_apply_matches_matrix_product():
    rng = np.random.default_rng(1)
    t = random_transform(rng)
    pts = rng.uniform(-1, 1, size=(5, 3))
    expected = (t.as_matrix() @ np.column_stack([pts, np.ones(5)]).T).T[:, :3]
    np.testing.assert_allclose(t.apply(pts), expected, atol=1e-12)


def test_from_rpy_matches_scipy_extrinsic_xyz():
    rpy = [0.3, -0.7, 1.9]
    got = RigidTransform.from_rpy([0, 0, 0], rpy).rotation
    expected = Rotation.from_euler("xyz", rpy).as_matrix()
    np.testing.assert_allclose(got, expected, atol=1e-12)


def test_rotation_about_axis_matches_scipy():
    axis = np.array([1.0, 2.0, -0.5])
    axis /= np.linalg.norm(axis)
    got = rotation_about_axis(axis, 0.8)
    expected = Rotation.from_rotvec(0.8 * axis).as_matrix()
    np.testing.assert_allclose(got, expected, atol=1e-12)


def test_quaternion_multiply_matches_scipy():
    rng = np.random.default_rng(2)
    for _ in range(10):
        ra = Rotation.random(random_state=rng.integers(1 << 31))
        rb = Rotation.random(random_state=rng.integers(1 << 31))
        got = quaternion_multiply(ra.as_quat(), rb.as_quat())
        expected = (ra * rb).as_quat()
        # quaternions double-cover rotations
        assert np.allclose(got, expected, atol=1e-12) or np.allclose(
            got, -expected, atol=1e-12
        )


def test_geodesic_angle_known_values():
    assert geodesic_angle(np.eye(3), np.eye(3)) == 0.0
    assert np.isclose(geodesic_angle(rotation_z(np.pi / 3), np.eye(3)), np.pi / 3)
    assert np.isclose(geodesic_angle(rotation_z(np.pi), np.eye(3)), np.pi)


def test_euler_xyz_roundtrip():
    e = np.array([0.2, -0.4, 1.1])
    np.testing.assert_allclose(
        euler_xyz_from_rotation(rotation_from_euler_xyz(e)), e, atol=1e-12
    )


def test_validity_check():
    assert RigidTransform.identity().is_valid()
    bad = RigidTransform(np.eye(3) * 1.001)
    assert not bad.is_valid()


def test_quaternion_from_rotation_is_unit():
    rng = np.random.default_rng(3)
    for _ in range(10):
        q = quaternion_from_rotation(
            Rotation.random(random_state=rng.integers(1 << 31)).as_matrix()
        )
        assert np.isclose(np.linalg.norm(q), 1.0, atol=1e-12)

import numpy as np
import pytest

from graspmotion.errors import UrdfError
from graspmotion.kinematics import (
    fk_full,
    forward_kinematics,
    infer_base_and_tool,
    parse_urdf,
    point_jacobian,
)

from helpers import (
    PLANAR_2R_URDF,
    numeric_point_jacobian,
    oracle_fk,
    random_serial_chain,
)


class TestParsing:
    def test_minimal_two_joint_chain(self, planar2r):
        assert planar2r.dof == 2
        assert planar2r.base_link == "base"
        assert "tool" in planar2r.links

    def test_fixed_joint_excluded_from_dof(self, planar2r):
        kinds = [j.kind for j in planar2r.joints]
        assert "fixed" in kinds
        assert planar2r.dof == sum(1 for k in kinds if k != "fixed")

    def test_missing_tool_link_rejected(self):
        with pytest.raises(UrdfError, match="tool"):
            parse_urdf(PLANAR_2R_URDF, "base", "nonexistent")

    def test_disconnected_tool_link_rejected(self):
        urdf = PLANAR_2R_URDF.replace("</robot>", '<link name="floating"/></robot>')
        with pytest.raises(UrdfError, match="not connected"):
            parse_urdf(urdf, "base", "floating")

    def test_malformed_xml_rejected(self):
        with pytest.raises(UrdfError, match="malformed"):
            parse_urdf("<robot><link name='a'>", "a", "a")

    def test_unsupported_joint_kind_rejected(self):
        urdf = PLANAR_2R_URDF.replace('type="fixed"', 'type="floating"')
        with pytest.raises(UrdfError, match="unsupported joint kind"):
            parse_urdf(urdf, "base", "tool")

    def test_continuous_joint_gets_finite_limits(self):
        urdf = PLANAR_2R_URDF.replace(
            '<joint name="j2" type="revolute">', '<joint name="j2" type="continuous">'
        )
        chain = parse_urdf(urdf, "base", "tool")
        k = chain.joint_names.index("j2")
        assert chain.lower[k] == -2 * np.pi
        assert chain.upper[k] == 2 * np.pi

    def test_infer_base_and_tool(self):
        base, tool = infer_base_and_tool(PLANAR_2R_URDF)
        assert (base, tool) == ("base", "tool")


class TestForwardKinematics:
    def test_zero_config_reaches_full_extension(self, planar2r):
        poses = forward_kinematics(planar2r, np.zeros(2))
        np.testing.assert_allclose(poses["tool"].translation, [2.0, 0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(poses["tool"].rotation, np.eye(3), atol=1e-12)

    def test_quarter_turn(self, planar2r):
        poses = forward_kinematics(planar2r, np.array([np.pi / 2, 0.0]))
        np.testing.assert_allclose(poses["tool"].translation, [0.0, 2.0, 0.0], atol=1e-12)
        expected = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        np.testing.assert_allclose(poses["tool"].rotation, expected, atol=1e-12)

    def test_matches_independent_composition_on_random_chains(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            urdf, joints, tool = random_serial_chain(rng)
            chain = parse_urdf(urdf, "link0", tool)
            q = rng.uniform(-2.0, 2.0, size=chain.dof)
            got = forward_kinematics(chain, q)[tool]
            expected = oracle_fk(joints, q)
            np.testing.assert_allclose(got.as_matrix(), expected, atol=1e-10)

    def test_zero_config_equals_origin_composition(self):
        rng = np.random.default_rng(3)
        urdf, joints, tool = random_serial_chain(rng)
        chain = parse_urdf(urdf, "link0", tool)
        got = forward_kinematics(chain, np.zeros(chain.dof))[tool]
        np.testing.assert_allclose(
            got.as_matrix(), oracle_fk(joints, np.zeros(chain.dof)), atol=1e-12
        )

    def test_rotations_stay_orthonormal(self):
        rng = np.random.default_rng(7)
        urdf, _, tool = random_serial_chain(rng)
        chain = parse_urdf(urdf, "link0", tool)
        for _ in range(20):
            q = rng.uniform(-2.5, 2.5, size=chain.dof)
            for pose in forward_kinematics(chain, q).values():
                assert pose.is_valid(tol=1e-9)

    def test_deterministic(self, planar2r):
        q = np.array([0.3, -1.1])
        a = forward_kinematics(planar2r, q)
        b = forward_kinematics(planar2r, q)
        for link in a:
            assert np.array_equal(a[link].rotation, b[link].rotation)
            assert np.array_equal(a[link].translation, b[link].translation)

    def test_dimension_mismatch_rejected(self, planar2r):
        with pytest.raises(ValueError, match="length"):
            forward_kinematics(planar2r, np.zeros(3))


class TestPointJacobian:
    def test_point_on_revolute_axis_has_zero_column(self, planar2r):
        # the origin of link1 sits on joint j1's axis
        jac = point_jacobian(planar2r, np.array([0.4, 0.2]), "link1", [0.0, 0.0, 0.0])
        np.testing.assert_allclose(jac[:, 0], 0.0, atol=1e-12)

    def test_prismatic_column_equals_world_axis(self):
        urdf = PLANAR_2R_URDF.replace(
            '<joint name="j2" type="revolute">', '<joint name="j2" type="prismatic">'
        )
        chain = parse_urdf(urdf, "base", "tool")
        q = np.array([np.pi / 2, 0.3])
        jac = point_jacobian(chain, q, "tool", [0.0, 0.0, 0.0])
        fk = fk_full(chain, q)
        k = chain.joint_names.index("j2")
        np.testing.assert_allclose(jac[:, k], fk.joint_axes[k], atol=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(20):
            urdf, _, tool = random_serial_chain(rng)
            chain = parse_urdf(urdf, "link0", tool)
            q = rng.uniform(-2.0, 2.0, size=chain.dof)
            p_local = rng.uniform(-0.3, 0.3, size=3)
            jac = point_jacobian(chain, q, tool, p_local)
            fd = numeric_point_jacobian(chain, q, tool, p_local)
            worst = max(worst, np.abs(jac - fd).max())
        assert worst < 1e-5

    def test_unknown_link_rejected(self, planar2r):
        with pytest.raises(UrdfError, match="unknown link"):
            point_jacobian(planar2r, np.zeros(2), "nope", [0, 0, 0])

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from graspmotion.costs import (
    GoalSet,
    config_collision_cost,
    config_collision_cost_gradient,
    euler_cost_gradient,
    goal_cost,
    goal_cost_euler,
    goal_cost_gradient,
    goal_cost_quaternion,
    goal_objective,
    load_goal_set,
    quaternion_cost_gradient,
    save_goal_set,
    standoff_pose,
    velocity_cost,
)
from graspmotion.errors import FileFormatError
from graspmotion.kinematics import fk_full, forward_kinematics, parse_urdf
from graspmotion.robot_model import GripperPointSet, sample_surface_points
from graspmotion.scene import PointCloud, build_sdf, collision_penalty
from graspmotion.transforms import RigidTransform, rotation_z

from helpers import PLANAR_2R_URDF, random_serial_chain


def tetrahedron_gripper(scale=0.1):
    return GripperPointSet(
        scale
        * np.array(
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        )
    )


def hundred_point_gripper(seed=0):
    rng = np.random.default_rng(seed)
    return GripperPointSet(rng.uniform(-0.08, 0.08, size=(100, 3)))


class TestGoalCost:
    def test_zero_at_identical_poses(self):
        pose = RigidTransform(rotation_z(0.4), [0.1, 0.2, 0.3])
        assert goal_cost(pose, pose, tetrahedron_gripper()) == 0.0

    def test_pure_translation_closed_form(self):
        pts = hundred_point_gripper()
        pose = RigidTransform(translation=[0.1, 0.0, 0.0])
        assert abs(goal_cost(pose, RigidTransform.identity(), pts) - 1.0) < 1e-12

    def test_half_turn_analytic(self):
        # two informative points plus the origin, which contributes nothing
        pts = GripperPointSet(np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 0]]))
        pose = RigidTransform(rotation_z(np.pi))
        assert abs(goal_cost(pose, RigidTransform.identity(), pts) - 8.0) < 1e-9

    def test_left_multiplication_invariance(self):
        rng = np.random.default_rng(0)
        pts = tetrahedron_gripper()
        for _ in range(10):
            pose = RigidTransform(
                Rotation.random(random_state=rng.integers(1 << 31)).as_matrix(),
                rng.uniform(-1, 1, 3),
            )
            goal = RigidTransform(
                Rotation.random(random_state=rng.integers(1 << 31)).as_matrix(),
                rng.uniform(-1, 1, 3),
            )
            left = RigidTransform(
                Rotation.random(random_state=rng.integers(1 << 31)).as_matrix(),
                rng.uniform(-1, 1, 3),
            )
            drift = abs(
                goal_cost(left @ pose, left @ goal, pts) - goal_cost(pose, goal, pts)
            )
            assert drift < 1e-9

    def test_zero_iff_same_action(self):
        pts = tetrahedron_gripper()
        pose = RigidTransform(rotation_z(1e-3))
        assert goal_cost(pose, RigidTransform.identity(), pts) > 0


class TestQuaternionCost:
    def test_identical(self):
        pose = RigidTransform(rotation_z(0.3), [1, 2, 3])
        assert goal_cost_quaternion(pose, pose) == 0.0

    def test_double_cover(self):
        # q and -q represent the same rotation; squared dot ignores the sign
        r = rotation_z(0.9)
        pose = RigidTransform(r, [0.5, 0, 0])
        goal = RigidTransform(r, [0.5, 0, 0])
        assert abs(goal_cost_quaternion(pose, goal)) < 1e-12

    def test_half_turn_costs_one(self):
        pose = RigidTransform(rotation_z(np.pi))
        assert abs(goal_cost_quaternion(pose, RigidTransform.identity()) - 1.0) < 1e-12

    def test_sign_flip_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            ra = Rotation.random(random_state=rng.integers(1 << 31))
            # compose with a full turn: same rotation, opposite quaternion sign
            rb = Rotation.from_rotvec([0, 0, 2 * np.pi]) * ra
            pose_a = RigidTransform(ra.as_matrix())
            pose_b = RigidTransform(rb.as_matrix())
            goal = RigidTransform(
                Rotation.random(random_state=rng.integers(1 << 31)).as_matrix()
            )
            assert abs(
                goal_cost_quaternion(pose_a, goal) - goal_cost_quaternion(pose_b, goal)
            ) < 1e-9


class TestEulerCost:
    def test_identical(self):
        pose = RigidTransform(rotation_z(0.3), [1, 2, 3])
        assert goal_cost_euler(pose, pose) == 0.0

    def test_pi_seam_discontinuity(self):
        pose = RigidTransform(rotation_z(np.pi))
        goal = RigidTransform(rotation_z(-np.pi))
        cost = goal_cost_euler(pose, goal)
        assert abs(cost - (2 * np.pi) ** 2) < 1e-6

    def test_translation_only(self):
        pose = RigidTransform(translation=[0.1, 0.0, 0.0])
        assert abs(goal_cost_euler(pose, RigidTransform.identity()) - 0.01) < 1e-12

    def test_gimbal_adjacent_returns_finite(self):
        pose = RigidTransform(
            Rotation.from_euler("XYZ", [0.3, np.pi / 2 - 1e-9, 0.2]).as_matrix()
        )
        value = goal_cost_euler(pose, RigidTransform.identity())
        assert np.isfinite(value)


def random_goal(rng):
    return RigidTransform(
        Rotation.random(random_state=rng.integers(1 << 31)).as_matrix(),
        rng.uniform(-0.5, 0.5, size=3),
    )


def objective_fd(objective, q, step=1e-6):
    q = np.asarray(q, dtype=float)
    fd = np.zeros_like(q)
    for k in range(len(q)):
        dq = np.zeros_like(q)
        dq[k] = step
        fd[k] = (objective(q + dq)[0] - objective(q - dq)[0]) / (2 * step)
    return fd


class TestGoalCostGradient:
    def test_zero_at_exact_goal(self, planar2r):
        pts = tetrahedron_gripper()
        q = np.array([0.5, -0.3])
        goal = fk_full(planar2r, q).tool_pose()
        grad = goal_cost_gradient(planar2r, q, goal, pts)
        np.testing.assert_allclose(grad, 0.0, atol=1e-9)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        pts = tetrahedron_gripper()
        worst = 0.0
        for _ in range(10):
            urdf, _, tool = random_serial_chain(rng)
            chain = parse_urdf(urdf, "link0", tool)
            objective = goal_objective(chain, pts, random_goal(rng), "point_matching")
            q = rng.uniform(-2, 2, size=chain.dof)
            _, grad = objective(q)
            fd = objective_fd(objective, q)
            denom = max(np.abs(fd).max(), 1e-8)
            worst = max(worst, np.abs(grad - fd).max() / denom)
        assert worst < 1e-4

    def test_pure_translation_identity(self, planar2r):
        from graspmotion.kinematics import point_jacobian

        pts = tetrahedron_gripper()
        q = np.array([0.4, 0.8])
        tool_pose = fk_full(planar2r, q).tool_pose()
        delta = np.array([0.05, -0.02, 0.03])
        goal = RigidTransform(tool_pose.rotation, tool_pose.translation - delta)
        grad = goal_cost_gradient(planar2r, q, goal, pts)
        expected = np.zeros(planar2r.dof)
        for p_local in pts.points:
            jac = point_jacobian(planar2r, q, "tool", p_local)
            expected += 2.0 * jac.T @ delta
        np.testing.assert_allclose(grad, expected, atol=1e-9)


class TestAblationGradients:
    @pytest.mark.parametrize("kind,grad_fn", [
        ("quaternion", quaternion_cost_gradient),
        ("euler", euler_cost_gradient),
    ])
    def test_matches_finite_differences(self, kind, grad_fn):
        rng = np.random.default_rng(3)
        pts = tetrahedron_gripper()
        worst = 0.0
        for _ in range(10):
            urdf, _, tool = random_serial_chain(rng)
            chain = parse_urdf(urdf, "link0", tool)
            goal = random_goal(rng)
            objective = goal_objective(chain, pts, goal, kind)
            q = rng.uniform(-1.5, 1.5, size=chain.dof)
            value, grad = objective(q)
            if not np.isfinite(value):
                continue
            fd = objective_fd(objective, q)
            denom = max(np.abs(fd).max(), 1e-6)
            worst = max(worst, np.abs(grad - fd).max() / denom)
        assert worst < 1e-3


class TestCollisionCost:
    @pytest.fixture
    def scene_chain(self, tmp_path):
        from helpers import cube_vertices, write_obj

        urdf = PLANAR_2R_URDF.replace(
            '<link name="tool"/>',
            '<link name="tool"><visual><geometry><mesh filename="tool.obj"/></geometry></visual></link>',
        )
        write_obj(tmp_path / "tool.obj", cube_vertices(half=0.05))
        chain = parse_urdf(urdf, "base", "tool")
        chain.mesh_root = tmp_path
        pts = sample_surface_points(chain, points_per_link=100, seed=0)
        return chain, pts

    def test_zero_far_from_obstacles(self, scene_chain):
        chain, pts = scene_chain
        cloud = PointCloud(np.array([[50.0, 50.0, 50.0]]))
        grid = build_sdf(cloud, resolution=0.05, margin=0.3)
        assert config_collision_cost(grid, chain, pts, np.zeros(2), 0.02) == 0.0

    def test_matches_brute_force_oracle(self, scene_chain):
        chain, pts = scene_chain
        rng = np.random.default_rng(4)
        cloud = PointCloud(rng.uniform([1.5, -0.4, -0.4], [2.3, 0.4, 0.4], (300, 3)))
        grid = build_sdf(cloud, resolution=0.05, margin=0.3)
        lattice = np.rint(grid.origin / grid.resolution)
        for _ in range(5):
            q = rng.uniform(-0.5, 0.5, size=2)
            got = config_collision_cost(grid, chain, pts, q, 0.02)
            # independent evaluation: manual cell lookup + brute-force distance
            from graspmotion.robot_model import transform_points

            world = transform_points(chain, q, pts)
            total = 0.0
            for p in world:
                idx = np.floor((p - grid.origin) / grid.resolution + 1e-9).astype(int)
                if np.any(idx < 0) or np.any(idx >= np.array(grid.dims)):
                    continue
                vertex = (lattice + idx) * grid.resolution
                d = np.min(np.linalg.norm(cloud.points - vertex, axis=1))
                total += collision_penalty(d, 0.02)
            assert abs(got - total) < 1e-12

    def test_gradient_matches_frozen_linearization(self, scene_chain):
        chain, pts = scene_chain
        rng = np.random.default_rng(5)
        cloud = PointCloud(rng.uniform([0.8, -0.6, -0.3], [2.2, 0.6, 0.3], (400, 3)))
        grid = build_sdf(cloud, resolution=0.05, margin=0.3)
        eps = 0.05  # wide margin so several points are active
        from graspmotion.robot_model import transform_points

        worst = 0.0
        checked = 0
        for _ in range(20):
            q0 = rng.uniform(-0.6, 0.6, size=2)
            grad = config_collision_cost_gradient(grid, chain, pts, q0, eps)
            world0 = transform_points(chain, q0, pts)
            d0 = grid.query(world0)
            g0 = grid.gradient(world0)
            if not np.any(d0 < eps):
                continue
            checked += 1

            def frozen(q):
                world = transform_points(chain, q, pts)
                d_lin = d0 + np.einsum("ij,ij->i", g0, world - world0)
                return float(collision_penalty(d_lin, eps).sum()), None

            fd = np.zeros(2)
            for k in range(2):
                dq = np.zeros(2)
                dq[k] = 1e-6
                fd[k] = (frozen(q0 + dq)[0] - frozen(q0 - dq)[0]) / 2e-6
            denom = max(np.abs(fd).max(), 1e-8)
            worst = max(worst, np.abs(grad - fd).max() / denom)
        assert checked > 0
        assert worst < 1e-4

    def test_single_point_at_zero_distance(self, scene_chain):
        chain, pts = scene_chain
        # grid where exactly the cell holding one surface point has d = 0
        from graspmotion.robot_model import transform_points
        from graspmotion.scene import SignedDistanceGrid

        world = transform_points(chain, np.zeros(2), pts)
        target = world[0]
        origin = np.floor(target) - 1.0
        values = np.full((4, 4, 4), 10.0)
        grid = SignedDistanceGrid(origin=origin, resolution=1.0, values=values)
        idx = np.floor(target - origin).astype(int)
        # make sure only one surface point falls into that unit cell
        cells = np.floor(world - origin).astype(int)
        in_cell = np.all(cells == idx, axis=1)
        assert in_cell.sum() >= 1
        grid.values[tuple(idx)] = 0.0
        expected = in_cell.sum() * collision_penalty(0.0, 0.02)
        got = config_collision_cost(grid, chain, pts, np.zeros(2), 0.02)
        assert abs(got - expected) < 1e-12


class TestVelocityCost:
    def test_zeros(self):
        assert velocity_cost(np.zeros((50, 7))) == 0.0

    def test_single_unit_step(self):
        v = np.zeros((3, 4))
        v[1, 0] = 1.0
        assert velocity_cost(v) == 1.0

    def test_uniform_interpolation_closed_form(self):
        t_steps, dt = 50, 0.2
        delta = np.array([0.5, -1.0, 0.25])
        v = np.tile(delta / (t_steps * dt), (t_steps, 1))
        expected = t_steps * float(np.sum((delta / (t_steps * dt)) ** 2))
        assert abs(velocity_cost(v) - expected) < 1e-12


class TestStandoff:
    def test_translation_backs_off_along_approach(self):
        goal = RigidTransform(rotation_z(0.7), [0.5, 0.2, 0.3])
        so = standoff_pose(goal, 0.1)
        expected = goal.translation - 0.1 * goal.rotation[:, 2]
        np.testing.assert_allclose(so.translation, expected, atol=1e-12)
        np.testing.assert_array_equal(so.rotation, goal.rotation)


class TestGoalSetIO:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(6)
        goals = GoalSet([random_goal(rng) for _ in range(5)])
        save_goal_set(goals, tmp_path / "goals.json")
        loaded = load_goal_set(tmp_path / "goals.json")
        assert len(loaded) == 5
        for a, b in zip(goals.poses, loaded.poses):
            np.testing.assert_allclose(a.as_matrix(), b.as_matrix(), atol=1e-15)

    def test_malformed_rejected(self, tmp_path):
        (tmp_path / "bad.json").write_text('{"pose": []}')
        with pytest.raises(FileFormatError):
            load_goal_set(tmp_path / "bad.json")

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(FileFormatError):
            load_goal_set(tmp_path / "missing.json")

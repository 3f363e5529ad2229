"""Scalar cost terms for goal reaching, collision avoidance, and smoothness.

The primary goal cost matches a fixed set of gripper points under the current
and target tool poses, which removes the usual rotation/translation weighting
knob. Two baseline goal costs (quaternion and Euler-angle) are kept for
comparison runs. All costs expose analytic gradients with respect to the
joint configuration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FileFormatError
from .kinematics import (
    KinematicChain,
    FkResult,
    angular_jacobian,
    fk_full,
    points_jacobian_batch,
)
from .robot_model import GripperPointSet, SurfacePointSet, transform_points
from .scene import (
    SignedDistanceGrid,
    collision_penalty,
    collision_penalty_derivative,
)
from .transforms import (
    RigidTransform,
    euler_xyz_from_rotation,
    quaternion_from_rotation,
    quaternion_multiply,
)

COST_KINDS = ("point_matching", "quaternion", "euler")


@dataclass
class GoalSet:
    """Candidate gripper poses in the base frame."""

    poses: list[RigidTransform]

    def __post_init__(self):
        for pose in self.poses:
            if not pose.is_valid(tol=1e-6):
                raise ValueError("goal set contains an invalid rigid transform")

    def __len__(self) -> int:
        return len(self.poses)

    def __getitem__(self, i: int) -> RigidTransform:
        return self.poses[i]


def load_goal_set(path) -> GoalSet:
    """JSON array of objects with a 16-element row-major "pose" matrix."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise FileFormatError(f"cannot read goal file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"goal file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise FileFormatError(f"goal file {path} must hold a JSON array")
    poses = []
    for i, entry in enumerate(data):
        try:
            poses.append(RigidTransform.from_matrix(np.array(entry["pose"], dtype=float)))
        except (KeyError, TypeError, ValueError) as exc:
            raise FileFormatError(f"goal {i} in {path} is malformed: {exc}") from exc
    return GoalSet(poses)


def save_goal_set(goals: GoalSet, path) -> None:
    data = [{"pose": pose.as_matrix().reshape(16).tolist()} for pose in goals.poses]
    Path(path).write_text(json.dumps(data, indent=1))


@dataclass
class StandoffSpec:
    """Pre-grasp displacement along the gripper approach axis."""

    offset: float
    delta_steps: int

    def __post_init__(self):
        if self.offset <= 0:
            raise ValueError("standoff offset must be positive")
        if self.delta_steps <= 0:
            raise ValueError("standoff delta must be positive")


APPROACH_AXIS = np.array([0.0, 0.0, 1.0])


def standoff_pose(goal: RigidTransform, offset: float, approach_axis=APPROACH_AXIS) -> RigidTransform:
    """Goal pose backed off along the tool-frame approach axis."""
    return goal @ RigidTransform(translation=-offset * np.asarray(approach_axis, float))


# ---------------------------------------------------------------------------
# goal-reaching costs


def goal_cost(pose: RigidTransform, goal: RigidTransform, gripper_pts: GripperPointSet) -> float:
    """Sum of squared distances between the gripper points under two poses."""
    diff = pose.apply(gripper_pts.points) - goal.apply(gripper_pts.points)
    return float(np.einsum("ij,ij->", diff, diff))


def goal_cost_quaternion(pose: RigidTransform, goal: RigidTransform) -> float:
    """Squared translation error plus the squared-dot quaternion distance."""
    dt = pose.translation - goal.translation
    qa = quaternion_from_rotation(pose.rotation)
    qb = quaternion_from_rotation(goal.rotation)
    return max(float(dt @ dt + 1.0 - (qa @ qb) ** 2), 0.0)


def goal_cost_euler(pose: RigidTransform, goal: RigidTransform) -> float:
    """Squared translation error plus squared intrinsic-XYZ Euler differences.

    Deliberately discontinuous across the +/-pi seam; kept as a baseline.
    """
    dt = pose.translation - goal.translation
    de = euler_xyz_from_rotation(pose.rotation) - euler_xyz_from_rotation(goal.rotation)
    return float(dt @ dt + de @ de)


def _tool_point_jacobians(
    chain: KinematicChain, fk: FkResult, points_local: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """World points on the tool link and their stacked Jacobians."""
    li = chain.link_index(chain.tool_link)
    world = points_local @ fk.rotations[li].T + fk.translations[li]
    link_idx = np.full(len(world), li, dtype=int)
    return world, points_jacobian_batch(chain, fk, world, link_idx)


def point_matching_term(
    chain: KinematicChain, fk: FkResult, points_local: np.ndarray, target_world: np.ndarray
) -> tuple[float, np.ndarray]:
    """Value and q-gradient of sum ||tool-frame points - world targets||^2."""
    world, jac = _tool_point_jacobians(chain, fk, points_local)
    diff = world - target_world
    value = float(np.einsum("ij,ij->", diff, diff))
    grad = 2.0 * np.einsum("mi,mik->k", diff, jac)
    return value, grad


def goal_cost_gradient(
    chain: KinematicChain,
    q,
    goal: RigidTransform,
    gripper_pts: GripperPointSet,
    fk: FkResult | None = None,
) -> np.ndarray:
    """d(point-matching goal cost)/dq via the chain rule through FK."""
    if fk is None:
        fk = fk_full(chain, q)
    _, grad = point_matching_term(
        chain, fk, gripper_pts.points, goal.apply(gripper_pts.points)
    )
    return grad


def quaternion_cost_gradient(
    chain: KinematicChain, q, goal: RigidTransform, fk: FkResult | None = None
) -> np.ndarray:
    if fk is None:
        fk = fk_full(chain, q)
    tool = fk.tool_pose()
    _, jac_t = _tool_point_jacobians(chain, fk, np.zeros((1, 3)))
    grad = 2.0 * np.einsum(
        "i,ik->k", tool.translation - goal.translation, jac_t[0]
    )
    q_tool = quaternion_from_rotation(tool.rotation)
    q_goal = quaternion_from_rotation(goal.rotation)
    dot = q_tool @ q_goal
    jw = angular_jacobian(chain, fk, chain.tool_link)       # (3, dof)
    for k in range(chain.dof):
        w = jw[:, k]
        if not w.any():
            continue
        dq_tool = 0.5 * quaternion_multiply(np.array([w[0], w[1], w[2], 0.0]), q_tool)
        grad[k] += -2.0 * dot * (dq_tool @ q_goal)
    return grad


def euler_cost_gradient(
    chain: KinematicChain, q, goal: RigidTransform, fk: FkResult | None = None
) -> np.ndarray:
    """Gradient of the Euler-angle cost; large but finite near gimbal lock."""
    if fk is None:
        fk = fk_full(chain, q)
    tool = fk.tool_pose()
    _, jac_t = _tool_point_jacobians(chain, fk, np.zeros((1, 3)))
    grad = 2.0 * np.einsum("i,ik->k", tool.translation - goal.translation, jac_t[0])
    e = euler_xyz_from_rotation(tool.rotation)
    de = e - euler_xyz_from_rotation(goal.rotation)
    jw = angular_jacobian(chain, fk, chain.tool_link)
    # world angular velocity = A(e) @ euler_rates for intrinsic XYZ
    ca, sa = np.cos(e[0]), np.sin(e[0])
    cb, sb = np.cos(e[1]), np.sin(e[1])
    a_map = np.array(
        [
            [1.0, 0.0, sb],
            [0.0, ca, -sa * cb],
            [0.0, sa, ca * cb],
        ]
    )
    try:
        de_dq = np.linalg.solve(a_map, jw)
    except np.linalg.LinAlgError:
        de_dq = np.linalg.lstsq(a_map, jw, rcond=None)[0]
    grad += 2.0 * de @ de_dq
    return grad


def goal_objective(
    chain: KinematicChain,
    gripper_pts: GripperPointSet,
    goal: RigidTransform,
    cost_kind: str = "point_matching",
):
    """Callable q -> (cost, gradient) for the chosen goal cost."""
    if cost_kind not in COST_KINDS:
        raise ValueError(f"unknown cost kind {cost_kind!r}; expected one of {COST_KINDS}")

    def objective(q):
        fk = fk_full(chain, q)
        pose = fk.tool_pose()
        if cost_kind == "point_matching":
            return (
                goal_cost(pose, goal, gripper_pts),
                goal_cost_gradient(chain, q, goal, gripper_pts, fk=fk),
            )
        if cost_kind == "quaternion":
            return (
                goal_cost_quaternion(pose, goal),
                quaternion_cost_gradient(chain, q, goal, fk=fk),
            )
        return (
            goal_cost_euler(pose, goal),
            euler_cost_gradient(chain, q, goal, fk=fk),
        )

    return objective


# ---------------------------------------------------------------------------
# collision and smoothness costs


def config_collision_cost(
    grid: SignedDistanceGrid,
    chain: KinematicChain,
    pts: SurfacePointSet,
    q,
    eps: float,
) -> float:
    """Sum of the proximity penalty over all robot surface points at q."""
    world = transform_points(chain, q, pts)
    return float(collision_penalty(grid.query(world), eps).sum())


def config_collision_cost_gradient(
    grid: SignedDistanceGrid,
    chain: KinematicChain,
    pts: SurfacePointSet,
    q,
    eps: float,
    fk: FkResult | None = None,
) -> np.ndarray:
    """Chain rule through the grid's central-difference spatial gradient."""
    if fk is None:
        fk = fk_full(chain, q)
    world = transform_points(chain, q, pts, fk=fk)
    d = grid.query(world)
    slope = collision_penalty_derivative(d, eps)
    active = slope != 0.0
    grad = np.zeros(chain.dof)
    if not active.any():
        return grad
    g_sdf = grid.gradient(world[active])                  # (A, 3)
    jac = points_jacobian_batch(chain, fk, world[active], pts.link_indices[active])
    return np.einsum("a,ai,aik->k", slope[active], g_sdf, jac)


def velocity_cost(velocities) -> float:
    """Sum of squared joint velocities over all trajectory steps.

    Accepts a (T, n) array or anything exposing a ``velocities`` attribute.
    """
    v = np.asarray(getattr(velocities, "velocities", velocities), dtype=float)
    return float((v * v).sum())

"""Goal-reaching inverse kinematics by bound-constrained optimization.

A solution counts as found when the tool pose lands within 1 cm translation
and 5 degrees rotation of the target; several restarts per goal keep local
minima from dominating batch feasibility checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import GoalSet, GripperPointSet, goal_objective
from .kinematics import KinematicChain, fk_full
from .solver import NlpProblem, SolveOptions, solve
from .transforms import RigidTransform, geodesic_angle

TRANSLATION_SUCCESS = 0.01              # meters
ROTATION_SUCCESS = np.deg2rad(5.0)      # radians
DEFAULT_IK_ITERATIONS = 200


@dataclass
class IkResult:
    q_star: np.ndarray
    translation_error: float
    rotation_error: float
    success: bool
    objective_value: float


def pose_errors(chain: KinematicChain, q, goal: RigidTransform) -> tuple[float, float]:
    """Translation distance and geodesic rotation angle between FK(q) and goal."""
    tool = fk_full(chain, q).tool_pose()
    trans = float(np.linalg.norm(tool.translation - goal.translation))
    rot = geodesic_angle(tool.rotation, goal.rotation)
    return trans, rot


def solve_ik(
    chain: KinematicChain,
    gripper_pts: GripperPointSet,
    goal: RigidTransform,
    q_init,
    cost_kind: str = "point_matching",
    max_iterations: int = DEFAULT_IK_ITERATIONS,
) -> IkResult:
    """Minimize the chosen goal cost over the joint box from one start."""
    problem = NlpProblem(
        dim=chain.dof,
        objective=goal_objective(chain, gripper_pts, goal, cost_kind),
        lower=chain.lower,
        upper=chain.upper,
        x0=np.asarray(q_init, dtype=float),
    )
    # one quasi-Newton cycle: identical, flat iteration budget per restart
    report = solve(problem, SolveOptions(max_outer=1, max_inner=max_iterations))
    trans, rot = pose_errors(chain, report.x_star, goal)
    return IkResult(
        q_star=report.x_star,
        translation_error=trans,
        rotation_error=rot,
        success=trans < TRANSLATION_SUCCESS and rot < ROTATION_SUCCESS,
        objective_value=report.objective_value,
    )


def default_restarts(
    chain: KinematicChain, q_current=None, seed: int = 0
) -> list[np.ndarray]:
    """Mid-range, current configuration, and one seeded in-limits sample."""
    rng = np.random.default_rng(seed)
    restarts = [chain.midrange_config()]
    if q_current is not None:
        restarts.append(chain.clamp_config(q_current))
    restarts.append(rng.uniform(chain.lower, chain.upper))
    return restarts


def batch_ik(
    chain: KinematicChain,
    gripper_pts: GripperPointSet,
    goals: GoalSet,
    q_inits: list,
    cost_kind: str = "point_matching",
    max_iterations: int = DEFAULT_IK_ITERATIONS,
) -> list[IkResult]:
    """One result per goal, best across the given restarts.

    A successful restart beats any failed one; ties resolve by objective
    value, so results are deterministic for fixed inputs.
    """
    results = []
    for goal in goals.poses:
        best: IkResult | None = None
        for q_init in q_inits:
            candidate = solve_ik(
                chain, gripper_pts, goal, q_init, cost_kind, max_iterations
            )
            if best is None or (not best.success, best.objective_value) > (
                not candidate.success,
                candidate.objective_value,
            ):
                best = candidate
            if best.success and best.translation_error < 1e-4:
                break
        results.append(best)
    return results


def success_count(results: list[IkResult]) -> int:
    return sum(1 for r in results if r.success)

"""Service operations behind the HTTP endpoints and the CLI.

Each function takes a request model, does file I/O plus the core-package
work, and returns a response model. Paths in requests are resolved on the
machine running the service.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from . import scenegen
from .costs import GoalSet, load_goal_set, save_goal_set
from .errors import FileFormatError, GraspMotionError, InfeasibleGoalError
from .ik import batch_ik, default_restarts
from .kinematics import KinematicChain, infer_base_and_tool, load_urdf
from .planner import PlannerConfig, export_plan, import_plan, plan
from .robot_model import gripper_points_from_chain, sample_surface_points
from .scene import (
    backproject,
    build_sdf,
    check_trajectory_collision,
    load_cloud,
    load_pgm_depth,
    load_sdf,
    save_sdf,
    save_xyz,
)
from .schemas import (
    COST_ALIASES,
    CandidateSummary,
    CheckRequest,
    CheckResponse,
    IkRecord,
    IkRequest,
    IkResponse,
    PlanRequest,
    PlanResponse,
    RobotRef,
    SceneRequest,
    SceneResponse,
    SdfRequest,
    SdfResponse,
)

logger = logging.getLogger(__name__)


def _require_file(path, kind: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise FileFormatError(f"{kind} file not found: {p}")
    return p


def load_chain(robot: RobotRef) -> KinematicChain:
    urdf_path = _require_file(robot.urdf, "URDF")
    base, tool = robot.base_link, robot.tool_link
    if base is None or tool is None:
        inferred_base, inferred_tool = infer_base_and_tool(urdf_path.read_text())
        base = base or inferred_base
        tool = tool or inferred_tool
    return load_urdf(urdf_path, base, tool)


def build_sdf_service(req: SdfRequest) -> SdfResponse:
    if (req.cloud is None) == (req.depth is None):
        raise FileFormatError("exactly one of cloud or depth input is required")
    if req.cloud is not None:
        cloud = load_cloud(_require_file(req.cloud, "cloud"))
    else:
        depth_path = _require_file(req.depth, "depth")
        camera_path = depth_path.with_suffix(".cam")
        _require_file(camera_path, "camera sidecar")
        cloud = backproject(load_pgm_depth(depth_path, camera_path))
    if len(cloud) == 0:
        raise FileFormatError("scene cloud is empty")
    grid = build_sdf(cloud, resolution=req.resolution, margin=req.margin)
    save_sdf(grid, req.out)
    return SdfResponse(
        dims=list(grid.dims),
        value_min=float(grid.values.min()),
        value_max=float(grid.values.max()),
        signed=cloud.source is not None,
        out=str(req.out),
    )


def ik_service(req: IkRequest) -> IkResponse:
    chain = load_chain(req.robot)
    gripper = gripper_points_from_chain(
        chain, points_per_link=req.robot.points_per_link, seed=req.robot.seed
    )
    goals = load_goal_set(_require_file(req.goals, "goal"))
    restarts = default_restarts(chain, seed=req.robot.seed)
    results: dict[str, list[IkRecord]] = {}
    counts: dict[str, int] = {}
    for cost in req.costs:
        kind = COST_ALIASES.get(cost, cost)
        if kind not in COST_ALIASES.values():
            raise FileFormatError(f"unknown IK cost {cost!r}; expected pm, quat, or euler")
        batch = batch_ik(chain, gripper, goals, restarts, cost_kind=kind)
        records = [
            IkRecord(
                goal_index=i,
                q_star=r.q_star.tolist(),
                translation_error=r.translation_error,
                rotation_error=r.rotation_error,
                success=r.success,
                objective_value=r.objective_value,
            )
            for i, r in enumerate(batch)
        ]
        results[cost] = records
        counts[cost] = sum(1 for r in records if r.success)
    response = IkResponse(
        count=len(goals), success_counts=counts, results=results, report=req.report
    )
    if req.report:
        Path(req.report).write_text(response.model_dump_json(indent=1))
    return response


def plan_service(req: PlanRequest) -> PlanResponse:
    chain = load_chain(req.robot)
    pts = sample_surface_points(
        chain, points_per_link=req.robot.points_per_link, seed=req.robot.seed
    )
    gripper = gripper_points_from_chain(
        chain, points_per_link=req.robot.points_per_link, seed=req.robot.seed
    )
    grid = load_sdf(_require_file(req.sdf, "SDF"))
    goals = load_goal_set(_require_file(req.goals, "goal"))
    config = PlannerConfig.from_dict(req.config) if req.config else PlannerConfig()
    q0 = np.asarray(
        req.q0 if req.q0 is not None else chain.midrange_config(), dtype=float
    )
    if q0.shape != (chain.dof,):
        raise FileFormatError(
            f"q0 has {q0.size} entries but the robot has {chain.dof} joints"
        )

    try:
        result = plan(chain, pts, gripper, grid, q0, goals, config)
    except InfeasibleGoalError as exc:
        response = PlanResponse(
            status="infeasible", message=str(exc), config=config.to_dict()
        )
        if req.out_report:
            Path(req.out_report).write_text(response.model_dump_json(indent=1))
            response.out_report = str(req.out_report)
        return response

    in_collision, worst = check_trajectory_collision(grid, chain, pts, result.plan)
    response = PlanResponse(
        status="converged" if result.converged else "not_converged",
        selected_goal_index=result.plan.selected_goal_index,
        objective=result.objective_breakdown,
        translation_error=result.translation_error,
        rotation_error=result.rotation_error,
        equality_residual=result.solve_report.max_equality_residual,
        wall_time=result.wall_time,
        candidates=[CandidateSummary(**c) for c in result.candidate_summaries],
        config=config.to_dict(),
    )
    response.objective = dict(response.objective)
    response.objective["in_collision"] = in_collision
    response.objective["worst_negative_count"] = worst
    if req.out_traj:
        export_plan(result.plan, req.out_traj)
        response.out_traj = str(req.out_traj)
    if req.out_report:
        Path(req.out_report).write_text(response.model_dump_json(indent=1))
        response.out_report = str(req.out_report)
    return response


def check_service(req: CheckRequest) -> CheckResponse:
    chain = load_chain(req.robot)
    pts = sample_surface_points(
        chain, points_per_link=req.robot.points_per_link, seed=req.robot.seed
    )
    grid = load_sdf(_require_file(req.sdf, "SDF"))
    traj = import_plan(_require_file(req.traj, "trajectory"))
    if traj.dof != chain.dof:
        raise FileFormatError(
            f"trajectory has {traj.dof} joints but the robot has {chain.dof}"
        )
    in_collision, worst = check_trajectory_collision(grid, chain, pts, traj)
    return CheckResponse(in_collision=in_collision, worst_negative_count=worst)


def scene_service(req: SceneRequest) -> SceneResponse:
    if req.kind not in ("tabletop", "shelf"):
        raise FileFormatError(
            f"unknown scene kind {req.kind!r}; expected tabletop or shelf"
        )
    generated = scenegen.generate_scene(req.kind, req.seed)
    save_xyz(generated.cloud, req.out_cloud)
    save_goal_set(generated.goals, req.out_goals)
    return SceneResponse(
        kind=req.kind,
        seed=req.seed,
        num_points=len(generated.cloud),
        num_goals=len(generated.goals),
        out_cloud=str(req.out_cloud),
        out_goals=str(req.out_goals),
    )

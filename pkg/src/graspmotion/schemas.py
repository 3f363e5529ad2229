"""Pydantic request/response models for the planning service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field

COST_ALIASES = {"pm": "point_matching", "quat": "quaternion", "euler": "euler"}


class RobotRef(BaseModel):
    """URDF path plus optional explicit base/tool links (inferred otherwise)."""

    urdf: str
    base_link: Optional[str] = None
    tool_link: Optional[str] = None
    points_per_link: int = 100
    seed: int = 0


class SdfRequest(BaseModel):
    cloud: Optional[str] = None
    depth: Optional[str] = None
    resolution: float = 0.05
    margin: float = 0.3
    out: str


class SdfResponse(BaseModel):
    dims: list[int]
    value_min: float
    value_max: float
    signed: bool
    out: str


class IkRecord(BaseModel):
    goal_index: int
    q_star: list[float]
    translation_error: float
    rotation_error: float
    success: bool
    objective_value: float


class IkRequest(BaseModel):
    robot: RobotRef
    goals: str
    costs: list[str] = Field(default_factory=lambda: ["pm"])
    report: Optional[str] = None


class IkResponse(BaseModel):
    count: int
    success_counts: dict[str, int]
    results: dict[str, list[IkRecord]]
    report: Optional[str] = None


class PlanRequest(BaseModel):
    robot: RobotRef
    sdf: str
    goals: str
    q0: Optional[list[float]] = None
    config: dict = Field(default_factory=dict)
    out_traj: Optional[str] = None
    out_report: Optional[str] = None


class CandidateSummary(BaseModel):
    goal_index: int
    objective: float
    initial_objective: float
    initial_collision_cost: float
    converged: bool
    equality_residual: float
    iterations: int


class PlanResponse(BaseModel):
    status: str  # "converged" | "not_converged" | "infeasible"
    message: str = ""
    selected_goal_index: int = -1
    objective: dict = Field(default_factory=dict)
    translation_error: float = float("nan")
    rotation_error: float = float("nan")
    equality_residual: float = float("nan")
    wall_time: float = 0.0
    candidates: list[CandidateSummary] = Field(default_factory=list)
    config: dict = Field(default_factory=dict)
    out_traj: Optional[str] = None
    out_report: Optional[str] = None


class CheckRequest(BaseModel):
    robot: RobotRef
    sdf: str
    traj: str


class CheckResponse(BaseModel):
    in_collision: bool
    worst_negative_count: int


class SceneRequest(BaseModel):
    kind: str
    seed: int = 0
    out_cloud: str
    out_goals: str


class SceneResponse(BaseModel):
    kind: str
    seed: int
    num_points: int
    num_goals: int
    out_cloud: str
    out_goals: str

"""Joint motion and grasp planning over a fixed goal set.

The pipeline filters goals that collide or lack an IK solution, ranks linear
interpolations by collision cost, then solves a constrained trajectory
program per surviving goal and keeps the cheapest solution. Trajectories are
T joint positions plus T joint velocities tied together by first-order
dynamics, with start/end boundary conditions and joint/velocity bounds.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .costs import (
    GoalSet,
    GripperPointSet,
    point_matching_term,
    standoff_pose,
    velocity_cost,
)
from .errors import FileFormatError, InfeasibleGoalError
from .ik import batch_ik, default_restarts, pose_errors
from .kinematics import KinematicChain, fk_batch, fk_full
from .robot_model import SurfacePointSet, transform_points
from .scene import (
    SignedDistanceGrid,
    collision_penalty,
    collision_penalty_derivative,
    count_negative_points,
    COLLISION_POINT_THRESHOLD,
)
from .solver import LinearEquality, NlpProblem, SolveOptions, SolveReport, solve
from .transforms import RigidTransform

logger = logging.getLogger(__name__)

EQ5_TOLERANCE = 1e-6
RANK_TIE_TOLERANCE = 1e-9


@dataclass
class PlannerConfig:
    """Trajectory program sizes and weights."""

    T: int = 50
    horizon: float = 10.0
    lambda1: float = 10.0
    lambda2: float = 0.01
    delta: int = 10
    eps: float = 0.02
    standoff_offset: float = 0.10
    top_n_goals: int = 3
    formulation: str = "full"  # "full" or "reduced"
    seed: int = 0

    def __post_init__(self):
        if self.T < 3:
            raise ValueError("trajectory needs at least 3 steps")
        if not 0 < self.delta < self.T:
            raise ValueError("standoff delta must satisfy 0 < delta < T")
        if self.formulation not in ("full", "reduced"):
            raise ValueError(f"unknown formulation {self.formulation!r}")

    @property
    def dt(self) -> float:
        return self.horizon / self.T

    @classmethod
    def from_dict(cls, data: dict) -> "PlannerConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown planner config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "PlannerConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
            raise FileFormatError(f"bad planner config {path}: {exc}") from exc

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrajectoryPlan:
    """T positions and T velocities plus metadata about the chosen grasp."""

    positions: np.ndarray
    velocities: np.ndarray
    dt: float
    selected_goal_index: int = -1
    standoff_index: int = -1  # 1-based step number T - delta

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.velocities = np.asarray(self.velocities, dtype=float)
        if self.positions.shape != self.velocities.shape:
            raise ValueError("positions and velocities must have the same shape")

    @property
    def steps(self) -> int:
        return self.positions.shape[0]

    @property
    def dof(self) -> int:
        return self.positions.shape[1]

    def standoff_row(self) -> int:
        return self.standoff_index - 1

    def dynamics_residual(self) -> float:
        """Max-norm violation of q_{t+1} = q_t + qd_t * dt."""
        diff = (
            self.positions[1:]
            - self.positions[:-1]
            - self.velocities[:-1] * self.dt
        )
        return float(np.abs(diff).max(initial=0.0))


def validate_plan(
    plan: TrajectoryPlan, chain: KinematicChain, q0=None
) -> tuple[bool, dict]:
    """Check boundary conditions, dynamics residual, and bound feasibility."""
    metrics = {
        "start_matches_q0": True
        if q0 is None
        else bool(np.array_equal(plan.positions[0], np.asarray(q0, dtype=float))),
        "start_velocity_zero": bool(np.all(plan.velocities[0] == 0.0)),
        "end_velocity_zero": bool(np.all(plan.velocities[-1] == 0.0)),
        "dynamics_residual": plan.dynamics_residual(),
        "position_bound_violation": float(
            np.maximum(
                plan.positions - chain.upper, chain.lower - plan.positions
            ).max(initial=-np.inf)
        ),
        "velocity_bound_violation": float(
            (np.abs(plan.velocities) - chain.velocity_limits).max(initial=-np.inf)
        ),
    }
    ok = (
        metrics["start_matches_q0"]
        and metrics["start_velocity_zero"]
        and metrics["end_velocity_zero"]
        and metrics["dynamics_residual"] <= EQ5_TOLERANCE
        and metrics["position_bound_violation"] <= 0.0
        and metrics["velocity_bound_violation"] <= 0.0
    )
    return ok, metrics


# ---------------------------------------------------------------------------
# goal filtering and initialization


def filter_goals_collision(
    grid: SignedDistanceGrid,
    chain: KinematicChain,
    gripper_pts: GripperPointSet,
    goals: GoalSet,
) -> list[int]:
    """Indices of goals whose gripper points are not inside the scene."""
    survivors = []
    for i, goal in enumerate(goals.poses):
        world = goal.apply(gripper_pts.points)
        if count_negative_points(grid, world) < COLLISION_POINT_THRESHOLD:
            survivors.append(i)
    return survivors


def filter_goals_ik(
    chain: KinematicChain,
    gripper_pts: GripperPointSet,
    goals: GoalSet,
    indices: list[int],
    q0,
    seed: int = 0,
) -> list[tuple[int, np.ndarray]]:
    """Keep goals with an IK solution, paired with the found configuration."""
    if not indices:
        return []
    subset = GoalSet([goals.poses[i] for i in indices])
    restarts = default_restarts(chain, q_current=q0, seed=seed)
    results = batch_ik(chain, gripper_pts, subset, restarts)
    return [
        (idx, res.q_star) for idx, res in zip(indices, results) if res.success
    ]


def interpolate_configs(q0, q1, steps: int) -> np.ndarray:
    """Linear joint-space interpolation including both endpoints, (steps, n)."""
    alphas = np.linspace(0.0, 1.0, steps).reshape(-1, 1)
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    return q0 + alphas * (q1 - q0)


def trajectory_collision_cost(
    grid: SignedDistanceGrid,
    chain: KinematicChain,
    pts: SurfacePointSet,
    positions: np.ndarray,
    eps: float,
) -> float:
    total = 0.0
    for q in positions:
        world = transform_points(chain, q, pts)
        total += float(collision_penalty(grid.query(world), eps).sum())
    return total


def rank_initializations(
    grid: SignedDistanceGrid,
    chain: KinematicChain,
    pts: SurfacePointSet,
    q0,
    candidates: list[tuple[int, np.ndarray]],
    config: PlannerConfig,
) -> list[tuple[int, np.ndarray, float]]:
    """Sort goal candidates by interpolated-trajectory collision cost.

    Near-ties resolve in favor of the IK configuration closest to the start.
    """
    scored = []
    for goal_idx, q_ik in candidates:
        positions = interpolate_configs(q0, q_ik, config.T)
        cost = trajectory_collision_cost(grid, chain, pts, positions, config.eps)
        scored.append((goal_idx, q_ik, cost, float(np.linalg.norm(q_ik - q0))))
    scored.sort(key=lambda item: item[2])
    ordered = []
    i = 0
    while i < len(scored):
        j = i + 1
        while j < len(scored) and scored[j][2] - scored[i][2] < RANK_TIE_TOLERANCE:
            j += 1
        group = sorted(scored[i:j], key=lambda item: (item[3], item[0]))
        ordered.extend((g[0], g[1], g[2]) for g in group)
        i = j
    return ordered


# ---------------------------------------------------------------------------
# the trajectory program


class TrajectoryObjective:
    """Objective and gradient of the fixed-goal program.

    Variables are the stacked positions then velocities, both row-major
    (T, n). Inside the optimizer the collision term reads the distance grid
    through trilinear interpolation, treating the field as locally linear
    between cell centers so the line search sees a continuous value with a
    consistent gradient; reported costs elsewhere keep the plain
    nearest-cell lookup.
    """

    def __init__(
        self,
        chain: KinematicChain,
        pts: SurfacePointSet,
        gripper_pts: GripperPointSet,
        grid: SignedDistanceGrid,
        goal: RigidTransform,
        config: PlannerConfig,
    ):
        self.chain = chain
        self.pts = pts
        self.gripper = gripper_pts
        self.grid = grid
        self.config = config
        self.T = config.T
        self.n = chain.dof
        self.goal_target = goal.apply(gripper_pts.points)
        self.standoff_target = standoff_pose(goal, config.standoff_offset).apply(
            gripper_pts.points
        )
        self.standoff_row = config.T - config.delta - 1
        # points this far (in raw lookup terms) beyond the penalty margin can
        # never contribute once the in-cell linear correction is applied
        self.active_cutoff = config.eps + 3.0 * grid.resolution
        self._prismatic = np.array(
            [j.kind == "prismatic" for j in chain.joints if j.actuated], dtype=bool
        )

    @property
    def dim(self) -> int:
        return 2 * self.T * self.n

    def split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        tn = self.T * self.n
        return x[:tn].reshape(self.T, self.n), x[tn:].reshape(self.T, self.n)

    def join(self, positions: np.ndarray, velocities: np.ndarray) -> np.ndarray:
        return np.concatenate([positions.ravel(), velocities.ravel()])

    def linearized_distance(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Locally linear signed distance and its spatial gradient."""
        return self.grid.interpolate(points)

    def __call__(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        q_all, qd_all = self.split(x)
        cfg = self.config
        grad_q = np.zeros_like(q_all)
        value = cfg.lambda2 * velocity_cost(qd_all)
        grad_qd = 2.0 * cfg.lambda2 * qd_all

        bfk = fk_batch(self.chain, q_all)
        if self.pts.total:
            world = bfk.world_points(self.pts.local_points, self.pts.link_indices)
            flat = world.reshape(-1, 3)
            d_raw = self.grid.query(flat)
            active = np.flatnonzero(d_raw < self.active_cutoff)
            if active.size:
                pa = flat[active]
                d_lin, g_sdf = self.linearized_distance(pa)
                value += cfg.lambda1 * float(collision_penalty(d_lin, cfg.eps).sum())
                slope = collision_penalty_derivative(d_lin, cfg.eps)
                nz = slope != 0.0
                if nz.any():
                    rows = active[nz]
                    ts = rows // self.pts.total
                    ms = rows % self.pts.total
                    contrib = self._collision_gradient(
                        bfk, pa[nz], slope[nz], g_sdf[nz], ts, ms
                    )
                    np.add.at(grad_q, ts, cfg.lambda1 * contrib)

        fk_last = bfk.step(self.T - 1)
        v, g = point_matching_term(
            self.chain, fk_last, self.gripper.points, self.goal_target
        )
        value += v
        grad_q[self.T - 1] += g
        fk_so = bfk.step(self.standoff_row)
        v, g = point_matching_term(
            self.chain, fk_so, self.gripper.points, self.standoff_target
        )
        value += v
        grad_q[self.standoff_row] += g
        return value, self.join(grad_q, grad_qd)

    def _collision_gradient(self, bfk, points, slope, g_sdf, ts, ms) -> np.ndarray:
        """Per-active-point chain rule, scattered later onto the step grid."""
        chain = self.chain
        ancestor = chain.ancestor_mask[self.pts.link_indices[ms]]  # (A, dof)
        weighted = slope[:, None] * g_sdf                          # (A, 3)
        contrib = np.zeros((len(points), chain.dof))
        for k in range(chain.dof):
            mask = ancestor[:, k]
            if not mask.any():
                continue
            if self._prismatic[k]:
                cols = bfk.joint_axes[ts[mask], k]
            else:
                cols = np.cross(
                    bfk.joint_axes[ts[mask], k],
                    points[mask] - bfk.joint_origins[ts[mask], k],
                )
            contrib[mask, k] = np.einsum("ai,ai->a", weighted[mask], cols)
        return contrib

    def components(self, positions: np.ndarray, velocities: np.ndarray) -> dict:
        """Unweighted and weighted term values for reporting."""
        cfg = self.config
        fk_last = fk_full(self.chain, positions[-1])
        goal_v, _ = point_matching_term(
            self.chain, fk_last, self.gripper.points, self.goal_target
        )
        fk_so = fk_full(self.chain, positions[self.standoff_row])
        standoff_v, _ = point_matching_term(
            self.chain, fk_so, self.gripper.points, self.standoff_target
        )
        collision = trajectory_collision_cost(
            self.grid, self.chain, self.pts, positions, cfg.eps
        )
        vel = velocity_cost(velocities)
        total = goal_v + standoff_v + cfg.lambda1 * collision + cfg.lambda2 * vel
        return {
            "goal_cost": goal_v,
            "standoff_cost": standoff_v,
            "collision_cost": collision,
            "velocity_cost": vel,
            "weighted_collision_cost": cfg.lambda1 * collision,
            "weighted_velocity_cost": cfg.lambda2 * vel,
            "total": total,
        }


class ReducedTrajectoryObjective:
    """Velocity-only variables; positions reconstructed by exact integration.

    The dynamics and start constraint hold by construction, so no equalities
    remain; position bounds are enforced with a stiff quadratic penalty and
    re-checked after the solve (residual violations settle near
    gradient-scale / weight, comfortably under a micro-radian).
    """

    BOUND_WEIGHT = 1e6

    def __init__(self, inner: TrajectoryObjective, q0: np.ndarray):
        self.inner = inner
        self.q0 = np.asarray(q0, dtype=float)

    @property
    def dim(self) -> int:
        return self.inner.T * self.inner.n

    def positions_from(self, qd_all: np.ndarray) -> np.ndarray:
        steps = self.inner.config.dt * qd_all[:-1]
        positions = np.empty_like(qd_all)
        positions[0] = self.q0
        np.cumsum(steps, axis=0, out=positions[1:])
        positions[1:] += self.q0
        return positions

    def __call__(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        T, n = self.inner.T, self.inner.n
        qd_all = x.reshape(T, n)
        positions = self.positions_from(qd_all)
        value, grad_full = self.inner(self.inner.join(positions, qd_all))
        grad_q, grad_qd = self.inner.split(grad_full)
        chain = self.inner.chain
        over = np.maximum(positions - chain.upper, 0.0)
        under = np.maximum(chain.lower - positions, 0.0)
        value += self.BOUND_WEIGHT * float((over**2).sum() + (under**2).sum())
        grad_q = grad_q + 2.0 * self.BOUND_WEIGHT * (over - under)
        # position gradients fold back onto every earlier velocity
        rev = np.cumsum(grad_q[::-1], axis=0)[::-1]
        grad = grad_qd.copy()
        grad[:-1] += self.inner.config.dt * rev[1:]
        return value, grad.ravel()


def build_trajectory_nlp(
    objective: TrajectoryObjective, q0: np.ndarray, x0: np.ndarray
) -> NlpProblem:
    """Full-variable program: box bounds plus dynamics equalities.

    Boundary conditions pin variables through equal lower/upper bounds, so
    they hold exactly in every iterate.
    """
    chain = objective.chain
    T, n = objective.T, objective.n
    tn = T * n
    lower = np.concatenate(
        [np.tile(chain.lower, T), np.tile(-chain.velocity_limits, T)]
    )
    upper = np.concatenate(
        [np.tile(chain.upper, T), np.tile(chain.velocity_limits, T)]
    )
    lower[:n] = upper[:n] = q0                    # q_1 = q0
    lower[tn : tn + n] = upper[tn : tn + n] = 0.0  # qd_1 = 0
    lower[-n:] = upper[-n:] = 0.0                  # qd_T = 0
    dt = objective.config.dt
    equalities = [
        LinearEquality(
            indices=[(t + 1) * n + j, t * n + j, tn + t * n + j],
            coefficients=[1.0, -1.0, -dt],
            rhs=0.0,
        )
        for t in range(T - 1)
        for j in range(n)
    ]
    return NlpProblem(
        dim=2 * tn,
        objective=objective,
        lower=lower,
        upper=upper,
        equalities=equalities,
        x0=x0,
    )


def _initial_variables(
    chain: KinematicChain, q0: np.ndarray, q_ik: np.ndarray, config: PlannerConfig
) -> tuple[np.ndarray, np.ndarray]:
    positions = interpolate_configs(q0, q_ik, config.T)
    velocities = np.zeros_like(positions)
    velocities[:-1] = (positions[1:] - positions[:-1]) / config.dt
    np.clip(
        velocities, -chain.velocity_limits, chain.velocity_limits, out=velocities
    )
    velocities[0] = 0.0
    velocities[-1] = 0.0
    return positions, velocities


def _finish_plan(
    chain: KinematicChain,
    q0: np.ndarray,
    positions: np.ndarray,
    velocities: np.ndarray,
    dt: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Make boundary conditions and dynamics exact without leaving the box.

    Positions stay as solved up to a dust-level clamp (row 1 snaps to row 0,
    both equal q0 up to the solver's equality residual); velocities are
    rebuilt from finite differences and clamped, which can only shrink the
    dynamics residual.
    """
    q_all = np.clip(positions, chain.lower, chain.upper)
    qd_all = velocities.copy()
    q_all[0] = q0
    q_all[1] = q_all[0]
    qd_all[1:-1] = (q_all[2:] - q_all[1:-1]) / dt
    np.clip(qd_all, -chain.velocity_limits, chain.velocity_limits, out=qd_all)
    qd_all[0] = 0.0
    qd_all[-1] = 0.0
    return q_all, qd_all


@dataclass
class PlanResult:
    plan: TrajectoryPlan
    solve_report: SolveReport
    objective_breakdown: dict
    translation_error: float
    rotation_error: float
    converged: bool
    wall_time: float
    candidate_summaries: list[dict] = field(default_factory=list)
    initial_objective: float = float("nan")


DEFAULT_SOLVE_OPTIONS = SolveOptions(
    max_outer=15, max_inner=600, eq_tol=1e-6, grad_tol=1e-3
)


def plan(
    chain: KinematicChain,
    pts: SurfacePointSet,
    gripper_pts: GripperPointSet,
    grid: SignedDistanceGrid,
    q0,
    goals: GoalSet,
    config: PlannerConfig | None = None,
    solve_options: SolveOptions | None = None,
) -> PlanResult:
    """Filter, rank, solve per goal, and return the cheapest valid plan."""
    config = config or PlannerConfig()
    solve_options = solve_options or DEFAULT_SOLVE_OPTIONS
    t_start = time.perf_counter()

    q0 = np.asarray(q0, dtype=float)
    q0_clamped = chain.clamp_config(q0)
    if not np.array_equal(q0, q0_clamped):
        logger.warning("start configuration clamped into joint limits")
    q0 = q0_clamped

    if len(goals) == 0:
        raise InfeasibleGoalError("empty goal set")
    survivors = filter_goals_collision(grid, chain, gripper_pts, goals)
    if not survivors:
        raise InfeasibleGoalError("all goals are in collision with the scene")
    with_ik = filter_goals_ik(
        chain, gripper_pts, goals, survivors, q0, seed=config.seed
    )
    if not with_ik:
        raise InfeasibleGoalError("no goal has an inverse-kinematics solution")
    ranked = rank_initializations(grid, chain, pts, q0, with_ik, config)

    best = None
    summaries = []
    for goal_idx, q_ik, init_collision in ranked[: config.top_n_goals]:
        objective = TrajectoryObjective(
            chain, pts, gripper_pts, grid, goals.poses[goal_idx], config
        )
        init_q, init_qd = _initial_variables(chain, q0, q_ik, config)
        init_total = objective.components(init_q, init_qd)["total"]
        if config.formulation == "reduced":
            report, q_sol, qd_sol = _solve_reduced(
                objective, chain, q0, init_qd, solve_options
            )
        else:
            report, q_sol, qd_sol = _solve_full(
                objective, q0, init_q, init_qd, solve_options
            )
        q_fin, qd_fin = _finish_plan(chain, q0, q_sol, qd_sol, config.dt)
        breakdown = objective.components(q_fin, qd_fin)
        summaries.append(
            {
                "goal_index": goal_idx,
                "objective": breakdown["total"],
                "initial_objective": init_total,
                "initial_collision_cost": init_collision,
                "converged": report.converged,
                "equality_residual": report.max_equality_residual,
                "iterations": report.iterations,
            }
        )
        if best is None or breakdown["total"] < best[0]:
            best = (breakdown["total"], goal_idx, q_fin, qd_fin, report, breakdown, init_total)

    total, goal_idx, q_fin, qd_fin, report, breakdown, init_total = best
    plan_out = TrajectoryPlan(
        positions=q_fin,
        velocities=qd_fin,
        dt=config.dt,
        selected_goal_index=goal_idx,
        standoff_index=config.T - config.delta,
    )
    trans, rot = pose_errors(chain, q_fin[-1], goals.poses[goal_idx])
    valid, _ = validate_plan(plan_out, chain, q0=q0)
    return PlanResult(
        plan=plan_out,
        solve_report=report,
        objective_breakdown=breakdown,
        translation_error=trans,
        rotation_error=rot,
        converged=bool(report.converged and valid),
        wall_time=time.perf_counter() - t_start,
        candidate_summaries=summaries,
        initial_objective=init_total,
    )


def _solve_full(objective, q0, init_q, init_qd, solve_options):
    x0 = objective.join(init_q, init_qd)
    problem = build_trajectory_nlp(objective, q0, x0)
    report = solve(problem, solve_options)
    q_sol, qd_sol = objective.split(report.x_star)
    return report, q_sol, qd_sol


def _solve_reduced(objective, chain, q0, init_qd, solve_options):
    reduced = ReducedTrajectoryObjective(objective, q0)
    T, n = objective.T, objective.n
    lower = np.tile(-chain.velocity_limits, T)
    upper = np.tile(chain.velocity_limits, T)
    lower[:n] = upper[:n] = 0.0
    lower[-n:] = upper[-n:] = 0.0
    problem = NlpProblem(
        dim=reduced.dim,
        objective=reduced,
        lower=lower,
        upper=upper,
        x0=init_qd.ravel(),
    )
    report = solve(problem, solve_options)
    qd_sol = report.x_star.reshape(T, n)
    q_sol = reduced.positions_from(qd_sol)
    violation = float(
        np.maximum(q_sol - chain.upper, chain.lower - q_sol).max(initial=-np.inf)
    )
    if violation > 1e-6:
        # beyond what the finish clamp can absorb without moving the plan
        logger.warning(
            "reduced formulation violated position bounds by %.2e; rerunning full",
            violation,
        )
        init_q = reduced.positions_from(init_qd)
        return _solve_full(objective, q0, init_q, init_qd, solve_options)
    return report, q_sol, qd_sol


# ---------------------------------------------------------------------------
# trajectory files


def export_plan(plan: TrajectoryPlan, path) -> None:
    """CSV with header t,dt,q_1..q_n,dq_1..dq_n; full float precision."""
    if plan.steps == 0:
        raise ValueError("cannot export an empty plan")
    n = plan.dof
    header = (
        "t,dt,"
        + ",".join(f"q_{j + 1}" for j in range(n))
        + ","
        + ",".join(f"dq_{j + 1}" for j in range(n))
    )
    lines = [header]
    for t in range(plan.steps):
        row = [str(t + 1), repr(float(plan.dt))]
        row.extend(repr(float(v)) for v in plan.positions[t])
        row.extend(repr(float(v)) for v in plan.velocities[t])
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def import_plan(path) -> TrajectoryPlan:
    """Read a trajectory CSV back; metadata fields keep their defaults."""
    try:
        lines = [l for l in Path(path).read_text().splitlines() if l.strip()]
    except OSError as exc:
        raise FileFormatError(f"cannot read trajectory file {path}: {exc}") from exc
    if not lines:
        raise FileFormatError(f"trajectory file {path} is empty")
    header = lines[0].split(",")
    if len(header) < 4 or header[0] != "t" or header[1] != "dt":
        raise FileFormatError(f"trajectory file {path} has a malformed header")
    n = (len(header) - 2) // 2
    if len(header) != 2 + 2 * n:
        raise FileFormatError(f"trajectory file {path} has a malformed header")
    positions, velocities, dts = [], [], []
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != len(header):
            raise FileFormatError(f"trajectory file {path} has a truncated row")
        try:
            dts.append(float(parts[1]))
            positions.append([float(v) for v in parts[2 : 2 + n]])
            velocities.append([float(v) for v in parts[2 + n :]])
        except ValueError as exc:
            raise FileFormatError(f"trajectory file {path} has a bad value") from exc
    if not positions:
        raise FileFormatError(f"trajectory file {path} has no data rows")
    return TrajectoryPlan(
        positions=np.array(positions),
        velocities=np.array(velocities),
        dt=dts[0],
    )

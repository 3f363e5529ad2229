"""Joint motion and grasp planning with point-cloud robot and scene models."""

from .costs import GoalSet, load_goal_set, save_goal_set
from .errors import (
    FileFormatError,
    GraspMotionError,
    InfeasibleGoalError,
    MeshError,
    UrdfError,
)
from .ik import IkResult, batch_ik, solve_ik
from .kinematics import (
    JointSpec,
    KinematicChain,
    forward_kinematics,
    load_urdf,
    parse_urdf,
    point_jacobian,
)
from .planner import (
    PlannerConfig,
    PlanResult,
    TrajectoryPlan,
    export_plan,
    import_plan,
    plan,
)
from .robot_model import (
    GripperPointSet,
    SurfacePointSet,
    gripper_points_from_chain,
    sample_surface_points,
    transform_points,
)
from .scene import (
    DepthImage,
    PointCloud,
    SignedDistanceGrid,
    backproject,
    build_sdf,
    check_trajectory_collision,
    collision_penalty,
    load_sdf,
    query_sdf,
    save_sdf,
)
from .solver import LinearEquality, NlpProblem, SolveOptions, SolveReport, solve
from .transforms import RigidTransform

__version__ = "0.1.0"

"""Exception types shared across the package."""


class GraspMotionError(Exception):
    """Base class for all package errors."""


class UrdfError(GraspMotionError):
    """Malformed or unsupported robot description."""


class MeshError(GraspMotionError):
    """Unreadable, empty, or malformed mesh file."""


class FileFormatError(GraspMotionError):
    """Malformed scene, goal, or trajectory file."""


class InfeasibleGoalError(GraspMotionError):
    """Every grasp goal was filtered out before optimization."""

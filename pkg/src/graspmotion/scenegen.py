"""Synthetic grasping scenes: seeded tabletop and shelf point clouds with goals.

Scenes assume a fixed-base arm at the origin with roughly a meter of reach.
Each generated goal set contains at least one pose over a clear patch,
approached from free space, so a correct planner always has work to do and a
way to finish it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .costs import GoalSet
from .scene import PointCloud
from .transforms import RigidTransform, rotation_y, rotation_z

SCENE_KINDS = ("tabletop", "shelf", "custom")
DEFAULT_DENSITY = 3000.0  # points per square meter


@dataclass
class BoxSpec:
    """Axis-aligned box obstacle sampled on its surface."""

    center: np.ndarray
    size: np.ndarray

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.size = np.asarray(self.size, dtype=float)


@dataclass
class SceneSpec:
    """Primitive layout from which the cloud and goal set are generated."""

    kind: str
    boxes: list[BoxSpec] = field(default_factory=list)
    density: float = DEFAULT_DENSITY
    camera_pose: RigidTransform | None = None

    def __post_init__(self):
        if self.kind not in SCENE_KINDS:
            raise ValueError(f"unknown scene kind {self.kind!r}")
        if self.density <= 0:
            raise ValueError("point density must be positive")


@dataclass
class GeneratedScene:
    cloud: PointCloud
    goals: GoalSet
    spec: SceneSpec
    target_center: np.ndarray


def _sample_plane(rng, corner, u_vec, v_vec, density) -> np.ndarray:
    """Uniformly sample a parallelogram patch at the given areal density."""
    area = np.linalg.norm(np.cross(u_vec, v_vec))
    count = max(int(area * density), 4)
    uv = rng.random((count, 2))
    return corner + uv[:, :1] * u_vec + uv[:, 1:] * v_vec


def sample_box_surface(rng, box: BoxSpec, density: float) -> np.ndarray:
    """Sample all six faces of a box."""
    cx, cy, cz = box.center
    sx, sy, sz = box.size / 2.0
    patches = []
    faces = [
        ([cx - sx, cy - sy, cz + sz], [2 * sx, 0, 0], [0, 2 * sy, 0]),  # top
        ([cx - sx, cy - sy, cz - sz], [2 * sx, 0, 0], [0, 2 * sy, 0]),  # bottom
        ([cx - sx, cy - sy, cz - sz], [2 * sx, 0, 0], [0, 0, 2 * sz]),  # front
        ([cx - sx, cy + sy, cz - sz], [2 * sx, 0, 0], [0, 0, 2 * sz]),  # back
        ([cx - sx, cy - sy, cz - sz], [0, 2 * sy, 0], [0, 0, 2 * sz]),  # left
        ([cx + sx, cy - sy, cz - sz], [0, 2 * sy, 0], [0, 0, 2 * sz]),  # right
    ]
    for corner, u, v in faces:
        patches.append(
            _sample_plane(rng, np.array(corner, float), np.array(u, float), np.array(v, float), density)
        )
    return np.concatenate(patches, axis=0)


def _top_down_goals(target: np.ndarray, yaws: np.ndarray) -> list[RigidTransform]:
    """Tool +z pointing straight down at the target, one pose per yaw."""
    poses = []
    for yaw in yaws:
        rot = rotation_z(float(yaw)) @ rotation_y(np.pi)
        poses.append(RigidTransform(rot, target))
    return poses


def _horizontal_goals(target: np.ndarray, yaw_center: float, rolls: np.ndarray) -> list[RigidTransform]:
    """Tool +z pointing horizontally toward the target from the robot side."""
    poses = []
    for roll in rolls:
        rot = rotation_z(yaw_center) @ rotation_y(np.pi / 2.0) @ rotation_z(float(roll))
        poses.append(RigidTransform(rot, target))
    return poses


def generate_tabletop(seed: int, density: float = DEFAULT_DENSITY) -> GeneratedScene:
    """Table plane, a couple of box obstacles, and top-down goals over a clear spot."""
    rng = np.random.default_rng(seed)
    table_z = 0.36
    table = BoxSpec(center=[0.60, 0.0, table_z - 0.02], size=[0.62, 0.9, 0.04])

    target_xy = np.array(
        [rng.uniform(0.44, 0.58), rng.uniform(-0.20, 0.20)]
    )
    target_center = np.array([target_xy[0], target_xy[1], table_z + 0.05])
    target_box = BoxSpec(
        center=[target_xy[0], target_xy[1], table_z + 0.035], size=[0.03, 0.03, 0.07]
    )

    obstacles = []
    for _ in range(2):
        for _attempt in range(20):
            pos = np.array(
                [rng.uniform(0.36, 0.82), rng.uniform(-0.35, 0.35)]
            )
            if np.linalg.norm(pos - target_xy) > 0.24:
                break
        size = rng.uniform([0.04, 0.04, 0.08], [0.08, 0.08, 0.18])
        obstacles.append(
            BoxSpec(center=[pos[0], pos[1], table_z + size[2] / 2.0], size=size)
        )

    spec = SceneSpec(kind="tabletop", boxes=[table, target_box] + obstacles, density=density)
    cloud_pts = np.concatenate(
        [sample_box_surface(rng, b, density) for b in spec.boxes], axis=0
    )
    yaws = rng.uniform(-np.pi, np.pi, size=8)
    goals = GoalSet(_top_down_goals(target_center, yaws))
    return GeneratedScene(PointCloud(cloud_pts), goals, spec, target_center)


def generate_shelf(seed: int, density: float = DEFAULT_DENSITY) -> GeneratedScene:
    """Two shelf boards, a back wall, and horizontal-approach goals between them."""
    rng = np.random.default_rng(seed)
    shelf_x = 0.68
    lower_z = 0.38
    upper_z = 0.80
    depth, width, thick = 0.34, 0.8, 0.03
    boards = [
        BoxSpec(center=[shelf_x, 0.0, lower_z - thick / 2], size=[depth, width, thick]),
        BoxSpec(center=[shelf_x, 0.0, upper_z + thick / 2], size=[depth, width, thick]),
        BoxSpec(
            center=[shelf_x + depth / 2 + thick / 2, 0.0, (lower_z + upper_z) / 2],
            size=[thick, width, upper_z - lower_z + 2 * thick],
        ),  # back wall
    ]
    target_y = rng.uniform(-0.18, 0.18)
    target_center = np.array([shelf_x - 0.06, target_y, lower_z + 0.06])
    target_box = BoxSpec(
        center=[target_center[0], target_center[1], lower_z + 0.035],
        size=[0.03, 0.03, 0.07],
    )
    spec = SceneSpec(kind="shelf", boxes=boards + [target_box], density=density)
    cloud_pts = np.concatenate(
        [sample_box_surface(rng, b, density) for b in spec.boxes], axis=0
    )
    yaw_center = float(np.arctan2(target_center[1], target_center[0]))
    # keep the finger pair near-horizontal so neither finger dips toward the board
    rolls = rng.uniform(-0.5, 0.5, size=8)
    goals = GoalSet(_horizontal_goals(target_center, yaw_center, rolls))
    return GeneratedScene(PointCloud(cloud_pts), goals, spec, target_center)


def generate_scene(kind: str, seed: int, density: float = DEFAULT_DENSITY) -> GeneratedScene:
    if kind == "tabletop":
        return generate_tabletop(seed, density)
    if kind == "shelf":
        return generate_shelf(seed, density)
    raise ValueError(f"unknown scene kind {kind!r}; expected tabletop or shelf")

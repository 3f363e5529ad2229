"""Point-cloud representation of the robot.

Each link contributes surface points sampled from its mesh vertices; the
gripper point set used by the goal-reaching cost defaults to the tool link's
surface points expressed in the tool frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MeshError
from .kinematics import KinematicChain, FkResult, fk_full
from .meshes import load_mesh_vertices

DEFAULT_POINTS_PER_LINK = 100


@dataclass
class SurfacePointSet:
    """Per-link surface points in link-local frames."""

    link_names: list[str]
    points_by_link: dict[str, np.ndarray]
    points_per_link: int
    # flattened caches for vectorized transforms
    local_points: np.ndarray = field(init=False)
    link_indices: np.ndarray = field(init=False)

    def __post_init__(self):
        blocks = []
        index_blocks = []
        for name in self.link_names:
            pts = self.points_by_link[name]
            blocks.append(pts)
            index_blocks.append(np.full(len(pts), -1, dtype=int))
        self.local_points = (
            np.concatenate(blocks, axis=0) if blocks else np.zeros((0, 3))
        )
        self.link_indices = (
            np.concatenate(index_blocks) if index_blocks else np.zeros(0, dtype=int)
        )

    def bind(self, chain: KinematicChain) -> None:
        """Resolve link indices against a chain (done once by constructors)."""
        offset = 0
        for name in self.link_names:
            k = len(self.points_by_link[name])
            self.link_indices[offset : offset + k] = chain.link_index(name)
            offset += k

    @property
    def total(self) -> int:
        return len(self.local_points)


@dataclass
class GripperPointSet:
    """Points on the end-effector, in the tool link frame."""

    points: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if len(self.points) < 3:
            raise ValueError("gripper point set needs at least 3 points")
        if _collinear(self.points):
            raise ValueError(
                "gripper points are collinear; they cannot distinguish all rotations"
            )

    @property
    def radius(self) -> float:
        return float(np.linalg.norm(self.points, axis=1).max())


def _collinear(points: np.ndarray, tol: float = 1e-9) -> bool:
    centered = points - points.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    return bool(s[1] <= tol * max(1.0, s[0]))


def farthest_point_sample(vertices: np.ndarray, count: int, seed: int) -> np.ndarray:
    """Indices of a farthest-point subsample; seeded start, deterministic ties."""
    n = len(vertices)
    count = min(count, n)
    rng = np.random.default_rng(seed)
    selected = np.empty(count, dtype=int)
    selected[0] = int(rng.integers(n))
    dist = np.linalg.norm(vertices - vertices[selected[0]], axis=1)
    for i in range(1, count):
        nxt = int(np.argmax(dist))
        selected[i] = nxt
        dist = np.minimum(dist, np.linalg.norm(vertices - vertices[nxt], axis=1))
    return selected


def sample_surface_points(
    chain: KinematicChain,
    points_per_link: int = DEFAULT_POINTS_PER_LINK,
    seed: int = 0,
) -> SurfacePointSet:
    """Sample up to ``points_per_link`` mesh vertices per link.

    Links without a mesh contribute no points. Deterministic for a fixed seed.
    """
    link_names = []
    points_by_link = {}
    for name in chain.links:
        mesh_path = chain.resolve_mesh_path(name)
        if mesh_path is None:
            continue
        vertices = load_mesh_vertices(mesh_path)
        idx = farthest_point_sample(vertices, points_per_link, seed)
        link_names.append(name)
        points_by_link[name] = vertices[idx]
    pts = SurfacePointSet(link_names, points_by_link, points_per_link)
    pts.bind(chain)
    return pts


def gripper_points_from_chain(
    chain: KinematicChain,
    points_per_link: int = DEFAULT_POINTS_PER_LINK,
    seed: int = 0,
) -> GripperPointSet:
    """Tool-link surface points as the end-effector point set."""
    mesh_path = chain.resolve_mesh_path(chain.tool_link)
    if mesh_path is None:
        raise MeshError(
            f"tool link {chain.tool_link!r} has no mesh; cannot build gripper points"
        )
    vertices = load_mesh_vertices(mesh_path)
    idx = farthest_point_sample(vertices, points_per_link, seed)
    return GripperPointSet(vertices[idx])


def transform_points(
    chain: KinematicChain, q, pts: SurfacePointSet, fk: FkResult | None = None
) -> np.ndarray:
    """World-frame positions of all surface points at configuration q, (M, 3)."""
    if fk is None:
        fk = fk_full(chain, q)
    if pts.total == 0:
        return np.zeros((0, 3))
    rot = fk.rotations[pts.link_indices]        # (M, 3, 3)
    trans = fk.translations[pts.link_indices]   # (M, 3)
    return np.einsum("mij,mj->mi", rot, pts.local_points) + trans

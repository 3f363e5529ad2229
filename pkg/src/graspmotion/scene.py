"""Scene point clouds and the signed distance grid built from them.

The grid stores, at each vertex of a regular lattice, the Euclidean distance
to the nearest scene point. When the cloud came from a depth image, a vertex
that projects onto a valid pixel with a smaller depth than its own camera
depth is behind the observed surface and gets a negative sign; everything
unobserved is treated as free space. Clouds loaded directly from files have
no viewpoint, so their grids are unsigned ("conservative-free" mode).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import FileFormatError
from .kinematics import KinematicChain, fk_full
from .robot_model import SurfacePointSet, transform_points
from .transforms import RigidTransform

DEFAULT_RESOLUTION = 0.05
DEFAULT_MARGIN = 0.3
OUTSIDE_SENTINEL = 1.0e6
# a trajectory configuration is in collision when at least this many robot
# surface points have negative signed distance
COLLISION_POINT_THRESHOLD = 5


@dataclass
class DepthImage:
    """Depth map in meters with pinhole intrinsics and camera-to-base extrinsics."""

    depth: np.ndarray
    fx: float
    fy: float
    cx: float
    cy: float
    extrinsics: RigidTransform

    def __post_init__(self):
        self.depth = np.asarray(self.depth, dtype=float)
        if self.depth.ndim != 2:
            raise ValueError("depth must be a 2-D array")
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")

    @property
    def height(self) -> int:
        return self.depth.shape[0]

    @property
    def width(self) -> int:
        return self.depth.shape[1]

    def valid_mask(self) -> np.ndarray:
        return np.isfinite(self.depth) & (self.depth > 0)


@dataclass
class PointCloud:
    """Scene points in the robot base frame."""

    points: np.ndarray
    source: Optional[DepthImage] = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if self.points.size and not np.all(np.isfinite(self.points)):
            raise ValueError("point cloud contains non-finite coordinates")

    def __len__(self) -> int:
        return len(self.points)


def backproject(depth: DepthImage) -> PointCloud:
    """Lift valid depth pixels to base-frame points."""
    mask = depth.valid_mask()
    v, u = np.nonzero(mask)
    d = depth.depth[v, u]
    x = (u - depth.cx) * d / depth.fx
    y = (v - depth.cy) * d / depth.fy
    cam_points = np.column_stack([x, y, d])
    return PointCloud(depth.extrinsics.apply(cam_points), source=depth)


@dataclass
class SignedDistanceGrid:
    """Regular grid of signed distances covering the scene plus a margin."""

    origin: np.ndarray
    resolution: float
    values: np.ndarray  # (nx, ny, nz)
    margin: float = DEFAULT_MARGIN
    dims: tuple[int, int, int] = field(init=False)

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)
        self.values = np.asarray(self.values)
        self.dims = self.values.shape

    def vertex_positions(self) -> np.ndarray:
        """World positions of all grid vertices, shape (nx*ny*nz, 3).

        Origins produced by build_sdf sit on the resolution lattice; computing
        each vertex as (lattice index) * resolution keeps positions, and hence
        stored distances, bit-identical across grids that share vertices.
        """
        nx, ny, nz = self.dims
        ix, iy, iz = np.meshgrid(
            np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij"
        )
        idx = np.column_stack([ix.ravel(), iy.ravel(), iz.ravel()])
        base = np.rint(self.origin / self.resolution)
        if np.abs(base * self.resolution - self.origin).max() <= 1e-9:
            return (base + idx) * self.resolution
        return self.origin + idx * self.resolution

    def query(self, points) -> np.ndarray:
        """Signed distance of the cell containing each point; outside is free.

        A 1e-9-cell snap keeps queries exactly on a vertex from flooring into
        the neighboring cell through floating-point dust.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        s = (points - self.origin) / self.resolution
        dims = np.array(self.dims)
        inside = np.all((s >= -1e-9) & (s <= dims - 1 + 1e-9), axis=1)
        idx = np.floor(s + 1e-9).astype(int)
        np.clip(idx, 0, dims - 1, out=idx)
        out = np.full(len(points), OUTSIDE_SENTINEL)
        if inside.any():
            ii = idx[inside]
            out[inside] = self.values[ii[:, 0], ii[:, 1], ii[:, 2]]
        return out

    def query_one(self, point) -> float:
        return float(self.query(np.asarray(point).reshape(1, 3))[0])

    def interpolate(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Smooth (C1) field value and spatial gradient at each point.

        Quadratic B-spline weights over the 27 surrounding vertices give the
        trajectory optimizer a continuously differentiable surrogate of the
        stored field; plain queries keep the nearest-cell convention. Outside
        the grid the field extends flat (clamped indices, gradient fades out).
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        s = (points - self.origin) / self.resolution
        dims = np.array(self.dims)
        center = np.rint(s).astype(int)
        np.clip(center, 0, dims - 1, out=center)
        t = np.clip(s - center, -0.5, 0.5)
        # per-axis quadratic B-spline weights on vertices center-1..center+1
        weights, dweights = [], []
        for axis in range(3):
            ta = t[:, axis]
            weights.append(
                np.stack(
                    [0.5 * (0.5 - ta) ** 2, 0.75 - ta**2, 0.5 * (0.5 + ta) ** 2],
                    axis=1,
                )
            )
            dweights.append(np.stack([ta - 0.5, -2.0 * ta, ta + 0.5], axis=1))
        idx = [
            np.clip(center[:, a, None] + np.array([-1, 0, 1]), 0, dims[a] - 1)
            for a in range(3)
        ]
        corner = self.values[
            idx[0][:, :, None, None], idx[1][:, None, :, None], idx[2][:, None, None, :]
        ]
        wx, wy, wz = weights
        dwx, dwy, dwz = dweights
        value = np.einsum("nijk,ni,nj,nk->n", corner, wx, wy, wz)
        grad = np.column_stack(
            [
                np.einsum("nijk,ni,nj,nk->n", corner, dwx, wy, wz),
                np.einsum("nijk,ni,nj,nk->n", corner, wx, dwy, wz),
                np.einsum("nijk,ni,nj,nk->n", corner, wx, wy, dwz),
            ]
        ) / self.resolution
        return value, grad

    def gradient(self, points) -> np.ndarray:
        """Central-difference spatial gradient with step = grid resolution."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        h = self.resolution
        grad = np.empty_like(points)
        for axis in range(3):
            step = np.zeros(3)
            step[axis] = h
            grad[:, axis] = (self.query(points + step) - self.query(points - step)) / (
                2.0 * h
            )
        return grad


def build_sdf(
    cloud: PointCloud,
    resolution: float = DEFAULT_RESOLUTION,
    margin: float = DEFAULT_MARGIN,
) -> SignedDistanceGrid:
    """Distance-to-nearest-scene-point grid over the cloud AABB plus margin.

    Nearest neighbors come from a k-d tree but the stored value is the exact
    Euclidean distance; the sign test projects each vertex into the source
    depth image when one is available.
    """
    if len(cloud) == 0:
        raise ValueError("cannot build a signed distance grid from an empty cloud")
    # snap the origin to the resolution lattice so that grids built with
    # different margins share bit-identical vertex positions
    lo = np.floor((cloud.points.min(axis=0) - margin) / resolution) * resolution
    hi = cloud.points.max(axis=0) + margin
    dims = np.ceil((hi - lo) / resolution).astype(int) + 1
    grid = SignedDistanceGrid(
        origin=lo, resolution=resolution, values=np.zeros(tuple(dims)), margin=margin
    )
    vertices = grid.vertex_positions()
    tree = cKDTree(cloud.points)
    _, nearest = tree.query(vertices, k=1)
    # recompute distances so stored values match a brute-force norm exactly
    dist = np.linalg.norm(vertices - cloud.points[nearest], axis=1)
    if cloud.source is not None:
        behind = _behind_surface(vertices, cloud.source)
        dist = np.where(behind, -dist, dist)
    grid.values = dist.reshape(tuple(dims))
    return grid


def _behind_surface(points: np.ndarray, depth: DepthImage) -> np.ndarray:
    """True where a base-frame point lies behind the observed depth surface."""
    cam = depth.extrinsics.inverse().apply(points)
    z = cam[:, 2]
    behind = np.zeros(len(points), dtype=bool)
    front = z > 0
    if not front.any():
        return behind
    u = np.rint(depth.fx * cam[front, 0] / z[front] + depth.cx).astype(int)
    v = np.rint(depth.fy * cam[front, 1] / z[front] + depth.cy).astype(int)
    in_image = (u >= 0) & (u < depth.width) & (v >= 0) & (v < depth.height)
    sub = np.zeros(front.sum(), dtype=bool)
    if in_image.any():
        du = depth.depth[v[in_image], u[in_image]]
        valid = np.isfinite(du) & (du > 0)
        deeper = np.zeros(in_image.sum(), dtype=bool)
        deeper[valid] = z[front][in_image][valid] > du[valid]
        sub[in_image] = deeper
    behind[front] = sub
    return behind


def query_sdf(grid: SignedDistanceGrid, p) -> float:
    return grid.query_one(p)


def collision_penalty(d, eps: float):
    """Hinge-smoothed proximity penalty: linear inside, quadratic within eps.

    Continuously differentiable at both break points; zero beyond the margin.
    """
    if eps <= 0:
        raise ValueError("margin eps must be positive")
    d = np.asarray(d, dtype=float)
    inside = -d + 0.5 * eps
    near = (d - eps) ** 2 / (2.0 * eps)
    out = np.where(d < 0, inside, np.where(d <= eps, near, 0.0))
    return float(out) if out.ndim == 0 else out


def collision_penalty_derivative(d, eps: float):
    """d(penalty)/dd for the piecewise penalty above."""
    d = np.asarray(d, dtype=float)
    out = np.where(d < 0, -1.0, np.where(d <= eps, (d - eps) / eps, 0.0))
    return float(out) if out.ndim == 0 else out


def count_negative_points(grid: SignedDistanceGrid, points_world: np.ndarray) -> int:
    return int(np.count_nonzero(grid.query(points_world) < 0))


def check_trajectory_collision(
    grid: SignedDistanceGrid,
    chain: KinematicChain,
    pts: SurfacePointSet,
    traj,
) -> tuple[bool, int]:
    """Collision verdict over a trajectory's configurations.

    A configuration collides when at least COLLISION_POINT_THRESHOLD surface
    points have negative signed distance. Returns (in_collision, worst count).
    ``traj`` may be a TrajectoryPlan or a (T, n) array of positions.
    """
    positions = getattr(traj, "positions", traj)
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    worst = 0
    for q in positions:
        world = transform_points(chain, q, pts, fk=fk_full(chain, q))
        worst = max(worst, count_negative_points(grid, world))
    return worst >= COLLISION_POINT_THRESHOLD, worst


# ---------------------------------------------------------------------------
# file formats


def load_xyz(path) -> PointCloud:
    """ASCII cloud, one "x y z" triple per line."""
    rows = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileFormatError(f"cannot read cloud file {path}: {exc}") from exc
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if len(parts) < 3:
            raise FileFormatError(f"bad XYZ line in {path}: {line!r}")
        try:
            rows.append([float(parts[0]), float(parts[1]), float(parts[2])])
        except ValueError as exc:
            raise FileFormatError(f"bad XYZ line in {path}: {line!r}") from exc
    return PointCloud(np.array(rows, dtype=float).reshape(-1, 3))


def save_xyz(cloud: PointCloud, path) -> None:
    with open(path, "w") as fh:
        for p in cloud.points:
            fh.write(f"{float(p[0])!r} {float(p[1])!r} {float(p[2])!r}\n")


def load_ply(path) -> PointCloud:
    """ASCII PLY vertex elements; only x/y/z properties are used."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise FileFormatError(f"cannot read PLY file {path}: {exc}") from exc
    if not lines or lines[0].strip() != "ply":
        raise FileFormatError(f"{path} is not a PLY file")
    n_vertices = None
    properties = []
    in_vertex_element = False
    body_start = None
    for i, line in enumerate(lines[1:], start=1):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "format" and parts[1] != "ascii":
            raise FileFormatError(f"{path}: only ASCII PLY is supported")
        if parts[0] == "element":
            in_vertex_element = parts[1] == "vertex"
            if in_vertex_element:
                n_vertices = int(parts[2])
        elif parts[0] == "property" and in_vertex_element:
            properties.append(parts[-1])
        elif parts[0] == "end_header":
            body_start = i + 1
            break
    if n_vertices is None or body_start is None:
        raise FileFormatError(f"{path}: missing vertex element or end_header")
    try:
        xi, yi, zi = properties.index("x"), properties.index("y"), properties.index("z")
    except ValueError:
        raise FileFormatError(f"{path}: vertex element lacks x/y/z properties") from None
    rows = []
    for line in lines[body_start : body_start + n_vertices]:
        parts = line.split()
        rows.append([float(parts[xi]), float(parts[yi]), float(parts[zi])])
    if len(rows) != n_vertices:
        raise FileFormatError(f"{path}: expected {n_vertices} vertices, got {len(rows)}")
    return PointCloud(np.array(rows, dtype=float).reshape(-1, 3))


def load_cloud(path) -> PointCloud:
    path = Path(path)
    if path.suffix.lower() == ".ply":
        return load_ply(path)
    return load_xyz(path)


def load_pgm_depth(depth_path, camera_path) -> DepthImage:
    """16-bit PGM depth (millimeters; 0 = invalid) plus a camera sidecar.

    The sidecar holds "fx fy cx cy" followed by the 12 row-major entries of
    the 3x4 camera-to-base extrinsic matrix.
    """
    depth_m = _read_pgm(depth_path) / 1000.0
    depth_m[depth_m == 0] = np.nan
    try:
        numbers = [float(v) for v in Path(camera_path).read_text().split()]
    except OSError as exc:
        raise FileFormatError(f"cannot read camera file {camera_path}: {exc}") from exc
    if len(numbers) != 16:
        raise FileFormatError(
            f"camera file {camera_path} must hold fx fy cx cy + 12 extrinsic entries"
        )
    fx, fy, cx, cy = numbers[:4]
    ext = np.array(numbers[4:]).reshape(3, 4)
    return DepthImage(
        depth=depth_m,
        fx=fx,
        fy=fy,
        cx=cx,
        cy=cy,
        extrinsics=RigidTransform(ext[:, :3], ext[:, 3]),
    )


def _read_pgm(path) -> np.ndarray:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise FileFormatError(f"cannot read PGM file {path}: {exc}") from exc
    tokens = []
    pos = 0
    while len(tokens) < 4:
        # header tokens with '#' comments skipped
        end = pos
        while end < len(raw) and not raw[end : end + 1].isspace():
            end += 1
        tok = raw[pos:end]
        if tok.startswith(b"#"):
            nl = raw.find(b"\n", pos)
            pos = nl + 1
            continue
        if tok:
            tokens.append(tok)
        pos = end + 1
    magic = tokens[0]
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic == b"P5":
        count = width * height
        if maxval > 255:
            data = np.frombuffer(raw, dtype=">u2", count=count, offset=pos)
        else:
            data = np.frombuffer(raw, dtype=np.uint8, count=count, offset=pos)
        return data.reshape(height, width).astype(float)
    if magic == b"P2":
        values = raw[pos:].split()
        if len(values) < width * height:
            raise FileFormatError(f"{path}: truncated PGM data")
        return np.array(values[: width * height], dtype=float).reshape(height, width)
    raise FileFormatError(f"{path}: unsupported PGM magic {magic!r}")


def save_sdf(grid: SignedDistanceGrid, path) -> None:
    """Text header "ox oy oz resolution nx ny nz" + little-endian float32 values."""
    nx, ny, nz = grid.dims
    header = (
        f"{float(grid.origin[0])!r} {float(grid.origin[1])!r} {float(grid.origin[2])!r} "
        f"{float(grid.resolution)!r} {nx} {ny} {nz}\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.asarray(grid.values, dtype="<f4").tobytes(order="C"))


def load_sdf(path) -> SignedDistanceGrid:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise FileFormatError(f"cannot read SDF file {path}: {exc}") from exc
    nl = raw.find(b"\n")
    if nl < 0:
        raise FileFormatError(f"{path}: missing SDF header line")
    parts = raw[:nl].split()
    if len(parts) != 7:
        raise FileFormatError(f"{path}: SDF header must hold 7 fields")
    origin = np.array([float(parts[0]), float(parts[1]), float(parts[2])])
    resolution = float(parts[3])
    nx, ny, nz = int(parts[4]), int(parts[5]), int(parts[6])
    expected = nx * ny * nz
    if len(raw) - (nl + 1) < 4 * expected:
        raise FileFormatError(f"{path}: truncated SDF payload")
    values = np.frombuffer(raw, dtype="<f4", count=expected, offset=nl + 1)
    return SignedDistanceGrid(
        origin=origin,
        resolution=resolution,
        values=values.astype(float).reshape(nx, ny, nz),
    )

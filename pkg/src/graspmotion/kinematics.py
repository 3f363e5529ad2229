"""URDF-subset kinematic chains: parsing, forward kinematics, point Jacobians.

Supported joint kinds are revolute, continuous, prismatic, and fixed; the
parser keeps the link tree rooted at ``base_link`` and records per-link mesh
filenames from ``<visual>``/``<collision>`` elements. Inertial, transmission,
and primitive-geometry tags are ignored.
"""

from __future__ import annotations

import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import UrdfError
from .transforms import RigidTransform, rotation_about_axis

logger = logging.getLogger(__name__)

SUPPORTED_JOINT_KINDS = ("revolute", "continuous", "prismatic", "fixed")

# Finite optimizer bounds for joints the URDF leaves unbounded: one full turn
# in each direction for angular joints.
CONTINUOUS_LIMITS = (-2.0 * np.pi, 2.0 * np.pi)
DEFAULT_VELOCITY_LIMIT = np.pi


@dataclass
class JointSpec:
    """One URDF joint: geometry, kind, and bounds."""

    name: str
    kind: str
    parent: str
    child: str
    axis: np.ndarray
    origin: RigidTransform
    limits: Optional[tuple[float, float]]
    velocity_limit: float

    @property
    def actuated(self) -> bool:
        return self.kind != "fixed"


@dataclass
class KinematicChain:
    """Link tree rooted at ``base_link`` with an actuated-joint index map.

    Immutable after parsing; forward kinematics and Jacobians are pure
    functions of the chain and a configuration.
    """

    links: list[str]
    joints: list[JointSpec]
    base_link: str
    tool_link: str
    mesh_files: dict[str, Optional[str]]
    mesh_root: Optional[Path] = None
    # derived fields, filled in __post_init__
    dof: int = field(init=False)
    joint_names: list[str] = field(init=False)
    lower: np.ndarray = field(init=False)
    upper: np.ndarray = field(init=False)
    velocity_limits: np.ndarray = field(init=False)

    def __post_init__(self):
        actuated = [j for j in self.joints if j.actuated]
        self.dof = len(actuated)
        self.joint_names = [j.name for j in actuated]
        self.lower = np.array([j.limits[0] for j in actuated], dtype=float)
        self.upper = np.array([j.limits[1] for j in actuated], dtype=float)
        self.velocity_limits = np.array([j.velocity_limit for j in actuated], dtype=float)
        self._link_index = {name: i for i, name in enumerate(self.links)}
        self._joint_by_child = {j.child: j for j in self.joints}
        qi = 0
        self._q_index = {}
        for j in self.joints:
            if j.actuated:
                self._q_index[j.name] = qi
                qi += 1
        # ancestor_mask[l, k] is True when actuated joint k moves link l
        mask = np.zeros((len(self.links), self.dof), dtype=bool)
        for li, link in enumerate(self.links):
            node = link
            while node != self.base_link:
                j = self._joint_by_child[node]
                if j.actuated:
                    mask[li, self._q_index[j.name]] = True
                node = j.parent
        self.ancestor_mask = mask

    def link_index(self, name: str) -> int:
        try:
            return self._link_index[name]
        except KeyError:
            raise UrdfError(f"unknown link {name!r}") from None

    def midrange_config(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def clamp_config(self, q: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(q, dtype=float), self.lower, self.upper)

    def resolve_mesh_path(self, link: str) -> Optional[Path]:
        fname = self.mesh_files.get(link)
        if fname is None:
            return None
        p = Path(fname)
        if not p.is_absolute() and self.mesh_root is not None:
            p = self.mesh_root / p
        return p


def _parse_origin(elem) -> RigidTransform:
    if elem is None:
        return RigidTransform.identity()
    xyz = [float(v) for v in elem.get("xyz", "0 0 0").split()]
    rpy = [float(v) for v in elem.get("rpy", "0 0 0").split()]
    return RigidTransform.from_rpy(xyz, rpy)


def parse_urdf(text: str, base_link: str, tool_link: str) -> KinematicChain:
    """Parse a URDF string into the kinematic tree rooted at ``base_link``.

    Raises UrdfError on malformed XML, unsupported joint kinds, or when
    ``tool_link`` is not connected to ``base_link``.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise UrdfError(f"malformed URDF XML: {exc}") from exc

    link_elems = root.findall("link")
    all_links = [e.get("name") for e in link_elems]
    if base_link not in all_links:
        raise UrdfError(f"base link {base_link!r} not present in URDF")
    if tool_link not in all_links:
        raise UrdfError(f"tool link {tool_link!r} not present in URDF")

    mesh_files: dict[str, Optional[str]] = {}
    for e in link_elems:
        fname = None
        for tag in ("visual", "collision"):
            mesh = e.find(f"{tag}/geometry/mesh")
            if mesh is not None and mesh.get("filename"):
                fname = mesh.get("filename")
                break
        mesh_files[e.get("name")] = fname

    joints: list[JointSpec] = []
    for je in root.findall("joint"):
        kind = je.get("type")
        name = je.get("name", "<unnamed>")
        if kind not in SUPPORTED_JOINT_KINDS:
            raise UrdfError(f"unsupported joint kind {kind!r} on joint {name!r}")
        parent = je.find("parent")
        child = je.find("child")
        if parent is None or child is None:
            raise UrdfError(f"joint {name!r} is missing parent or child")
        axis = np.array([0.0, 0.0, 1.0])
        axis_elem = je.find("axis")
        if axis_elem is not None:
            axis = np.array([float(v) for v in axis_elem.get("xyz", "1 0 0").split()])
        norm = np.linalg.norm(axis)
        if norm < 1e-12:
            raise UrdfError(f"joint {name!r} has a zero axis")
        axis = axis / norm

        limits = None
        velocity = DEFAULT_VELOCITY_LIMIT
        limit_elem = je.find("limit")
        if limit_elem is not None:
            if limit_elem.get("lower") is not None or limit_elem.get("upper") is not None:
                limits = (
                    float(limit_elem.get("lower", "0")),
                    float(limit_elem.get("upper", "0")),
                )
            if limit_elem.get("velocity") is not None:
                velocity = abs(float(limit_elem.get("velocity")))
        if kind in ("revolute", "prismatic"):
            if limits is None:
                logger.warning("joint %s has no position limits; using defaults", name)
                limits = CONTINUOUS_LIMITS
        elif kind == "continuous":
            limits = CONTINUOUS_LIMITS
        if limits is not None and limits[0] > limits[1]:
            raise UrdfError(f"joint {name!r} has lower limit above upper limit")

        joints.append(
            JointSpec(
                name=name,
                kind=kind,
                parent=parent.get("link"),
                child=child.get("link"),
                axis=axis,
                origin=_parse_origin(je.find("origin")),
                limits=limits,
                velocity_limit=velocity,
            )
        )

    # keep only the subtree reachable from base_link, in breadth-first order
    children: dict[str, list[JointSpec]] = {}
    for j in joints:
        children.setdefault(j.parent, []).append(j)
    ordered_links = [base_link]
    ordered_joints: list[JointSpec] = []
    seen = {base_link}
    frontier = [base_link]
    while frontier:
        node = frontier.pop(0)
        for j in children.get(node, []):
            if j.child in seen:
                raise UrdfError(f"link {j.child!r} has multiple parent joints")
            seen.add(j.child)
            ordered_links.append(j.child)
            ordered_joints.append(j)
            frontier.append(j.child)
    if tool_link not in seen:
        raise UrdfError(
            f"tool link {tool_link!r} is not connected to base link {base_link!r}"
        )

    return KinematicChain(
        links=ordered_links,
        joints=ordered_joints,
        base_link=base_link,
        tool_link=tool_link,
        mesh_files={name: mesh_files.get(name) for name in ordered_links},
    )


def load_urdf(path, base_link: str, tool_link: str) -> KinematicChain:
    """Parse a URDF file; relative mesh paths resolve against its directory."""
    path = Path(path)
    chain = parse_urdf(path.read_text(), base_link, tool_link)
    chain.mesh_root = path.parent
    return chain


def infer_base_and_tool(text: str) -> tuple[str, str]:
    """Root link and unique leaf of a URDF; raises if the leaf is ambiguous."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise UrdfError(f"malformed URDF XML: {exc}") from exc
    links = [e.get("name") for e in root.findall("link")]
    parents = {je.find("parent").get("link") for je in root.findall("joint")}
    child_links = {je.find("child").get("link") for je in root.findall("joint")}
    roots = [l for l in links if l not in child_links]
    leaves = [l for l in links if l not in parents]
    if len(roots) != 1:
        raise UrdfError(f"cannot infer base link; candidates: {roots}")
    if len(leaves) != 1:
        raise UrdfError(
            f"cannot infer tool link; candidates: {leaves}; pass --tool-link"
        )
    return roots[0], leaves[0]


class FkResult:
    """Poses plus per-joint world axes/origins from one FK evaluation."""

    __slots__ = ("chain", "rotations", "translations", "joint_axes", "joint_origins")

    def __init__(self, chain, rotations, translations, joint_axes, joint_origins):
        self.chain = chain
        self.rotations = rotations          # (L, 3, 3)
        self.translations = translations    # (L, 3)
        self.joint_axes = joint_axes        # (dof, 3) world frame
        self.joint_origins = joint_origins  # (dof, 3) world frame

    def pose(self, link: str) -> RigidTransform:
        i = self.chain.link_index(link)
        return RigidTransform(self.rotations[i].copy(), self.translations[i].copy())

    def tool_pose(self) -> RigidTransform:
        return self.pose(self.chain.tool_link)


def _joint_motion(joint: JointSpec, value: float) -> RigidTransform:
    if joint.kind in ("revolute", "continuous"):
        return RigidTransform(rotation_about_axis(joint.axis, value))
    if joint.kind == "prismatic":
        return RigidTransform(translation=joint.axis * value)
    return RigidTransform.identity()


def fk_full(chain: KinematicChain, q) -> FkResult:
    """Forward kinematics over the whole tree."""
    q = np.asarray(q, dtype=float)
    if q.shape != (chain.dof,):
        raise ValueError(f"expected configuration of length {chain.dof}, got {q.shape}")
    n_links = len(chain.links)
    rotations = np.empty((n_links, 3, 3))
    translations = np.empty((n_links, 3))
    rotations[0] = np.eye(3)
    translations[0] = 0.0
    joint_axes = np.zeros((chain.dof, 3))
    joint_origins = np.zeros((chain.dof, 3))
    for j in chain.joints:
        pi = chain.link_index(j.parent)
        ci = chain.link_index(j.child)
        r_parent, t_parent = rotations[pi], translations[pi]
        # joint frame in base coordinates
        r_joint = r_parent @ j.origin.rotation
        t_joint = r_parent @ j.origin.translation + t_parent
        if j.actuated:
            k = chain._q_index[j.name]
            joint_axes[k] = r_joint @ j.axis
            joint_origins[k] = t_joint
            motion = _joint_motion(j, q[k])
            rotations[ci] = r_joint @ motion.rotation
            translations[ci] = r_joint @ motion.translation + t_joint
        else:
            rotations[ci] = r_joint
            translations[ci] = t_joint
    return FkResult(chain, rotations, translations, joint_axes, joint_origins)


def forward_kinematics(chain: KinematicChain, q) -> dict[str, RigidTransform]:
    """Base-frame pose of every link; the tool_link entry is the gripper pose."""
    fk = fk_full(chain, q)
    return {name: fk.pose(name) for name in chain.links}


def _prismatic_mask(chain: KinematicChain) -> np.ndarray:
    return np.array(
        [j.kind == "prismatic" for j in chain.joints if j.actuated], dtype=bool
    )


def point_jacobian(
    chain: KinematicChain, q, link: str, p_local, fk: Optional[FkResult] = None
) -> np.ndarray:
    """d(world position of p_local on link) / dq, shape (3, dof)."""
    if fk is None:
        fk = fk_full(chain, q)
    li = chain.link_index(link)
    p_world = fk.rotations[li] @ np.asarray(p_local, dtype=float) + fk.translations[li]
    jac = np.zeros((3, chain.dof))
    prismatic = _prismatic_mask(chain)
    for k in range(chain.dof):
        if not chain.ancestor_mask[li, k]:
            continue
        if prismatic[k]:
            jac[:, k] = fk.joint_axes[k]
        else:
            jac[:, k] = np.cross(fk.joint_axes[k], p_world - fk.joint_origins[k])
    return jac


def points_jacobian_batch(
    chain: KinematicChain, fk: FkResult, points_world: np.ndarray, link_indices: np.ndarray
) -> np.ndarray:
    """Stacked point Jacobians, shape (N, 3, dof).

    points_world are base-frame positions; link_indices[i] is the index of the
    link point i is attached to.
    """
    n_pts = points_world.shape[0]
    jac = np.zeros((n_pts, 3, chain.dof))
    prismatic = _prismatic_mask(chain)
    mask = chain.ancestor_mask[link_indices]  # (N, dof)
    for k in range(chain.dof):
        rows = mask[:, k]
        if not rows.any():
            continue
        if prismatic[k]:
            jac[rows, :, k] = fk.joint_axes[k]
        else:
            jac[rows, :, k] = np.cross(
                fk.joint_axes[k], points_world[rows] - fk.joint_origins[k]
            )
    return jac


def angular_jacobian(chain: KinematicChain, fk: FkResult, link: str) -> np.ndarray:
    """d(world angular velocity of link) / dq_dot, shape (3, dof)."""
    li = chain.link_index(link)
    jac = np.zeros((3, chain.dof))
    prismatic = _prismatic_mask(chain)
    for k in range(chain.dof):
        if chain.ancestor_mask[li, k] and not prismatic[k]:
            jac[:, k] = fk.joint_axes[k]
    return jac


class BatchFk:
    """Forward kinematics evaluated for a whole batch of configurations."""

    __slots__ = ("chain", "rotations", "translations", "joint_axes", "joint_origins")

    def __init__(self, chain, rotations, translations, joint_axes, joint_origins):
        self.chain = chain
        self.rotations = rotations          # (T, L, 3, 3)
        self.translations = translations    # (T, L, 3)
        self.joint_axes = joint_axes        # (T, dof, 3)
        self.joint_origins = joint_origins  # (T, dof, 3)

    def step(self, t: int) -> FkResult:
        return FkResult(
            self.chain,
            self.rotations[t],
            self.translations[t],
            self.joint_axes[t],
            self.joint_origins[t],
        )

    def world_points(self, local_points: np.ndarray, link_indices: np.ndarray) -> np.ndarray:
        """All surface points at every configuration, shape (T, M, 3)."""
        rot = self.rotations[:, link_indices]        # (T, M, 3, 3)
        tra = self.translations[:, link_indices]     # (T, M, 3)
        return np.einsum("tmij,mj->tmi", rot, local_points) + tra


def fk_batch(chain: KinematicChain, q_all) -> BatchFk:
    """Vectorized forward kinematics over a (T, dof) batch of configurations."""
    q_all = np.atleast_2d(np.asarray(q_all, dtype=float))
    if q_all.shape[1] != chain.dof:
        raise ValueError(f"expected configurations of width {chain.dof}")
    steps = q_all.shape[0]
    n_links = len(chain.links)
    rotations = np.empty((steps, n_links, 3, 3))
    translations = np.empty((steps, n_links, 3))
    rotations[:, 0] = np.eye(3)
    translations[:, 0] = 0.0
    joint_axes = np.zeros((steps, chain.dof, 3))
    joint_origins = np.zeros((steps, chain.dof, 3))
    eye = np.eye(3)
    for j in chain.joints:
        pi = chain.link_index(j.parent)
        ci = chain.link_index(j.child)
        r_parent = rotations[:, pi]
        r_joint = r_parent @ j.origin.rotation
        t_joint = r_parent @ j.origin.translation + translations[:, pi]
        if j.actuated:
            k = chain._q_index[j.name]
            axis_world = r_joint @ j.axis
            joint_axes[:, k] = axis_world
            joint_origins[:, k] = t_joint
            theta = q_all[:, k]
            if j.kind == "prismatic":
                rotations[:, ci] = r_joint
                translations[:, ci] = t_joint + axis_world * theta[:, None]
            else:
                skew = _skew_matrix(j.axis)
                skew2 = skew @ skew
                motion = (
                    eye
                    + np.sin(theta)[:, None, None] * skew
                    + (1.0 - np.cos(theta))[:, None, None] * skew2
                )
                rotations[:, ci] = r_joint @ motion
                translations[:, ci] = t_joint
        else:
            rotations[:, ci] = r_joint
            translations[:, ci] = t_joint
    return BatchFk(chain, rotations, translations, joint_axes, joint_origins)


def _skew_matrix(v) -> np.ndarray:
    return np.array(
        [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]]
    )

"""Shared test utilities: tiny URDFs, mesh writers, and independent oracles."""

from __future__ import annotations

import numpy as np

PLANAR_2R_URDF = """
<robot name="planar2r">
  <link name="base"/>
  <link name="link1"/>
  <link name="link2"/>
  <link name="tool"/>
  <joint name="j1" type="revolute">
    <parent link="base"/><child link="link1"/>
    <axis xyz="0 0 1"/>
    <limit lower="-3.1415" upper="3.1415" velocity="2.0"/>
  </joint>
  <joint name="j2" type="revolute">
    <parent link="link1"/><child link="link2"/>
    <origin xyz="1 0 0"/>
    <axis xyz="0 0 1"/>
    <limit lower="-3.1415" upper="3.1415" velocity="2.0"/>
  </joint>
  <joint name="tool_mount" type="fixed">
    <parent link="link2"/><child link="tool"/>
    <origin xyz="1 0 0"/>
  </joint>
</robot>
"""


def write_obj(path, vertices) -> None:
    lines = [f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}" for v in np.asarray(vertices, float)]
    path.write_text("\n".join(lines) + "\n")


def cube_vertices(center=(0.0, 0.0, 0.0), half=0.5) -> np.ndarray:
    corners = np.array(
        [
            [sx, sy, sz]
            for sx in (-half, half)
            for sy in (-half, half)
            for sz in (-half, half)
        ]
    )
    return corners + np.asarray(center, float)


def fibonacci_sphere(count: int) -> np.ndarray:
    """Unit-radius point set (every point normalized exactly)."""
    i = np.arange(count)
    phi = np.pi * (3.0 - np.sqrt(5.0)) * i
    z = 1.0 - 2.0 * (i + 0.5) / count
    r = np.sqrt(1.0 - z * z)
    pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# random serial chains with an independent forward-kinematics oracle


def random_serial_chain(rng, n_joints: int = 7, with_fixed: bool = True):
    """URDF text plus the raw joint records it was generated from."""
    joints = []
    for i in range(n_joints):
        kind = "prismatic" if rng.random() < 0.2 else "revolute"
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        joints.append(
            {
                "kind": kind,
                "axis": axis,
                "xyz": rng.uniform(-0.3, 0.3, size=3),
                "rpy": rng.uniform(-1.0, 1.0, size=3),
                "lower": -2.5,
                "upper": 2.5,
            }
        )
    if with_fixed:
        joints.insert(
            max(1, n_joints // 2),
            {
                "kind": "fixed",
                "axis": np.array([0.0, 0.0, 1.0]),
                "xyz": rng.uniform(-0.2, 0.2, size=3),
                "rpy": rng.uniform(-1.0, 1.0, size=3),
            },
        )
    parts = ['<robot name="random_chain">', '  <link name="link0"/>']
    for i, j in enumerate(joints, start=1):
        parts.append(f'  <link name="link{i}"/>')
        parts.append(f'  <joint name="joint{i}" type="{j["kind"]}">')
        parts.append(f'    <parent link="link{i - 1}"/><child link="link{i}"/>')
        xyz = " ".join(repr(float(v)) for v in j["xyz"])
        rpy = " ".join(repr(float(v)) for v in j["rpy"])
        parts.append(f'    <origin xyz="{xyz}" rpy="{rpy}"/>')
        if j["kind"] != "fixed":
            axis = " ".join(repr(float(v)) for v in j["axis"])
            parts.append(f'    <axis xyz="{axis}"/>')
            parts.append(
                f'    <limit lower="{j["lower"]}" upper="{j["upper"]}" velocity="2.0"/>'
            )
        parts.append("  </joint>")
    parts.append("</robot>")
    return "\n".join(parts), joints, f"link{len(joints)}"


def _rpy_matrix(rpy):
    r, p, y = rpy
    cr, sr = np.cos(r), np.sin(r)
    cp, sp = np.cos(p), np.sin(p)
    cy, sy = np.cos(y), np.sin(y)
    rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    return rz @ ry @ rx


def _axis_angle_matrix(axis, angle):
    x, y, z = axis
    c, s = np.cos(angle), np.sin(angle)
    k = np.array([[0, -z, y], [z, 0, -x], [-y, x, 0]])
    return np.eye(3) + s * k + (1 - c) * (k @ k)


def oracle_fk(joints, q) -> np.ndarray:
    """Straightforward 4x4 composition along the serial chain."""
    t = np.eye(4)
    qi = 0
    for j in joints:
        step = np.eye(4)
        step[:3, :3] = _rpy_matrix(j["rpy"])
        step[:3, 3] = j["xyz"]
        t = t @ step
        if j["kind"] == "revolute":
            motion = np.eye(4)
            motion[:3, :3] = _axis_angle_matrix(j["axis"], q[qi])
            t = t @ motion
            qi += 1
        elif j["kind"] == "prismatic":
            motion = np.eye(4)
            motion[:3, 3] = j["axis"] * q[qi]
            t = t @ motion
            qi += 1
    return t


def numeric_point_jacobian(chain, q, link, p_local, step=1e-6) -> np.ndarray:
    """Central finite differences of the world position through FK."""
    from graspmotion.kinematics import fk_full

    q = np.asarray(q, dtype=float)
    jac = np.zeros((3, chain.dof))
    for k in range(chain.dof):
        dq = np.zeros_like(q)
        dq[k] = step
        fp = fk_full(chain, q + dq).pose(link).apply(p_local)
        fm = fk_full(chain, q - dq).pose(link).apply(p_local)
        jac[:, k] = (fp - fm) / (2 * step)
    return jac

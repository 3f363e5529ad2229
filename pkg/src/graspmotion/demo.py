"""Self-contained 7-DOF demo arm with box meshes, for tests and quick starts.

Writes a URDF plus OBJ meshes into a directory. The arm has alternating
z/y revolute axes, about 0.86 m of reach from the shoulder, and a two-finger
gripper whose frame origin sits at the grasp center with +z as the approach
axis. Scene goals from ``scenegen`` are placed inside its workspace.

Run ``python -m graspmotion.demo OUTDIR`` to generate the files.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

BASE_LINK = "base"
TOOL_LINK = "gripper"
READY_CONFIG = [0.0, 0.6, 0.0, 1.2, 0.0, 0.9, 0.0]


def box_vertices(center, size, divisions: int = 2) -> np.ndarray:
    """Grid of points on the surface of an axis-aligned box."""
    center = np.asarray(center, dtype=float)
    size = np.asarray(size, dtype=float)
    ticks = [np.linspace(-s / 2, s / 2, divisions + 1) for s in size]
    pts = []
    gx, gy, gz = np.meshgrid(*ticks, indexing="ij")
    on_face = (
        (np.abs(gx) == size[0] / 2)
        | (np.abs(gy) == size[1] / 2)
        | (np.abs(gz) == size[2] / 2)
    )
    pts = np.column_stack([gx[on_face], gy[on_face], gz[on_face]])
    return pts + center


def write_obj(path, vertices: np.ndarray) -> None:
    lines = [f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}" for v in vertices]
    Path(path).write_text("\n".join(lines) + "\n")


_ARM = [
    # (joint axis, joint z-offset in parent frame, link mesh center, link mesh size, lower, upper)
    ("z", 0.10, (0, 0, 0.05), (0.09, 0.09, 0.10), -2.9, 2.9),
    ("y", 0.10, (0, 0, 0.175), (0.08, 0.08, 0.35), -1.9, 1.9),
    ("z", 0.35, (0, 0, 0.01), (0.07, 0.07, 0.02), -2.9, 2.9),
    ("y", 0.02, (0, 0, 0.175), (0.07, 0.07, 0.35), -2.1, 2.1),
    ("z", 0.35, (0, 0, 0.01), (0.06, 0.06, 0.02), -2.9, 2.9),
    ("y", 0.02, (0, 0, 0.05), (0.06, 0.06, 0.10), -2.1, 2.1),
    ("z", 0.10, None, None, -3.0, 3.0),  # wrist roll onto the gripper
]
_AXES = {"z": "0 0 1", "y": "0 1 0"}
VELOCITY_LIMIT = 1.5


def gripper_vertices() -> np.ndarray:
    """Palm, two fingers, and a side nub; the frame origin is the grasp center.

    The nub breaks the 180-degree symmetry of the finger pair so that point
    matching distinguishes a grasp from its flipped twin.
    """
    palm = box_vertices((0.0, 0.0, -0.08), (0.05, 0.12, 0.04), divisions=2)
    finger_l = box_vertices((0.0, 0.05, -0.03), (0.02, 0.012, 0.06), divisions=2)
    finger_r = box_vertices((0.0, -0.05, -0.03), (0.02, 0.012, 0.06), divisions=2)
    nub = box_vertices((0.035, 0.045, -0.08), (0.02, 0.02, 0.03), divisions=1)
    return np.concatenate([palm, finger_l, finger_r, nub], axis=0)


def write_demo_robot(directory) -> dict:
    """Write URDF + meshes; returns paths and the suggested start configuration."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    mesh_dir = directory / "meshes"
    mesh_dir.mkdir(exist_ok=True)

    write_obj(mesh_dir / "base.obj", box_vertices((0, 0, 0.05), (0.12, 0.12, 0.10)))
    parts = [
        '<robot name="demo_arm">',
        '  <link name="base">',
        '    <visual><geometry><mesh filename="meshes/base.obj"/></geometry></visual>',
        "  </link>",
    ]
    parent = "base"
    for i, (axis, offset, mesh_center, mesh_size, lo, hi) in enumerate(_ARM, start=1):
        child = TOOL_LINK if i == len(_ARM) else f"link{i}"
        if child == TOOL_LINK:
            write_obj(mesh_dir / "gripper.obj", gripper_vertices())
            mesh_name = "gripper.obj"
            # the gripper frame origin (grasp center) sits 0.12 m past the wrist
            origin = f'<origin xyz="0 0 {offset + 0.12}"/>'
        else:
            write_obj(
                mesh_dir / f"link{i}.obj", box_vertices(mesh_center, mesh_size)
            )
            mesh_name = f"link{i}.obj"
            origin = f'<origin xyz="0 0 {offset}"/>'
        parts += [
            f'  <link name="{child}">',
            f'    <visual><geometry><mesh filename="meshes/{mesh_name}"/></geometry></visual>',
            "  </link>",
            f'  <joint name="joint{i}" type="revolute">',
            f'    <parent link="{parent}"/>',
            f'    <child link="{child}"/>',
            f"    {origin}",
            f'    <axis xyz="{_AXES[axis]}"/>',
            f'    <limit lower="{lo}" upper="{hi}" velocity="{VELOCITY_LIMIT}"/>',
            "  </joint>",
        ]
        parent = child
    parts.append("</robot>")

    urdf_path = directory / "demo_arm.urdf"
    urdf_path.write_text("\n".join(parts) + "\n")
    q0_path = directory / "q0.txt"
    q0_path.write_text(" ".join(str(v) for v in READY_CONFIG) + "\n")
    return {
        "urdf": str(urdf_path),
        "q0_file": str(q0_path),
        "base_link": BASE_LINK,
        "tool_link": TOOL_LINK,
        "q0": list(READY_CONFIG),
    }


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    out = argv[0] if argv else "demo_robot"
    info = write_demo_robot(out)
    print(f"wrote {info['urdf']}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Vertex-only mesh readers: ASCII OBJ (``v`` lines) and ASCII STL.

Faces are ignored everywhere; duplicate vertices (common in STL, where each
facet repeats its corners) are removed so vertex counts reflect distinct
surface points.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import MeshError


def load_mesh_vertices(path) -> np.ndarray:
    """Distinct vertices of an OBJ or ASCII-STL file, shape (V, 3)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MeshError(f"cannot read mesh file {path}: {exc}") from exc

    suffix = path.suffix.lower()
    if suffix == ".obj":
        vertices = _parse_obj(text, path)
    elif suffix == ".stl":
        vertices = _parse_stl(text, path)
    else:
        # sniff: STL files start with "solid"
        if text.lstrip().lower().startswith("solid"):
            vertices = _parse_stl(text, path)
        else:
            vertices = _parse_obj(text, path)
    if vertices.size == 0:
        raise MeshError(f"mesh file {path} contains no vertices")
    return _dedupe(vertices)


def _parse_obj(text: str, path: Path) -> np.ndarray:
    rows = []
    for line in text.splitlines():
        parts = line.split()
        if len(parts) >= 4 and parts[0] == "v":
            try:
                rows.append([float(parts[1]), float(parts[2]), float(parts[3])])
            except ValueError as exc:
                raise MeshError(f"bad vertex line in {path}: {line!r}") from exc
    return np.array(rows, dtype=float).reshape(-1, 3)


def _parse_stl(text: str, path: Path) -> np.ndarray:
    rows = []
    for line in text.splitlines():
        parts = line.split()
        if len(parts) == 4 and parts[0] == "vertex":
            try:
                rows.append([float(parts[1]), float(parts[2]), float(parts[3])])
            except ValueError as exc:
                raise MeshError(f"bad vertex line in {path}: {line!r}") from exc
    return np.array(rows, dtype=float).reshape(-1, 3)


def _dedupe(vertices: np.ndarray) -> np.ndarray:
    """Remove exact duplicates, keeping first occurrences in file order."""
    _, idx = np.unique(vertices, axis=0, return_index=True)
    return vertices[np.sort(idx)]

import numpy as np
import pytest

from graspmotion.errors import MeshError
from graspmotion.kinematics import forward_kinematics, parse_urdf
from graspmotion.meshes import load_mesh_vertices
from graspmotion.robot_model import (
    GripperPointSet,
    farthest_point_sample,
    gripper_points_from_chain,
    sample_surface_points,
    transform_points,
)

from helpers import PLANAR_2R_URDF, cube_vertices, fibonacci_sphere, write_obj

MESHED_2R = PLANAR_2R_URDF.replace(
    '<link name="base"/>',
    '<link name="base"><visual><geometry><mesh filename="base.obj"/></geometry></visual></link>',
).replace(
    '<link name="tool"/>',
    '<link name="tool"><visual><geometry><mesh filename="tool.obj"/></geometry></visual></link>',
)


@pytest.fixture
def meshed_2r(tmp_path):
    write_obj(tmp_path / "base.obj", cube_vertices(half=0.05))
    write_obj(tmp_path / "tool.obj", cube_vertices(half=0.04))
    chain = parse_urdf(MESHED_2R, "base", "tool")
    chain.mesh_root = tmp_path
    return chain


class TestMeshLoading:
    def test_obj_vertices(self, tmp_path):
        write_obj(tmp_path / "cube.obj", cube_vertices())
        v = load_mesh_vertices(tmp_path / "cube.obj")
        assert v.shape == (8, 3)

    def test_ascii_stl_vertices_deduplicated(self, tmp_path):
        stl = """solid cube
facet normal 0 0 1
 outer loop
  vertex 0 0 0
  vertex 1 0 0
  vertex 0 1 0
 endloop
endfacet
facet normal 0 0 1
 outer loop
  vertex 1 0 0
  vertex 1 1 0
  vertex 0 1 0
 endloop
endfacet
endsolid cube
"""
        (tmp_path / "quad.stl").write_text(stl)
        v = load_mesh_vertices(tmp_path / "quad.stl")
        assert v.shape == (4, 3)

    def test_empty_mesh_rejected(self, tmp_path):
        (tmp_path / "empty.obj").write_text("# nothing here\n")
        with pytest.raises(MeshError, match="no vertices"):
            load_mesh_vertices(tmp_path / "empty.obj")

    def test_unreadable_mesh_rejected(self, tmp_path):
        with pytest.raises(MeshError, match="cannot read"):
            load_mesh_vertices(tmp_path / "missing.obj")


class TestSampling:
    def test_small_mesh_returns_all_vertices(self, meshed_2r):
        pts = sample_surface_points(meshed_2r, points_per_link=100, seed=0)
        assert len(pts.points_by_link["base"]) == 8

    def test_deterministic_for_fixed_seed(self, meshed_2r):
        a = sample_surface_points(meshed_2r, points_per_link=4, seed=7)
        b = sample_surface_points(meshed_2r, points_per_link=4, seed=7)
        for link in a.points_by_link:
            assert np.array_equal(a.points_by_link[link], b.points_by_link[link])

    def test_sphere_samples_stay_on_sphere(self, tmp_path):
        write_obj(tmp_path / "sphere.obj", fibonacci_sphere(482))
        urdf = MESHED_2R.replace("base.obj", "sphere.obj")
        chain = parse_urdf(urdf, "base", "tool")
        chain.mesh_root = tmp_path
        write_obj(tmp_path / "tool.obj", cube_vertices(half=0.04))
        pts = sample_surface_points(chain, points_per_link=100, seed=0)
        sphere_pts = pts.points_by_link["base"]
        assert len(sphere_pts) == 100
        np.testing.assert_allclose(
            np.linalg.norm(sphere_pts, axis=1), 1.0, atol=1e-6
        )

    def test_sampled_points_are_mesh_vertices(self, meshed_2r):
        pts = sample_surface_points(meshed_2r, points_per_link=5, seed=3)
        for link, sel in pts.points_by_link.items():
            vertices = load_mesh_vertices(meshed_2r.resolve_mesh_path(link))
            for p in sel:
                assert any(np.array_equal(p, v) for v in vertices)

    def test_meshless_links_contribute_no_points(self, meshed_2r):
        pts = sample_surface_points(meshed_2r, points_per_link=10, seed=0)
        assert "link1" not in pts.points_by_link
        assert pts.total == 16

    def test_fps_spreads_points(self):
        line = np.column_stack([np.linspace(0, 1, 101), np.zeros(101), np.zeros(101)])
        idx = farthest_point_sample(line, 3, seed=0)
        xs = np.sort(line[idx][:, 0])
        # one endpoint is always the first farthest pick; the rest stay spread
        assert xs[0] == 0.0 or xs[-1] == 1.0
        assert np.diff(xs).min() >= 0.2


class TestGripperPoints:
    def test_needs_three_points(self):
        with pytest.raises(ValueError, match="at least 3"):
            GripperPointSet(np.array([[0, 0, 0], [1, 0, 0]]))

    def test_rejects_collinear(self):
        with pytest.raises(ValueError, match="collinear"):
            GripperPointSet(np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]]))

    def test_from_chain(self, meshed_2r):
        g = gripper_points_from_chain(meshed_2r, points_per_link=100, seed=0)
        assert g.points.shape == (8, 3)
        assert g.radius > 0

    def test_missing_tool_mesh_rejected(self):
        chain = parse_urdf(PLANAR_2R_URDF, "base", "tool")
        with pytest.raises(MeshError, match="no mesh"):
            gripper_points_from_chain(chain)


class TestTransformPoints:
    def test_identity_at_zero_config(self, meshed_2r):
        pts = sample_surface_points(meshed_2r, points_per_link=100, seed=0)
        world = transform_points(meshed_2r, np.zeros(2), pts)
        np.testing.assert_allclose(world[:8], pts.points_by_link["base"], atol=1e-12)

    def test_tool_origin_matches_fk(self, tmp_path):
        write_obj(tmp_path / "base.obj", cube_vertices(half=0.05))
        write_obj(tmp_path / "tool.obj", np.array([[0.0, 0, 0], [0.1, 0, 0], [0, 0.1, 0]]))
        chain = parse_urdf(MESHED_2R, "base", "tool")
        chain.mesh_root = tmp_path
        pts = sample_surface_points(chain, points_per_link=100, seed=0)
        q = np.array([np.pi / 2, 0.0])
        world = transform_points(chain, q, pts)
        tool_world = world[pts.link_indices == chain.link_index("tool")]
        origin_row = tool_world[
            np.flatnonzero(np.all(pts.local_points[8:] == 0.0, axis=1))
        ]
        np.testing.assert_allclose(origin_row[0], [0.0, 2.0, 0.0], atol=1e-12)

    def test_matches_per_point_fk(self, meshed_2r):
        rng = np.random.default_rng(5)
        pts = sample_surface_points(meshed_2r, points_per_link=100, seed=0)
        for _ in range(5):
            q = rng.uniform(-3, 3, size=2)
            world = transform_points(meshed_2r, q, pts)
            poses = forward_kinematics(meshed_2r, q)
            i = 0
            for link in pts.link_names:
                for p_local in pts.points_by_link[link]:
                    np.testing.assert_allclose(
                        world[i], poses[link].apply(p_local), atol=1e-12
                    )
                    i += 1

    def test_pairwise_distances_invariant(self, meshed_2r):
        pts = sample_surface_points(meshed_2r, points_per_link=100, seed=0)
        rng = np.random.default_rng(9)

        def pdist(block):
            return np.linalg.norm(block[:, None] - block[None, :], axis=-1)

        base = pdist(pts.points_by_link["base"])
        for _ in range(5):
            world = transform_points(meshed_2r, rng.uniform(-3, 3, 2), pts)
            assert np.abs(pdist(world[:8]) - base).max() < 1e-9

    def test_bit_identical_across_calls(self, meshed_2r):
        pts = sample_surface_points(meshed_2r, points_per_link=100, seed=0)
        q = np.array([0.7, -0.4])
        assert np.array_equal(
            transform_points(meshed_2r, q, pts), transform_points(meshed_2r, q, pts)
        )

import math

import numpy as np
import pytest

import transeig as te
from transeig import MeshingError, builtin_domain, mesh_cube, mesh_domain, \
    partition_dofs, refine_uniform
from transeig.meshing import _tri_angles

S3 = math.sqrt(3.0)


def test_corners_are_mesh_vertices(equilateral_spec, equilateral_mesh):
    mesh = equilateral_mesh
    for corner in equilateral_spec.corners:
        d = np.linalg.norm(mesh.vertices - np.asarray(corner.point), axis=1)
        v = int(np.argmin(d))
        assert d[v] == 0.0
        assert mesh.corner_id[v] >= 0
        assert mesh.boundary[v]


def test_positive_areas_and_quality(equilateral_mesh):
    areas = equilateral_mesh.measures()
    assert (areas > 0).all()
    assert abs(areas.sum() - S3) < 1e-12
    ang = _tri_angles(equilateral_mesh.vertices, equilateral_mesh.elements)
    assert math.degrees(ang.min()) >= 15.0 - 1e-9
    assert equilateral_mesh.edge_lengths().max() <= 2 * equilateral_mesh.h + 1e-12


def test_disk_boundary_on_circle():
    spec = builtin_domain("disk", (1.0,))
    mesh = mesh_domain(spec, 0.1)
    b = mesh.vertices[mesh.boundary]
    assert len(b) >= 3
    assert np.abs(np.hypot(b[:, 0], b[:, 1]) - 1.0).max() <= 1e-10


def test_moon_area_within_tenth_percent():
    spec = builtin_domain("moon")
    mesh = mesh_domain(spec, 0.05)
    exact = math.pi - 2 * (math.pi / 3 - S3 / 4)   # disk minus lens
    assert abs(mesh.measures().sum() - exact) / exact < 1e-3


def test_conforming_edges(equilateral_mesh):
    # every interior edge is shared by exactly two triangles
    e = equilateral_mesh.elements
    edges = np.sort(np.concatenate([e[:, [0, 1]], e[:, [1, 2]], e[:, [2, 0]]]), axis=1)
    _, counts = np.unique(edges, axis=0, return_counts=True)
    assert set(counts.tolist()) <= {1, 2}


def test_h_too_coarse_rejected():
    spec = builtin_domain("unit_square")
    with pytest.raises(MeshingError, match="too coarse"):
        mesh_domain(spec, 1.5)


def test_refine_quadruples(equilateral_spec, equilateral_mesh):
    fine = refine_uniform(equilateral_mesh, equilateral_spec)
    assert fine.num_elements == 4 * equilateral_mesh.num_elements
    assert (fine.measures() > 0).all()
    assert abs(fine.measures().sum() - S3) < 1e-12


def test_refine_twice_euler_bookkeeping(equilateral_spec):
    # vertex count after refinement = old vertices + old edges, by direct
    # enumeration of unique edges
    mesh = mesh_domain(equilateral_spec, 0.3)
    for _ in range(2):
        e = mesh.elements
        edges = np.sort(np.concatenate([e[:, [0, 1]], e[:, [1, 2]], e[:, [2, 0]]]),
                        axis=1)
        n_edges = len(np.unique(edges, axis=0))
        fine = refine_uniform(mesh, equilateral_spec)
        assert fine.num_vertices == mesh.num_vertices + n_edges
        assert fine.num_elements == 4 * mesh.num_elements
        mesh = fine


def test_refine_snaps_disk_midpoints():
    spec = builtin_domain("disk", (1.0,))
    mesh = mesh_domain(spec, 0.2)
    fine = refine_uniform(mesh, spec)
    b = fine.vertices[fine.boundary]
    assert np.abs(np.hypot(b[:, 0], b[:, 1]) - 1.0).max() <= 1e-10
    # corners of any spec never move under refinement
    eq = builtin_domain("equilateral_triangle")
    m= mesh_domain(eq, 0.3)
    f = refine_uniform(m, eq)
    for corner in eq.corners:
        d = np.linalg.norm(f.vertices - np.asarray(corner.point), axis=1)
        assert d.min() == 0.0


def test_boundary_vertices_stay_on_their_segment():
    spec = builtin_domain("moon")
    mesh = refine_uniform(mesh_domain(spec, 0.1), spec)
    segs = spec.segments()
    for v in np.where(mesh.boundary)[0]:
        t = mesh.seg_tag[v]
        assert t >= 0
        s = segs[t]
        if s.kind == "arc":
            r = math.hypot(mesh.vertices[v, 0] - s.center[0],
                           mesh.vertices[v, 1] - s.center[1])
            assert abs(r - s.radius) <= 1e-10


def test_mesh_cube_counts_and_volume():
    mesh = mesh_cube(0.5)
    assert mesh.num_elements == 48          # 2^3 cells x 6 tets
    assert abs(mesh.measures().sum() - 1.0) <= 1e-12
    assert (mesh.measures() > 0).all()
    corner = np.array([-0.5, -0.5, -0.5])
    d = np.linalg.norm(mesh.vertices - corner, axis=1)
    v = int(np.argmin(d))
    assert d[v] == 0.0
    assert mesh.boundary[v]
    assert mesh.corner_id[v] >= 0


def test_mesh_cube_conforming():
    mesh = mesh_cube(0.34)
    e = mesh.elements
    faces = np.sort(np.concatenate([e[:, [1, 2, 3]], e[:, [0, 2, 3]],
                                    e[:, [0, 1, 3]], e[:, [0, 1, 2]]]), axis=1)
    _, counts = np.unique(faces, axis=0, return_counts=True)
    assert set(counts.tolist()) <= {1, 2}


def test_mesh_cube_too_coarse():
    with pytest.raises(MeshingError, match="too coarse"):
        mesh_cube(1.0)


def test_partition_counts(equilateral_mesh):
    part = partition_dofs(equilateral_mesh)
    assert part.num_interior + part.num_boundary == equilateral_mesh.num_vertices
    assert part.num_interior >= 1
    assert part.num_boundary >= 3
    assert (np.diff(part.interior) > 0).all()
    assert (np.diff(part.boundary) > 0).all()
    # bijection onto all vertices
    joined = np.sort(np.concatenate([part.interior, part.boundary]))
    assert (joined == np.arange(equilateral_mesh.num_vertices)).all()


def test_partition_structured_square(structured_square):
    m = round(1.0 / structured_square.h)
    part = partition_dofs(structured_square)
    assert part.num_boundary == 4 * m
    assert part.num_interior == (m - 1) ** 2


def test_partition_single_triangle():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    els = np.array([[0, 1, 2]])
    mesh = te.Mesh(dim=2, vertices=pts, elements=els,
                   boundary=np.array([True] * 3), seg_tag=np.zeros(3, int),
                   corner_id=np.arange(3), h=1.0, name="tri")
    part = partition_dofs(mesh)
    assert part.num_interior == 0
    assert part.num_boundary == 3
    with pytest.raises(ValueError, match="empty interior"):
        te.assemble_blocks(mesh, part, te.parse_index("16"))


def test_partition_deterministic(equilateral_mesh):
    p1 = partition_dofs(equilateral_mesh)
    p2 = partition_dofs(equilateral_mesh)
    assert (p1.interior == p2.interior).all()
    assert (p1.boundary == p2.boundary).all()


def test_mesh_immutable(equilateral_mesh):
    with pytest.raises(ValueError):
        equilateral_mesh.vertices[0, 0] = 99.0

import math

import numpy as np
import pytest
import scipy.sparse as sp

import transeig as te
from transeig import (assemble_blocks, assemble_dirichlet, build_pencil,
                      builtin_domain, element_mass, element_stiffness, full_mass,
                      mesh_domain, parse_index, partition_dofs)

UNIT_TRI = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
S3 = math.sqrt(3.0)


def test_unit_triangle_stiffness_closed_form():
    S = element_stiffness(UNIT_TRI)
    expected = 0.5 * np.array([[2.0, -1.0, -1.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])
    assert np.abs(S - expected).max() < 1e-14


def test_stiffness_row_sums_zero():
    rng = np.random.default_rng(3)
    for _ in range(20):
        tri = rng.uniform(-2, 2, (3, 2))
        if abs(np.linalg.det(tri[1:] - tri[0])) < 1e-3:
            continue
        S = element_stiffness(tri)
        assert np.abs(S.sum(axis=1)).max() < 1e-12
        assert np.abs(S - S.T).max() == 0.0


def test_stiffness_2d_scale_invariance():
    S1 = element_stiffness(UNIT_TRI)
    S2 = element_stiffness(2.0 * UNIT_TRI)
    assert np.abs(S1 - S2).max() < 1e-14


def test_degenerate_element_rejected():
    flat = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(ValueError, match="degenerate"):
        element_stiffness(flat)
    with pytest.raises(ValueError, match="degenerate"):
        element_mass(flat)


def test_unit_triangle_mass_closed_form():
    M = element_mass(UNIT_TRI)
    expected = (np.ones((3, 3)) + np.eye(3)) / 24.0
    assert np.abs(M - expected).max() < 1e-15
    assert abs(M.sum() - 0.5) < 1e-15      # element measure


def test_constant_coefficient_scales_bitwise():
    M1 = element_mass(UNIT_TRI)
    M16 = element_mass(UNIT_TRI, 16.0)
    assert (M16 == 16.0 * M1).all()
    Mc = element_mass(UNIT_TRI, parse_index("16"))
    assert (Mc == 16.0 * M1).all()


def test_variable_mass_against_subdivision_quadrature():
    # brute-force oracle: split the element into 64 sub-triangles and apply
    # the midpoint rule on each; the triangle is small enough that the
    # degree-3 truncation term of the element rule sits below 1e-6
    s = 1e-5
    tri = np.array([[0.1, 0.2], [0.1 + s, 0.2 + 0.07 * s],
                    [0.1 + 0.27 * s, 0.2 + 1.03 * s]])
    n = parse_index("16+8*sin(4*x*y)")
    M = element_mass(tri, n)

    def bary_subdivide(B, levels):
        out = [B]
        for _ in range(levels):
            nxt = []
            for T in out:
                b0, b1, b2 = T
                m01, m12, m20 = 0.5 * (b0 + b1), 0.5 * (b1 + b2), 0.5 * (b2 + b0)
                nxt += [np.array([b0, m01, m20]), np.array([m01, b1, m12]),
                        np.array([m20, m12, b2]), np.array([m01, m12, m20])]
            out = nxt
        return out

    qp = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
    ref = np.zeros((3, 3))
    for sub in bary_subdivide(np.eye(3), 3):        # 64 sub-triangles
        phys = sub @ tri
        sub_area = 0.5 * abs(np.linalg.det(phys[1:] - phys[0]))
        for q in range(3):
            lam_parent = qp[q] @ sub          # barycentric wrt the parent element
            pt = qp[q] @ phys
            ref += (sub_area / 3.0) * n(pt[0], pt[1]) * np.outer(lam_parent, lam_parent)
    assert np.abs(M - ref).max() / np.abs(ref).max() < 1e-6


def test_tet_stiffness_and_mass():
    tet = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0],
                    [0.0, 0.0, 1.0]])
    S = element_stiffness(tet)
    assert np.abs(S.sum(axis=1)).max() < 1e-12
    w = np.linalg.eigvalsh(S)
    assert w.min() > -1e-12
    M = element_mass(tet)
    expected = (np.ones((4, 4)) + np.eye(4)) / 120.0   # |T|/20 (1 + I), |T|=1/6
    assert np.abs(M - expected).max() < 1e-12


@pytest.fixture(scope="module")
def eq_setup():
    spec = builtin_domain("equilateral_triangle")
    mesh = mesh_domain(spec, 0.5)
    part = partition_dofs(mesh)
    n = parse_index("16")
    blocks = assemble_blocks(mesh, part, n)
    return spec, mesh, part, blocks


def test_block_dimensions(eq_setup):
    _, mesh, part, blocks = eq_setup
    I, J = part.num_interior, part.num_boundary
    assert blocks.s1_ii.shape == (I, I)
    assert blocks.s1_ib.shape == (I, J)
    assert blocks.s1_bi.shape == (J, I)
    assert blocks.m1_bb.shape == (J, J)
    assert blocks.m2_ib.shape == (I, J)


def test_transpose_relation_exact(eq_setup):
    _, _, _, blocks = eq_setup
    diff = (blocks.s1_bi - blocks.s1_ib.T).tocoo()
    assert len(diff.data) == 0 or np.abs(diff.data).max() == 0.0
    dm = (blocks.m2_bi - blocks.m2_ib.T).tocoo()
    assert len(dm.data) == 0 or np.abs(dm.data).max() == 0.0


def test_mass_partition_of_unity(eq_setup):
    _, mesh, part, blocks = eq_setup
    area = mesh.measures().sum()
    m1_total = (blocks.m1_ii.sum() + blocks.m1_ib.sum() + blocks.m1_bi.sum()
                + blocks.m1_bb.sum())
    assert abs(m1_total - area) < 1e-12
    m2_total = (blocks.m2_ii.sum() + blocks.m2_ib.sum() + blocks.m2_bi.sum()
                + blocks.m2_bb.sum())
    assert abs(m2_total - 16.0 * area) < 1e-11


def test_stiffness_kills_constants(eq_setup):
    _, mesh, part, blocks = eq_setup
    ones_i = np.ones(part.num_interior)
    ones_b = np.ones(part.num_boundary)
    # interior rows of the full stiffness applied to the constant vector
    r1 = blocks.s1_ii @ ones_i + blocks.s1_ib @ ones_b
    assert np.abs(r1).max() < 1e-12
    from transeig.assembly import _assemble_full
    S, _ = _assemble_full(mesh, None)
    assert np.abs(S @ np.ones(S.shape[0])).max() < 1e-12


def test_pencil_structure(eq_setup):
    _, _, part, blocks = eq_setup
    I, J = part.num_interior, part.num_boundary
    pencil = build_pencil(blocks)
    assert pencil.a.shape == (2 * I + J, 2 * I + J)
    assert pencil.b.shape == pencil.a.shape
    A = pencil.a.toarray()
    assert np.abs(A[:I, I:2 * I]).max() == 0.0          # (1,2) interior block
    assert np.abs(A[I:2 * I, :I]).max() == 0.0          # (2,1) interior block
    assert np.abs(A[2 * I:, 2 * I:]).max() == 0.0       # (3,3) block
    # A annihilates the constant pencil vector
    ones = np.ones(2 * I + J)
    assert np.abs(pencil.a @ ones).max() < 1e-12


def test_pencil_nnz_bound(eq_setup):
    _, _, _, blocks = eq_setup
    pencil = build_pencil(blocks)
    s_nnz = blocks.s1_ii.nnz + blocks.s1_ib.nnz + blocks.s1_bi.nnz
    assert pencil.a.nnz <= 3 * s_nnz


def test_degenerate_index_warns(eq_setup):
    _, mesh, part, _ = eq_setup
    blocks1 = assemble_blocks(mesh, part, parse_index("1"))
    with pytest.warns(UserWarning, match="degenerate"):
        build_pencil(blocks1)


def test_assembly_order_independent(eq_setup):
    _, mesh, part, blocks = eq_setup
    rng = np.random.default_rng(11)
    perm = rng.permutation(mesh.num_elements)
    shuffled = te.Mesh(dim=2, vertices=mesh.vertices.copy(),
                       elements=mesh.elements[perm].copy(),
                       boundary=mesh.boundary.copy(), seg_tag=mesh.seg_tag.copy(),
                       corner_id=mesh.corner_id.copy(), h=mesh.h, name=mesh.name)
    blocks2 = assemble_blocks(shuffled, part, parse_index("16"))
    for name in ("s1_ii", "m1_ii", "m2_bb", "s1_ib"):
        a = getattr(blocks, name).tocoo()
        b = getattr(blocks2, name).tocoo()
        d = abs(getattr(blocks, name) - getattr(blocks2, name)).max()
        scale = max(abs(a.data).max(), 1e-300)
        assert d <= 1e-13 * scale


def test_dirichlet_blocks(eq_setup):
    _, mesh, part, _ = eq_setup
    S, M = assemble_dirichlet(mesh, part)
    assert np.abs((S - S.T).toarray()).max() == 0.0
    w = np.linalg.eigvalsh(S.toarray())
    assert w.min() > 0.0
    assert np.abs((M - M.T).toarray()).max() == 0.0


def test_full_mass_quadratic_form(eq_setup):
    _, mesh, part, blocks = eq_setup
    M = full_mass(blocks)
    area = mesh.measures().sum()
    ones = np.ones(M.shape[0])
    assert abs(ones @ (M @ ones) - area) < 1e-12


def test_field_vectors_layout(eq_setup):
    _, _, part, blocks = eq_setup
    pencil = build_pencil(blocks)
    I, J = part.num_interior, part.num_boundary
    x = np.arange(2 * I + J, dtype=float)
    u, u0 = pencil.field_vectors(x)
    assert (u[:I] == x[:I]).all()
    assert (u0[:I] == x[I:2 * I]).all()
    assert (u[I:] == x[2 * I:]).all()
    assert (u0[I:] == x[2 * I:]).all()


def test_matrix_market_dump(tmp_path, eq_setup):
    from scipy.io import mmread
    from transeig import dump_matrix_market
    _, _, _, blocks = eq_setup
    pencil = build_pencil(blocks)
    pa, pb = dump_matrix_market(pencil, tmp_path / "pencil")
    A2 = mmread(pa).tocsc()
    B2 = mmread(pb).tocsc()
    assert abs(pencil.a - A2).max() == 0.0
    assert abs(pencil.b - B2).max() == 0.0

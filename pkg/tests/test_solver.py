import math

import numpy as np
import pytest
import scipy.sparse as sp

import transeig as te
from transeig import (SearchWindow, SolverError, assemble_blocks, build_pencil,
                      builtin_domain, dirichlet_lambda1, full_mass, lu_factor,
                      mesh_domain, normalize, parse_index, partition_dofs,
                      refine_uniform, search_lower_bound, shift_invert_arnoldi)

J0_FIRST_ZERO_SQ = 2.404825557695773 ** 2


def test_lu_identity():
    lu = lu_factor(sp.eye(5, format="csc"))
    b = np.arange(5.0)
    assert np.abs(lu.solve(b) - b).max() < 1e-14


def test_lu_permutation():
    M = sp.csc_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    lu = lu_factor(M)
    z = lu.solve(np.array([1.0, 2.0]))
    assert np.abs(z - np.array([2.0, 1.0])).max() < 1e-14


def test_lu_random_sparse_residual():
    rng = np.random.default_rng(42)
    n = 500
    density = 0.01
    nnz = int(n * n * density)
    rows = rng.integers(0, n, nnz)
    cols = rng.integers(0, n, nnz)
    vals = rng.standard_normal(nnz)
    M = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    # diagonal dominance
    M = M + sp.diags(np.abs(M).sum(axis=1).A1 + 1.0)
    lu = lu_factor(M.tocsc())
    b = rng.standard_normal(n)
    z = lu.solve(b)
    assert np.linalg.norm(M @ z - b) / np.linalg.norm(b) <= 1e-10


def test_lu_singular_raises():
    M = sp.csc_matrix((3, 3))
    M = M.tolil()
    M[0, 0] = 1.0
    M[1, 1] = 1.0
    with pytest.raises(SolverError, match="singular"):
        lu_factor(M.tocsc())


def test_diagonal_pencil_exact():
    A = sp.diags([1.0, 4.0, 9.0]).tocsc()
    B = sp.eye(3, format="csc")
    win = SearchWindow(k_min=0.5, k_max=3.5, sigma=2.0, count=3)
    got = shift_invert_arnoldi(A, B, win)
    ks = sorted(abs(k) for k, _ in got)
    assert np.abs(np.asarray(ks) - np.array([1.0, 2.0, 3.0])).max() < 1e-10


def test_window_validation():
    with pytest.raises(ValueError):
        SearchWindow(k_min=2.0, k_max=1.0)
    with pytest.raises(ValueError):
        SearchWindow(k_min=1.0, k_max=2.0, sigma=9.0)
    w = SearchWindow(k_min=1.0, k_max=2.0)
    assert abs(w.sigma - 1.1) < 1e-12


@pytest.fixture(scope="module")
def coarse_pencil():
    spec = builtin_domain("equilateral_triangle")
    mesh = mesh_domain(spec, 0.1)
    part = partition_dofs(mesh)
    blocks = assemble_blocks(mesh, part, parse_index("16"))
    return build_pencil(blocks), blocks, mesh


def test_shift_independence(coarse_pencil):
    pencil, _, _ = coarse_pencil
    w1 = SearchWindow(k_min=1.2, k_max=2.2, sigma=2.3, count=3)
    w2 = SearchWindow(k_min=1.2, k_max=2.2, sigma=3.2, count=3)
    k1 = sorted(abs(p.k) for p in shift_invert_arnoldi(pencil.a, pencil.b, w1,
                                                       pencil=pencil))[:3]
    k2 = sorted(abs(p.k) for p in shift_invert_arnoldi(pencil.a, pencil.b, w2,
                                                       pencil=pencil))[:3]
    assert np.abs(np.asarray(k1) - np.asarray(k2)).max() <= 1e-7


def test_residuals_against_original_pencil(coarse_pencil):
    pencil, _, _ = coarse_pencil
    win = SearchWindow(k_min=1.2, k_max=2.2, sigma=2.5, count=3)
    pairs = shift_invert_arnoldi(pencil.a, pencil.b, win, tol=1e-8, pencil=pencil)
    for p in pairs:
        direct = np.linalg.norm(pencil.a @ p.x - p.lam * (pencil.b @ p.x)) \
            / np.linalg.norm(p.x)
        assert direct <= 1e-8
        assert abs(direct - p.residual) <= 1e-12 + 1e-6 * direct


def test_normalize_unit_norm_and_phase(coarse_pencil):
    pencil, blocks, _ = coarse_pencil
    win = SearchWindow(k_min=1.2, k_max=2.2, sigma=2.5, count=2)
    pairs = shift_invert_arnoldi(pencil.a, pencil.b, win, pencil=pencil)
    m1 = full_mass(blocks)
    p = normalize(pairs[0], m1)
    quad = np.vdot(p.u0, m1 @ p.u0)
    assert abs(quad - 1.0) <= 1e-12
    top = p.u0[np.argmax(np.abs(p.u0))]
    assert top.real > 0 and abs(top.imag) <= 1e-12 * abs(top)


def test_normalize_scale_invariance(coarse_pencil):
    from dataclasses import replace
    pencil, blocks, _ = coarse_pencil
    win = SearchWindow(k_min=1.2, k_max=2.2, sigma=2.5, count=2)
    pairs = shift_invert_arnoldi(pencil.a, pencil.b, win, pencil=pencil)
    m1 = full_mass(blocks)
    base = normalize(pairs[0], m1)
    scaled = replace(pairs[0], u0=7.0 * pairs[0].u0, u=7.0 * pairs[0].u,
                     x=7.0 * pairs[0].x)
    again = normalize(scaled, m1)
    assert np.abs(again.u0 - base.u0).max() < 1e-12
    # normalizing an already normalized pair changes nothing
    third = normalize(base, m1)
    assert np.abs(third.u0 - base.u0).max() < 1e-13


def test_normalize_zero_vector_rejected(coarse_pencil):
    from dataclasses import replace
    pencil, blocks, _ = coarse_pencil
    win = SearchWindow(k_min=1.2, k_max=2.2, sigma=2.5, count=2)
    pairs = shift_invert_arnoldi(pencil.a, pencil.b, win, pencil=pencil)
    dead = replace(pairs[0], u0=0.0 * pairs[0].u0)
    with pytest.raises(SolverError, match="zero eigenfunction"):
        normalize(dead, full_mass(blocks))


def test_dirichlet_square():
    spec = builtin_domain("unit_square")
    mesh = mesh_domain(spec, 0.03)
    lam = dirichlet_lambda1(mesh)
    assert abs(lam - 2 * math.pi ** 2) / (2 * math.pi ** 2) < 0.01


def test_dirichlet_disk_and_monotonicity():
    spec = builtin_domain("disk", (1.0,))
    mesh = mesh_domain(spec, 0.1)
    vals = []
    for _ in range(3):
        vals.append(dirichlet_lambda1(mesh))
        mesh = refine_uniform(mesh, spec)
    # conforming elements approach from above
    assert vals[0] > vals[1] > vals[2]
    assert abs(vals[-1] - J0_FIRST_ZERO_SQ) / J0_FIRST_ZERO_SQ < 0.01


def test_search_lower_bound_cases():
    assert search_lower_bound(16.0, 16.0, 2.0, 4.0, 2.4) == max(1.2, math.sqrt(0.25))
    # case 1 picks the ball term when it dominates
    assert abs(search_lower_bound(2.0, 4.0, 1.0, 4.84, 1.2)
               - max(1.2, math.sqrt(4.84 / 4.0))) < 1e-15
    # case 2: index below one
    assert abs(search_lower_bound(0.25, 0.5, 1.0, 4.0, 1.1) - 2.0) < 1e-15
    with pytest.raises(ValueError, match="straddles"):
        search_lower_bound(0.5, 2.0, 1.0, 4.0, 1.0)
    with pytest.raises(ValueError):
        search_lower_bound(16.0, 16.0, -1.0, 4.0, 1.0)


def test_bound_consistent_with_first_eigenvalue(coarse_pencil):
    # the bound must sit below the computed first eigenvalue
    from transeig import disk_first_te
    from transeig.geometry import enclosing_circle, polyline
    pencil, blocks, mesh = coarse_pencil
    spec = builtin_domain("equilateral_triangle")
    pts, _, _, _ = polyline(spec, 0.05)
    _, R = enclosing_circle(pts)
    lam1 = dirichlet_lambda1(mesh)
    bound = search_lower_bound(16.0, 16.0, R, lam1, disk_first_te(16.0))
    win = SearchWindow(k_min=max(bound, 0.5), k_max=2.2, sigma=2.5, count=2)
    pairs = shift_invert_arnoldi(pencil.a, pencil.b, win, pencil=pencil)
    k1 = min(abs(p.k) for p in pairs)
    assert bound < k1
    assert bound < 1.5748


def test_multiplicity_cluster_reported():
    # numerically exact double eigenvalue in a small dense pencil
    A = sp.diags([1.0, 4.0, 4.0, 9.0, 16.0]).tocsc()
    B = sp.eye(5, format="csc")
    win = SearchWindow(k_min=1.5, k_max=2.5, sigma=4.0, count=2)
    pairs = shift_invert_arnoldi(A, B, win)
    assert len(pairs) == 2


def test_no_eigenvalues_in_window_raises(coarse_pencil):
    pencil, _, _ = coarse_pencil
    win = SearchWindow(k_min=0.02, k_max=0.05, sigma=0.0009, count=2)
    with pytest.raises(SolverError):
        shift_invert_arnoldi(pencil.a, pencil.b, win, pencil=pencil)


def test_shift_on_eigenvalue_is_perturbed():
    # sigma exactly at an eigenvalue makes (A - sigma B) singular; the solver
    # must nudge the shift and still deliver the spectrum
    A = sp.diags([1.0, 4.0, 9.0, 16.0, 25.0, 36.0, 49.0, 64.0, 81.0, 100.0,
                  121.0, 144.0, 169.0, 196.0, 225.0, 256.0, 289.0, 324.0,
                  361.0, 400.0, 441.0, 484.0, 529.0, 576.0, 625.0, 676.0,
                  729.0, 784.0, 841.0, 900.0, 961.0, 1024.0, 1089.0, 1156.0,
                  1225.0, 1296.0, 1369.0, 1444.0, 1521.0, 1600.0, 1681.0,
                  1764.0, 1849.0, 1936.0, 2025.0, 2116.0, 2209.0, 2304.0,
                  2401.0, 2500.0, 2601.0, 2704.0, 2809.0, 2916.0, 3025.0,
                  3136.0, 3249.0, 3364.0, 3481.0, 3600.0, 3721.0, 3844.0,
                  3969.0, 4096.0]).tocsc()
    B = sp.eye(64, format="csc")
    win = SearchWindow(k_min=1.5, k_max=3.5, sigma=4.0, count=3)
    pairs = shift_invert_arnoldi(A, B, win)
    ks = sorted(abs(k) for k, _ in pairs)
    assert np.abs(np.asarray(ks[:2]) - np.array([2.0, 3.0])).max() < 1e-9

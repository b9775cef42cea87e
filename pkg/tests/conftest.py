import numpy as np
import pytest

import transeig as te


@pytest.fixture(scope="session")
def equilateral_spec():
    return te.builtin_domain("equilateral_triangle")


@pytest.fixture(scope="session")
def equilateral_mesh(equilateral_spec):
    return te.mesh_domain(equilateral_spec, 0.1)


@pytest.fixture(scope="session")
def square_mesh():
    spec = te.builtin_domain("unit_square")
    return te.mesh_domain(spec, 0.08)


@pytest.fixture(scope="session")
def structured_square():
    """Hand-built structured mesh of the unit square, m cells per side."""
    m = 8
    xs = np.linspace(0.0, 1.0, m + 1)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return i * (m + 1) + j

    tris = []
    for i in range(m):
        for j in range(m):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            tris.append([a, b, c])
            tris.append([a, c, d])
    tris = np.asarray(tris)
    ii, jj = np.meshgrid(np.arange(m + 1), np.arange(m + 1), indexing="ij")
    boundary = ((ii == 0) | (ii == m) | (jj == 0) | (jj == m)).ravel()
    seg = np.where(boundary, 0, -1)
    cid = np.full(len(pts), -1)
    return te.Mesh(dim=2, vertices=pts, elements=tris, boundary=boundary,
                   seg_tag=seg, corner_id=cid, h=1.0 / m, name="structured_square")

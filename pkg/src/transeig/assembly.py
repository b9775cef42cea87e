"""P1 stiffness/mass assembly and the coupled eigenvalue pencil.

The discrete problem couples an interior field pair through a shared
boundary trace. With I interior and J boundary vertices, unknowns are
ordered [field-with-coefficient interior, free-field interior, shared
trace], giving the (2I+J) x (2I+J) real pencil (A, B):

    A = [[S_II, 0,    S_IB],        B = [[Mn_II,  0,     Mn_IB],
         [0,    S_II, S_IB],             [0,      M_II,  M_IB],
         [S_BI, -S_BI, 0  ]]             [Mn_BI, -M_BI,  Mn_BB - M_BB]]

where S is the stiffness matrix, M the unit mass and Mn the mass weighted
by the coefficient n.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .meshing import Mesh, DofPartition

# quadrature exact for degree 2: edge midpoints (triangles),
# the symmetric 4-point rule (tetrahedra)
_TRI_QP = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
_TRI_QW = np.array([1.0, 1.0, 1.0]) / 3.0
_TET_A = (5.0 + 3.0 * np.sqrt(5.0)) / 20.0
_TET_B = (5.0 - np.sqrt(5.0)) / 20.0
_TET_QP = np.array([[_TET_A, _TET_B, _TET_B, _TET_B],
                    [_TET_B, _TET_A, _TET_B, _TET_B],
                    [_TET_B, _TET_B, _TET_A, _TET_B],
                    [_TET_B, _TET_B, _TET_B, _TET_A]])
_TET_QW = np.array([0.25, 0.25, 0.25, 0.25])


def _quadrature(dim):
    return (_TRI_QP, _TRI_QW) if dim == 2 else (_TET_QP, _TET_QW)


def _gradients(vertices, elements, dim):
    """Constant P1 basis gradients per element and signed measures."""
    p = vertices[elements]
    if dim == 2:
        u, v = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        det = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
        g = np.empty((len(elements), 3, 2))
        g[:, 1, 0] = v[:, 1];  g[:, 1, 1] = -v[:, 0]
        g[:, 2, 0] = -u[:, 1]; g[:, 2, 1] = u[:, 0]
        g[:, 0] = -(g[:, 1] + g[:, 2])
        g /= det[:, None, None]
        return g, det / 2.0
    v1, v2, v3 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]
    det = np.einsum("ei,ei->e", np.cross(v1, v2), v3)
    g = np.empty((len(elements), 4, 3))
    g[:, 1] = np.cross(v2, v3)
    g[:, 2] = np.cross(v3, v1)
    g[:, 3] = np.cross(v1, v2)
    g[:, 0] = -(g[:, 1] + g[:, 2] + g[:, 3])
    g /= det[:, None, None]
    return g, det / 6.0


def element_stiffness(coords) -> np.ndarray:
    """Local P1 stiffness matrix of one triangle or tetrahedron.

    Symmetric positive-semidefinite with zero row sums (constants are in
    the kernel). Raises on degenerate elements.
    """
    coords = np.asarray(coords, float)
    dim = coords.shape[1]
    if abs(_measure_one(coords, dim)) < 1e-300:
        raise ValueError("degenerate element")
    g, meas = _gradients(coords, np.arange(dim + 1)[None, :], dim)
    return np.einsum("id,jd->ij", g[0], g[0]) * abs(meas[0])


def element_mass(coords, coeff=None) -> np.ndarray:
    """Local P1 mass matrix, optionally weighted by a coefficient.

    ``coeff`` may be None (unit), a number, or a callable of (x, y[, z])
    evaluated at the quadrature points. With a unit coefficient the entries
    sum to the element measure.
    """
    coords = np.asarray(coords, float)
    dim = coords.shape[1]
    qp, qw = _quadrature(dim)
    meas = _measure_one(coords, dim)
    if abs(meas) < 1e-300:
        raise ValueError("degenerate element")
    base = np.einsum("q,qi,qj->ij", qw, qp, qp) * abs(meas)
    if coeff is None:
        return base
    if np.isscalar(coeff) or isinstance(coeff, (int, float)):
        return float(coeff) * base
    const = getattr(coeff, "is_constant", None)
    if callable(const) and coeff.is_constant():
        return coeff.constant_value() * base
    pts = qp @ coords
    vals = coeff(pts[:, 0], pts[:, 1], pts[:, 2] if dim == 3 else 0.0)
    vals = np.asarray(vals, float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("coefficient is not finite on the element")
    return np.einsum("q,qi,qj->ij", qw * vals, qp, qp) * abs(meas)


def _measure_one(coords, dim):
    if dim == 2:
        u, v = coords[1] - coords[0], coords[2] - coords[0]
        return (u[0] * v[1] - u[1] * v[0]) / 2.0
    return np.dot(np.cross(coords[1] - coords[0], coords[2] - coords[0]),
                  coords[3] - coords[0]) / 6.0


def _assemble_full(mesh: Mesh, coeff=None):
    """Assemble global stiffness and (weighted) mass over all vertices."""
    dim = mesh.dim
    nv = mesh.num_vertices
    els = mesh.elements
    g, meas = _gradients(mesh.vertices, els, dim)
    s_loc = np.einsum("eid,ejd,e->eij", g, g, meas)
    qp, qw = _quadrature(dim)
    if coeff is None:
        m_loc = np.einsum("q,qi,qj->ij", qw, qp, qp)[None] * meas[:, None, None]
    else:
        const = getattr(coeff, "is_constant", None)
        if callable(const) and coeff.is_constant():
            c = coeff.constant_value()
            m_loc = c * (np.einsum("q,qi,qj->ij", qw, qp, qp)[None] * meas[:, None, None])
        else:
            pts = np.einsum("qb,ebd->eqd", qp, mesh.vertices[els])
            vals = coeff(pts[..., 0], pts[..., 1], pts[..., 2] if dim == 3 else 0.0)
            m_loc = np.einsum("eq,qi,qj->eij", qw[None, :] * vals, qp, qp) * meas[:, None, None]
    k = dim + 1
    rows = np.repeat(els, k, axis=1).ravel()
    cols = np.tile(els, (1, k)).ravel()
    S = sp.csr_matrix((s_loc.ravel(), (rows, cols)), shape=(nv, nv))
    M = sp.csr_matrix((m_loc.ravel(), (rows, cols)), shape=(nv, nv))
    S.sum_duplicates()
    M.sum_duplicates()
    return S, M


@dataclass(frozen=True)
class BlockMatrices:
    """Interior/boundary blocks of stiffness and the two mass matrices."""
    s1_ii: sp.csr_matrix
    s1_ib: sp.csr_matrix
    s1_bi: sp.csr_matrix
    m1_ii: sp.csr_matrix
    m1_ib: sp.csr_matrix
    m1_bi: sp.csr_matrix
    m1_bb: sp.csr_matrix
    m2_ii: sp.csr_matrix
    m2_ib: sp.csr_matrix
    m2_bi: sp.csr_matrix
    m2_bb: sp.csr_matrix
    partition: DofPartition


def assemble_blocks(mesh: Mesh, partition: DofPartition, n) -> BlockMatrices:
    """Assemble all stiffness/mass blocks for the coupled formulation.

    ``n`` is the coefficient (a RefractiveIndex or anything callable on
    coordinate arrays); the unit-coefficient mass blocks come out of the
    same quadrature, so a constant n gives weighted blocks that are exact
    scalar multiples of the unweighted ones.
    """
    if partition.num_interior < 1:
        raise ValueError("empty interior: mesh has no interior vertices")
    S, M1 = _assemble_full(mesh, None)
    _, M2 = _assemble_full(mesh, n)
    i = partition.interior
    b = partition.boundary
    S = S.tocsc(); M1 = M1.tocsc(); M2 = M2.tocsc()

    def blk(M, r, c):
        return M[r][:, c].tocsr()

    return BlockMatrices(
        s1_ii=blk(S, i, i), s1_ib=blk(S, i, b), s1_bi=blk(S, b, i),
        m1_ii=blk(M1, i, i), m1_ib=blk(M1, i, b), m1_bi=blk(M1, b, i), m1_bb=blk(M1, b, b),
        m2_ii=blk(M2, i, i), m2_ib=blk(M2, i, b), m2_bi=blk(M2, b, i), m2_bb=blk(M2, b, b),
        partition=partition)


@dataclass(frozen=True)
class Pencil:
    """The real nonsymmetric pencil (A, B) with its dof bookkeeping.

    Pencil coordinates: rows [0, I) are the coefficient-field interior
    values, rows [I, 2I) the free-field interior values, rows [2I, 2I+J)
    the shared boundary trace.
    """
    a: sp.csc_matrix
    b: sp.csc_matrix
    partition: DofPartition

    @property
    def num_interior(self):
        return self.partition.num_interior

    @property
    def num_boundary(self):
        return self.partition.num_boundary

    @property
    def dim(self):
        return 2 * self.num_interior + self.num_boundary

    def split(self, x):
        """Split a pencil vector into (u_interior, u0_interior, trace)."""
        I = self.num_interior
        return x[:I], x[I:2 * I], x[2 * I:]

    def field_vectors(self, x):
        """Coefficient vectors (u, u0), each of length I+J in partition
        order [interior values, shared trace].

        Both fields share the boundary trace; u is the field weighted by n
        in the mass blocks, u0 the free one.
        """
        ui, u0i, w = self.split(x)
        return np.concatenate([ui, w]), np.concatenate([u0i, w])


def to_vertex_order(partition: DofPartition, vec):
    """Scatter a partition-ordered field vector [interior, boundary] onto
    mesh vertex indices."""
    nv = partition.num_interior + partition.num_boundary
    out = np.zeros(nv, dtype=np.asarray(vec).dtype)
    out[partition.interior] = vec[:partition.num_interior]
    out[partition.boundary] = vec[partition.num_interior:]
    return out


def build_pencil(blocks: BlockMatrices) -> Pencil:
    """Form the (2I+J) square pencil from the assembled blocks.

    Emits a warning when the weighted and unweighted masses coincide
    (coefficient identically 1), which makes the pencil degenerate.
    """
    I = blocks.partition.num_interior
    J = blocks.partition.num_boundary
    if blocks.s1_ii.shape != (I, I) or blocks.s1_ib.shape != (I, J):
        raise ValueError("block dimensions inconsistent with the partition")
    z_ii = sp.csr_matrix((I, I))
    z_bb = sp.csr_matrix((J, J))
    A = sp.bmat([[blocks.s1_ii, z_ii, blocks.s1_ib],
                 [z_ii, blocks.s1_ii, blocks.s1_ib],
                 [blocks.s1_bi, -blocks.s1_bi, z_bb]], format="csc")
    B = sp.bmat([[blocks.m2_ii, z_ii, blocks.m2_ib],
                 [z_ii, blocks.m1_ii, blocks.m1_ib],
                 [blocks.m2_bi, -blocks.m1_bi, blocks.m2_bb - blocks.m1_bb]],
                format="csc")
    scale = max(abs(blocks.m1_bb).max(), 1e-300)
    diff = abs(blocks.m2_bb - blocks.m1_bb).max()
    if diff <= 1e-14 * scale:
        warnings.warn("coefficient is 1 on the boundary ring: pencil is degenerate "
                      "(trace block of B vanishes)", stacklevel=2)
    return Pencil(a=A, b=B, partition=blocks.partition)


def assemble_dirichlet(mesh: Mesh, partition: DofPartition):
    """Interior-only stiffness and unit mass (the Dirichlet Laplacian pair)."""
    if partition.num_interior < 1:
        raise ValueError("empty interior: mesh has no interior vertices")
    S, M = _assemble_full(mesh, None)
    i = partition.interior
    S = S.tocsc()[i][:, i].tocsr()
    M = M.tocsc()[i][:, i].tocsr()
    return S, M


def full_mass(blocks: BlockMatrices) -> sp.csr_matrix:
    """Unit mass over interior+boundary dofs in partition order.

    Used to evaluate L2 norms of field vectors laid out as
    [interior values, trace values].
    """
    return sp.bmat([[blocks.m1_ii, blocks.m1_ib],
                    [blocks.m1_bi, blocks.m1_bb]], format="csr")


def dump_matrix_market(pencil: Pencil, prefix) -> tuple:
    """Debug dump of the pencil in MatrixMarket coordinate format.

    Writes ``{prefix}_A.mtx`` and ``{prefix}_B.mtx`` and returns both paths.
    """
    from scipy.io import mmwrite
    pa = f"{prefix}_A.mtx"
    pb = f"{prefix}_B.mtx"
    mmwrite(pa, pencil.a.tocoo())
    mmwrite(pb, pencil.b.tocoo())
    return pa, pb

"""Simplicial meshes: generation, uniform refinement, dof partitioning.

2D meshes are built from a boundary polyline at spacing h, a hexagonal
interior lattice, Delaunay triangulation with outside-triangle removal,
guarded Laplacian smoothing (3 passes) and min-angle edge flips. Boundary
vertices are placed exactly on their owning segment curve and stay there
under refinement (arc midpoints are snapped back to the arc).

The 3D case is the axis-aligned unit cube with a structured Kuhn split
(6 tetrahedra per hexahedral cell).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, cKDTree

from .errors import MeshingError
from .geometry import DomainSpec2D

SNAP_TOL = 1e-10
MIN_ANGLE_DEG = 15.0


@dataclass(frozen=True)
class Mesh:
    """Immutable simplicial mesh with boundary classification.

    ``seg_tag[v]`` is the flattened boundary-segment index owning boundary
    vertex v (-1 for interior vertices); ``corner_id[v]`` marks domain
    corners (cube vertices in 3D). All elements have positive signed
    measure.
    """

    dim: int
    vertices: np.ndarray      # (nv, dim)
    elements: np.ndarray      # (ne, dim+1)
    boundary: np.ndarray      # (nv,) bool
    seg_tag: np.ndarray       # (nv,) int
    corner_id: np.ndarray     # (nv,) int
    h: float
    name: str = ""

    def __post_init__(self):
        for arr in (self.vertices, self.elements, self.boundary, self.seg_tag, self.corner_id):
            arr.setflags(write=False)

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_elements(self):
        return len(self.elements)

    def measures(self) -> np.ndarray:
        """Signed areas (2D) or volumes (3D) of all elements."""
        p = self.vertices[self.elements]
        if self.dim == 2:
            u, v = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
            return 0.5 * (u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
        v1, v2, v3 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]
        return np.einsum("ei,ei->e", np.cross(v1, v2), v3) / 6.0

    def edge_lengths(self) -> np.ndarray:
        p = self.vertices[self.elements]
        k = self.dim + 1
        out = []
        for i in range(k):
            for j in range(i + 1, k):
                out.append(np.linalg.norm(p[:, i] - p[:, j], axis=1))
        return np.stack(out, axis=1)

    def boundary_edges(self):
        """Edges incident to exactly one element (2D only)."""
        e = self.elements
        edges = np.concatenate([e[:, [0, 1]], e[:, [1, 2]], e[:, [2, 0]]])
        edges = np.sort(edges, axis=1)
        uniq, counts = np.unique(edges, axis=0, return_counts=True)
        return uniq[counts == 1]

    def adjacency(self):
        """element -> elements sharing a facet (list of arrays)."""
        k = self.dim + 1
        facets = {}
        for ei, el in enumerate(self.elements):
            for drop in range(k):
                f = tuple(sorted(np.delete(el, drop)))
                facets.setdefault(f, []).append(ei)
        neigh = [[] for _ in range(len(self.elements))]
        for members in facets.values():
            for a in members:
                for b in members:
                    if a != b:
                        neigh[a].append(b)
        return [np.array(sorted(n)) for n in neigh]


@dataclass(frozen=True)
class DofPartition:
    """Interior / boundary vertex index sets, each in ascending order."""
    interior: np.ndarray
    boundary: np.ndarray

    def __post_init__(self):
        self.interior.setflags(write=False)
        self.boundary.setflags(write=False)

    @property
    def num_interior(self):
        return len(self.interior)

    @property
    def num_boundary(self):
        return len(self.boundary)


def partition_dofs(mesh: Mesh) -> DofPartition:
    """Split vertex indices into interior and boundary sets.

    The ordering is ascending vertex index within each class, so repeated
    calls on the same mesh give identical partitions.
    """
    return DofPartition(interior=np.where(~mesh.boundary)[0],
                        boundary=np.where(mesh.boundary)[0])


# ---------------------------------------------------------------------------
# 2D generation
# ---------------------------------------------------------------------------

def _hex_lattice(lo, hi, h):
    rows = []
    y = lo[1]
    r = 0
    while y <= hi[1] + 1e-12:
        x0 = lo[0] + (0.5 * h if r % 2 else 0.0)
        xs = np.arange(x0, hi[0] + 1e-12, h)
        if len(xs):
            rows.append(np.column_stack([xs, np.full(len(xs), y)]))
        y += h * math.sqrt(3.0) / 2.0
        r += 1
    return np.vstack(rows) if rows else np.zeros((0, 2))


def _crossing_inside(P, loops):
    inside = np.zeros(len(P), dtype=bool)
    for loop in loops:
        x0, y0 = loop[:, 0], loop[:, 1]
        x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
        for i in range(len(loop)):
            cond = (y0[i] > P[:, 1]) != (y1[i] > P[:, 1])
            if not cond.any():
                continue
            xi = (x1[i] - x0[i]) * (P[:, 1] - y0[i]) / (y1[i] - y0[i] + 1e-300) + x0[i]
            inside ^= cond & (P[:, 0] < xi)
    return inside


def _tri_angles(pts, els):
    p = pts[els]
    a = np.linalg.norm(p[:, 1] - p[:, 2], axis=1)
    b = np.linalg.norm(p[:, 0] - p[:, 2], axis=1)
    c = np.linalg.norm(p[:, 0] - p[:, 1], axis=1)
    def ang(u, v, w):
        return np.arccos(np.clip((v ** 2 + w ** 2 - u ** 2) / (2 * v * w), -1.0, 1.0))
    return np.stack([ang(a, b, c), ang(b, a, c), ang(c, a, b)], axis=1)


def _signed_area(pts, els):
    p = pts[els]
    return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                  - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))


def _smooth(pts, els, movable, passes=3):
    """Guarded Laplacian smoothing: a vertex moves to the neighbor average
    unless that would invert or degenerate an incident triangle."""
    nv = len(pts)
    neighbors = [set() for _ in range(nv)]
    incident = [[] for _ in range(nv)]
    for ei, (i, j, k) in enumerate(els):
        neighbors[i].update((j, k)); neighbors[j].update((i, k)); neighbors[k].update((i, j))
        incident[i].append(ei); incident[j].append(ei); incident[k].append(ei)
    pts = pts.copy()
    for _ in range(passes):
        for v in range(nv):
            if not movable[v] or not neighbors[v]:
                continue
            nb = np.fromiter(neighbors[v], int)
            nb.sort()
            old = pts[v].copy()
            pts[v] = pts[nb].mean(axis=0)
            if (_signed_area(pts, els[incident[v]]) <= 1e-14).any():
                pts[v] = old
    return pts


def _flip_edges(pts, els, protected, max_sweeps=12):
    """Min-angle edge flips on interior edges; deterministic sweep order.

    Stale edge-map entries after a flip are detected by re-checking that
    both candidate triangles still contain the edge.
    """
    els = els.copy()
    for _ in range(max_sweeps):
        edge_map = {}
        for ei, tri in enumerate(els):
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                edge_map.setdefault((min(a, b), max(a, b)), []).append(ei)
        flipped = 0
        for key in sorted(edge_map):
            if key in protected:
                continue
            owners = [ei for ei in edge_map[key]
                      if key[0] in els[ei] and key[1] in els[ei]]
            if len(owners) != 2:
                continue
            t1, t2 = owners
            a, b = key
            c = [v for v in els[t1] if v != a and v != b]
            d = [v for v in els[t2] if v != a and v != b]
            if len(c) != 1 or len(d) != 1 or c[0] == d[0]:
                continue
            c, d = c[0], d[0]
            new = np.array([[c, d, a], [c, d, b]])
            for r in range(2):
                if _signed_area(pts, new[r:r + 1])[0] < 0:
                    new[r] = new[r][[0, 2, 1]]
            if (_signed_area(pts, new) <= 1e-14).any():
                continue
            old_min = _tri_angles(pts, np.array([els[t1], els[t2]])).min()
            new_min = _tri_angles(pts, new).min()
            if new_min > old_min + 1e-12:
                els[t1], els[t2] = new[0], new[1]
                flipped += 1
        if flipped == 0:
            break
    return els


def _min_angle_floor(spec, corner_id, els):
    """Per-triangle angle floor in radians: 15 degrees, relaxed at sharp corners."""
    base = math.radians(MIN_ANGLE_DEG)
    floors = np.full(len(els), base)
    sharp = {k: c.opening_angle for k, c in enumerate(spec.corners)
             if c.opening_angle < math.radians(40.0)}
    if sharp:
        cid = corner_id[els]
        for k, om in sharp.items():
            touches = (cid == k).any(axis=1)
            floors[touches] = np.minimum(floors[touches], 0.8 * om)
    return floors


_SHARP_LIMIT = 0.7          # radians; corners sharper than this get graded spacing


def _division_fractions(L, h, omega_start, omega_end):
    """Arclength fractions in [0, 1) subdividing one segment.

    Uniform spacing h, except geometric grading toward ends that sit at a
    sharp corner: spacing there shrinks proportionally to the distance from
    the corner (ratio 2 tan(omega/2)), which keeps the cross-wedge strip
    triangles well shaped however thin the wedge is.
    """
    def graded(omega):
        if omega is None or omega >= _SHARP_LIMIT:
            return [0.0]
        q = 2.0 * math.tan(omega / 2.0)
        pts = [0.0]
        d = 0.5 * h * q
        while q * d < h and d < 0.45 * L:
            pts.append(d)
            d *= (1.0 + q)
        return pts

    front = graded(omega_start)
    back = [L - t for t in graded(omega_end)][::-1]     # ascending, ends at L
    lo, hi = front[-1], back[0]
    if hi - lo < 0.5 * h:
        ts = front + [t for t in back if t > front[-1] + 0.3 * h and t < L]
    else:
        n = max(1, int(round((hi - lo) / h)))
        uniform = [lo + (hi - lo) * j / n for j in range(1, n)]
        ts = front + uniform + [t for t in back if t < L]
    if len(ts) < 2:                      # every segment gets >= 2 subdivisions
        ts = [0.0, L / 2.0]
    return [t / L for t in ts]


class _Polyline:
    """Ordered boundary discretization, one entry list per loop."""

    def __init__(self, spec, h):
        corner_lookup = {(c.loop, c.index): k for k, c in enumerate(spec.corners)}
        corner_angle = {(c.loop, c.index): c.opening_angle for c in spec.corners}
        self.loops = []
        flat = 0
        for li, loop in enumerate(spec.loops):
            entries = []
            for si, seg in enumerate(loop):
                om0 = corner_angle.get((li, si))
                om1 = corner_angle.get((li, (si + 1) % len(loop)))
                for j, t in enumerate(_division_fractions(seg.length(), h, om0, om1)):
                    entries.append((seg.point_at(t), flat,
                                    corner_lookup.get((li, si), -1) if j == 0 else -1))
                flat += 1
            self.loops.append(entries)

    def flatten(self):
        pts, tags, cids, slices = [], [], [], []
        for entries in self.loops:
            start = len(pts)
            for p, t, c in entries:
                pts.append(p)
                tags.append(t)
                cids.append(c)
            slices.append(slice(start, len(pts)))
        return np.asarray(pts), np.asarray(tags), np.asarray(cids), slices

    def insert_midpoint(self, loop_idx, pos, segs):
        entries = self.loops[loop_idx]
        (p0, tag, _) = entries[pos]
        (p1, _, _) = entries[(pos + 1) % len(entries)]
        mid = segs[tag].snap((0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])))
        entries.insert(pos + 1, (mid, tag, -1))


def mesh_domain(spec: DomainSpec2D, h: float) -> Mesh:
    """Triangulate a 2D domain with target edge length h.

    All corners of ``spec`` become mesh vertices; boundary vertices lie
    exactly on their owning segment (arcs included). The mesh is conforming
    with max edge <= 2h and a 15-degree minimum-angle floor (relaxed only
    for triangles touching a corner sharper than 40 degrees, where the
    opening angle itself limits what any triangulation can achieve).

    Raises
    ------
    MeshingError
        If h is too coarse for some boundary segment or quality targets
        cannot be met; the message names the offending region.
    """
    if h <= 0:
        raise MeshingError("h must be positive")
    segs = spec.segments()
    for si, seg in enumerate(segs):
        if seg.length() <= h:
            raise MeshingError(
                f"h={h} too coarse: boundary segment {si} (length {seg.length():.3g}) "
                "needs at least 2 subdivisions")

    # generate slightly finer than the target so smoothing cannot stretch
    # any edge past the 2h bound
    h_gen = 0.9 * h
    poly = _Polyline(spec, h_gen)
    for attempt in range(4):
        bpts, btags, bcids, loop_slices = poly.flatten()
        loops = [bpts[sl] for sl in loop_slices]

        lo, hi = spec.bounding_box()
        grid = _hex_lattice(lo - h_gen, hi + h_gen, h_gen)
        if len(grid):
            grid = grid[_crossing_inside(grid, loops)]
        if len(grid):
            dist, _ = cKDTree(bpts).query(grid)
            grid = grid[dist > 0.7 * h_gen]

        pts = np.vstack([bpts, grid]) if len(grid) else bpts.copy()
        nb = len(bpts)
        if len(pts) < 3:
            raise MeshingError("domain too small for this h")
        els = Delaunay(pts).simplices.copy()
        els = els[_crossing_inside(pts[els].mean(axis=1), loops)]
        area = _signed_area(pts, els)
        els[area < 0] = els[area < 0][:, ::-1]
        els = els[np.abs(_signed_area(pts, els)) > 1e-14]

        # conformity: consecutive polyline points must appear as mesh edges
        present = set()
        for tri in els:
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                present.add((min(a, b), max(a, b)))
        missing = []
        for li, sl in enumerate(loop_slices):
            n = sl.stop - sl.start
            for j in range(n):
                a = sl.start + j
                b = sl.start + (j + 1) % n
                if (min(a, b), max(a, b)) not in present:
                    missing.append((li, j, a))
        if not missing:
            break
        if attempt == 3:
            p = bpts[missing[0][2]]
            raise MeshingError(f"could not recover boundary edge near {tuple(p)}")
        for li, j, _ in sorted(missing, reverse=True):
            poly.insert_midpoint(li, j, segs)

    used = np.zeros(len(pts), bool)
    used[els.ravel()] = True
    if not used[:nb].all():
        bad = np.where(~used[:nb])[0][0]
        raise MeshingError(f"boundary vertex near {tuple(pts[bad])} is not in any triangle")
    remap = -np.ones(len(pts), int)
    remap[used] = np.arange(used.sum())
    pts = pts[used]
    els = remap[els]

    boundary = np.zeros(len(pts), bool)
    boundary[:nb] = True
    seg_tag = np.full(len(pts), -1, int)
    seg_tag[:nb] = btags
    corner_id = np.full(len(pts), -1, int)
    corner_id[:nb] = bcids

    pts = _smooth(pts, els, movable=~boundary, passes=3)
    edges = np.concatenate([els[:, [0, 1]], els[:, [1, 2]], els[:, [2, 0]]])
    edges = np.sort(edges, axis=1)
    uniq, counts = np.unique(edges, axis=0, return_counts=True)
    protected = {(int(a), int(b)) for a, b in uniq[counts == 1]}
    els = _flip_edges(pts, els, protected)
    pts = _smooth(pts, els, movable=~boundary, passes=2)

    mesh = Mesh(dim=2, vertices=pts, elements=els, boundary=boundary,
                seg_tag=seg_tag, corner_id=corner_id, h=h, name=spec.name)
    _check_quality(mesh, spec)
    return mesh


def _check_quality(mesh: Mesh, spec: DomainSpec2D):
    area = _signed_area(mesh.vertices, mesh.elements)
    if (area <= 0).any():
        raise MeshingError("non-positive triangle area after smoothing")
    ang = _tri_angles(mesh.vertices, mesh.elements).min(axis=1)
    floors = _min_angle_floor(spec, mesh.corner_id, mesh.elements)
    bad = np.where(ang < floors - 1e-12)[0]
    if len(bad):
        worst = bad[np.argmin(ang[bad])]
        c = mesh.vertices[mesh.elements[worst]].mean(axis=0)
        raise MeshingError(
            f"min angle {math.degrees(ang[worst]):.2f} deg below floor near {tuple(c)}")
    emax = mesh.edge_lengths().max()
    if emax > 2 * mesh.h + 1e-12:
        raise MeshingError(f"max edge {emax:.4g} exceeds 2h = {2 * mesh.h:.4g}")


def refine_uniform(mesh: Mesh, spec: DomainSpec2D) -> Mesh:
    """Split every triangle into 4 by edge midpoints.

    Midpoints of boundary edges are snapped to the owning segment curve, so
    arc boundaries stay on the arc under repeated refinement. Corners never
    move.
    """
    if mesh.dim != 2:
        raise MeshingError("refine_uniform expects a 2D mesh")
    segs = spec.segments()
    pts = list(map(tuple, mesh.vertices))
    boundary = list(mesh.boundary)
    seg_tag = list(mesh.seg_tag)
    corner_id = list(mesh.corner_id)

    bedges = {(min(a, b), max(a, b)) for a, b in mesh.boundary_edges()}
    midpoint = {}

    def get_mid(a, b):
        key = (min(a, b), max(a, b))
        if key in midpoint:
            return midpoint[key]
        p = 0.5 * (mesh.vertices[a] + mesh.vertices[b])
        on_boundary = key in bedges
        tag = -1
        if on_boundary:
            ta, tb = mesh.seg_tag[a], mesh.seg_tag[b]
            tag = tb if mesh.corner_id[a] >= 0 else ta
            p = np.asarray(segs[tag].snap(p))
        idx = len(pts)
        pts.append((p[0], p[1]))
        boundary.append(on_boundary)
        seg_tag.append(tag)
        corner_id.append(-1)
        midpoint[key] = idx
        return idx

    new_els = np.empty((4 * len(mesh.elements), 3), int)
    for ei, (i, j, k) in enumerate(mesh.elements):
        a = get_mid(i, j)
        b = get_mid(j, k)
        c = get_mid(k, i)
        new_els[4 * ei:4 * ei + 4] = [[i, a, c], [a, j, b], [c, b, k], [a, b, c]]

    new_pts = np.asarray(pts)
    area = _signed_area(new_pts, new_els)
    new_els[area < 0] = new_els[area < 0][:, ::-1]
    return Mesh(dim=2, vertices=new_pts, elements=new_els,
                boundary=np.asarray(boundary), seg_tag=np.asarray(seg_tag),
                corner_id=np.asarray(corner_id), h=mesh.h / 2, name=mesh.name)


# ---------------------------------------------------------------------------
# 3D: structured cube
# ---------------------------------------------------------------------------

_KUHN_PATHS = ((0, 1, 3, 7), (0, 1, 5, 7), (0, 2, 3, 7),
               (0, 2, 6, 7), (0, 4, 5, 7), (0, 4, 6, 7))


def mesh_cube(h: float) -> Mesh:
    """Structured tetrahedral mesh of the cube [-1/2, 1/2]^3.

    Each of the m^3 hexahedral cells (m = ceil(1/h)) is split into 6
    tetrahedra sharing the cell diagonal, which makes the mesh conforming
    across cells. Element volumes sum to 1 up to roundoff.
    """
    if h <= 0:
        raise MeshingError("h must be positive")
    m = int(math.ceil(1.0 / h - 1e-12))
    if m < 2:
        raise MeshingError(f"h={h} too coarse for the cube: needs >= 2 cells per axis")
    xs = np.linspace(-0.5, 0.5, m + 1)
    X, Y, Z = np.meshgrid(xs, xs, xs, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])

    def vid(i, j, k):
        return (i * (m + 1) + j) * (m + 1) + k

    I, J, K = np.meshgrid(np.arange(m), np.arange(m), np.arange(m), indexing="ij")
    I, J, K = I.ravel(), J.ravel(), K.ravel()
    cell = np.stack(
        [vid(I + a, J + b, K + c) for a, b, c in
         [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0),
          (0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)]], axis=1)
    tets = np.concatenate([cell[:, p] for p in _KUHN_PATHS], axis=0)
    p = pts[tets]
    vol6 = np.einsum("ei,ei->e", np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]),
                     p[:, 3] - p[:, 0])
    sw = vol6 < 0
    tets[sw] = tets[sw][:, [0, 1, 3, 2]]

    ii, jj, kk = np.meshgrid(np.arange(m + 1), np.arange(m + 1), np.arange(m + 1),
                             indexing="ij")
    on_face = [(ii == 0), (ii == m), (jj == 0), (jj == m), (kk == 0), (kk == m)]
    boundary = np.zeros((m + 1,) * 3, bool)
    face_tag = np.full((m + 1,) * 3, -1, int)
    for t, mask in enumerate(on_face):
        face_tag[mask & ~boundary] = t
        boundary |= mask
    extreme = (ii % m == 0).astype(int) + (jj % m == 0).astype(int) + (kk % m == 0).astype(int)
    corner_id = np.full((m + 1,) * 3, -1, int)
    cube_corners = np.where((extreme == 3).ravel())[0]
    corner_id.ravel()[cube_corners] = np.arange(len(cube_corners))

    return Mesh(dim=3, vertices=pts, elements=tets, boundary=boundary.ravel(),
                seg_tag=face_tag.ravel(), corner_id=corner_id.ravel(),
                h=1.0 / m, name="cube")

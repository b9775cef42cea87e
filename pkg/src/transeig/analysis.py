"""Averaged-L2 behavior of eigenfunctions near boundary features.

The central quantity is

    delta(v, F; r) = ||v||_{L2(D cap N_r(F))} / sqrt(|D cap N_r(F)|),

where N_r is a ball around a corner/vertex or a finite cylinder around an
edge. Numerator and denominator use the same quadrature: every element is
subdivided 4 levels deep into uniform sub-simplices (256 triangles / 4096
tetrahedra) and a sub-cell contributes its centroid value and measure iff
the centroid lies inside the neighborhood. A constant field therefore has
delta identically equal to its magnitude, whatever the boundary clipping
error; that identity is this module's basic self-test.

Fitted log-log slopes use the convention s = d log delta / d log r, so a
vanishing feature has s > 0 and a localizing one s < 0; tabulated positive
"orders" elsewhere correspond directly to s.
"""

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .meshing import Mesh

SUBDIV_LEVELS = 4
CLASSIFY_MIN_SLOPE = 0.1


@dataclass(frozen=True)
class FeatureSpec:
    """A boundary feature: a corner point or a straight edge segment."""
    kind: str                 # 'corner' | 'edge'
    point: tuple = None       # corner location
    endpoints: tuple = None   # edge (p0, p1)
    opening_angle: float = None
    label: str = ""

    def __post_init__(self):
        if self.kind == "corner":
            if self.point is None:
                raise ValueError("corner feature needs a point")
        elif self.kind == "edge":
            if self.endpoints is None or len(self.endpoints) != 2:
                raise ValueError("edge feature needs two endpoints")
        else:
            raise ValueError(f"unknown feature kind {self.kind!r}")

    def distance(self, pts: np.ndarray) -> np.ndarray:
        """Distance from points to the feature (vectorized)."""
        pts = np.atleast_2d(pts)
        if self.kind == "corner":
            p = np.asarray(self.point, float)
            return np.linalg.norm(pts - p, axis=1)
        p0 = np.asarray(self.endpoints[0], float)
        p1 = np.asarray(self.endpoints[1], float)
        d = p1 - p0
        L = np.linalg.norm(d)
        dhat = d / L
        t = np.clip((pts - p0) @ dhat, 0.0, L)
        return np.linalg.norm(pts - (p0 + t[:, None] * dhat), axis=1)


@dataclass(frozen=True)
class DeltaSeries:
    """Samples (r, delta) at radii halving toward a feature."""
    feature: FeatureSpec
    mode: int
    field: str                # 'u0' | 'u' | 'diff'
    radii: tuple
    deltas: tuple

    def __post_init__(self):
        r = np.asarray(self.radii, float)
        if (r <= 0).any():
            raise ValueError("radii must be positive")
        if len(r) >= 2:
            ratios = r[1:] / r[:-1]
            if not np.allclose(ratios, 0.5, rtol=1e-6, atol=0):
                raise ValueError("radii must decrease by factors of 2")
        if (np.asarray(self.deltas) < 0).any():
            raise ValueError("delta values cannot be negative")


@dataclass(frozen=True)
class RateFit:
    """Least-squares power law delta ~ amplitude * r**slope."""
    slope: float
    amplitude: float
    r_squared: float
    classification: str        # 'vanishing' | 'localizing' | 'indeterminate'
    n_used: int


@dataclass(frozen=True)
class AngleRateLaw:
    """Fit of slope-vs-angle data to s = a / omega + b."""
    a: float
    b: float
    residual: float
    r_squared: float


@lru_cache(maxsize=None)
def _subdivision(dim: int, levels: int = SUBDIV_LEVELS):
    """Barycentric centroids and relative measures of the uniform
    sub-simplex subdivision of the reference simplex."""
    if dim == 2:
        cells = [np.eye(3)]
        for _ in range(levels):
            nxt = []
            for B in cells:
                b0, b1, b2 = B
                m01, m12, m20 = 0.5 * (b0 + b1), 0.5 * (b1 + b2), 0.5 * (b2 + b0)
                nxt += [np.array([b0, m01, m20]), np.array([m01, b1, m12]),
                        np.array([m20, m12, b2]), np.array([m01, m12, m20])]
            cells = nxt
    else:
        def split(B):
            b = list(B)
            m = {(i, j): 0.5 * (b[i] + b[j]) for i in range(4) for j in range(i + 1, 4)}
            m01, m02, m03 = m[(0, 1)], m[(0, 2)], m[(0, 3)]
            m12, m13, m23 = m[(1, 2)], m[(1, 3)], m[(2, 3)]
            return [np.array([b[0], m01, m02, m03]), np.array([m01, b[1], m12, m13]),
                    np.array([m02, m12, b[2], m23]), np.array([m03, m13, m23, b[3]]),
                    np.array([m01, m02, m03, m13]), np.array([m01, m02, m12, m13]),
                    np.array([m02, m03, m13, m23]), np.array([m02, m12, m13, m23])]
        cells = [np.eye(4)]
        for _ in range(levels):
            cells = [child for B in cells for child in split(B)]
    centroids = np.array([B.mean(axis=0) for B in cells])
    meas = np.array([abs(np.linalg.det((B[1:] - B[0])[:, 1:])) for B in cells])
    meas /= meas.sum()
    centroids.setflags(write=False)
    meas.setflags(write=False)
    return centroids, meas


def local_mesh_size(mesh: Mesh, feature: FeatureSpec) -> float:
    """Mean element diameter measure (|T|^(1/dim)) next to the feature."""
    d = feature.distance(mesh.vertices)
    near_v = np.where(d <= d.min() + 2 * mesh.h + 1e-12)[0]
    mask = np.isin(mesh.elements, near_v).any(axis=1)
    if not mask.any():
        mask[:] = True
    meas = np.abs(mesh.measures()[mask])
    return float(np.mean(meas ** (1.0 / mesh.dim)))


def _profile(mesh: Mesh, fields: dict, feature: FeatureSpec, radii,
             chunk: int = 4096):
    """Shared-quadrature sums for several fields and radii in one sweep.

    Returns {field: deltas array}, plus the neighborhood measures.
    """
    radii = np.asarray(radii, float)
    rmax = radii.max()
    cent_b, w_b = _subdivision(mesh.dim)
    pts = mesh.vertices
    els = mesh.elements
    dmin = feature.distance(pts[els].reshape(-1, mesh.dim)).reshape(len(els), -1).min(axis=1)
    pad = mesh.edge_lengths().max()
    cand = np.where(dmin <= rmax + pad)[0]
    if len(cand) == 0:
        raise ValueError("no elements near the feature: radius too small for this mesh")
    meas_all = np.abs(mesh.measures())
    num = {name: np.zeros(len(radii)) for name in fields}
    den = np.zeros(len(radii))
    for s in range(0, len(cand), chunk):
        idx = cand[s:s + chunk]
        everts = pts[els[idx]]                                   # (e, dim+1, dim)
        cen = np.einsum("cb,ebd->ecd", cent_b, everts)
        dist = feature.distance(cen.reshape(-1, mesh.dim)).reshape(len(idx), -1)
        meas = meas_all[idx][:, None] * w_b[None, :]
        vals2 = {}
        for name, vec in fields.items():
            fc = np.einsum("cb,eb->ec", cent_b, vec[els[idx]])
            vals2[name] = np.abs(fc) ** 2
        for ri, r in enumerate(radii):
            mask = dist <= r
            if not mask.any():
                continue
            mm = meas * mask
            den[ri] += mm.sum()
            for name in fields:
                num[name][ri] += (mm * vals2[name]).sum()
    if (den == 0).any():
        bad = radii[den == 0]
        raise ValueError(f"empty neighborhood at radii {bad}: below mesh resolution")
    return {name: np.sqrt(num[name] / den) for name in fields}, den


def delta_corner(field: np.ndarray, mesh: Mesh, point, r: float) -> float:
    """Averaged L2 norm of a vertex field over the r-ball around a corner.

    ``field`` is vertex-ordered. The point must lie on the boundary; r must
    exceed twice the local mesh size to be meaningful and stay below the
    domain diameter.
    """
    feature = FeatureSpec("corner", point=tuple(np.asarray(point, float)))
    _check_radius(mesh, feature, r)
    prof, _ = _profile(mesh, {"f": np.asarray(field)}, feature, [r])
    return float(prof["f"][0])


def delta_edge(field: np.ndarray, mesh: Mesh, endpoints, r: float) -> float:
    """Cylinder version of delta_corner for a straight edge (3D)."""
    feature = FeatureSpec("edge", endpoints=(tuple(endpoints[0]), tuple(endpoints[1])))
    _check_radius(mesh, feature, r)
    prof, _ = _profile(mesh, {"f": np.asarray(field)}, feature, [r])
    return float(prof["f"][0])


def _check_radius(mesh, feature, r):
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    diam = float(np.linalg.norm(hi - lo))
    if r > diam:
        raise ValueError(f"radius {r} exceeds the domain diameter {diam:.3g}")
    if feature.kind == "corner":
        d = feature.distance(mesh.vertices[mesh.boundary])
        if d.min() > 1e-7:
            raise ValueError(f"feature point {feature.point} is not on the boundary")
    h_loc = local_mesh_size(mesh, feature)
    if r <= 2 * h_loc:
        raise ValueError(f"radius {r} below resolution: needs r > 2 x local mesh "
                         f"size ({h_loc:.3g})")


def radii_schedule(mesh: Mesh, feature: FeatureSpec, scale: float = 1.0,
                   levels: int = 5):
    """Default halving radii scale * (1/2, ..., 2^-levels), floored so the
    smallest kept radius is at least 4 local mesh sizes."""
    rs = scale * 0.5 ** np.arange(1, levels + 1)
    floor = 4.0 * local_mesh_size(mesh, feature)
    kept = rs[rs >= floor]
    if len(kept) < len(rs):
        warnings.warn(f"dropped {len(rs) - len(kept)} radii below the 4h floor "
                      f"({floor:.3g})", stacklevel=2)
    return tuple(kept)


def delta_series(mesh: Mesh, field: np.ndarray, feature: FeatureSpec,
                 radii, mode: int = 0, field_name: str = "u0") -> DeltaSeries:
    """Evaluate delta over a radii schedule (single sweep over elements)."""
    radii = tuple(float(r) for r in radii)
    for r in radii:
        _check_radius(mesh, feature, r)
    prof, _ = _profile(mesh, {field_name: np.asarray(field)}, feature, radii)
    return DeltaSeries(feature=feature, mode=mode, field=field_name,
                       radii=radii, deltas=tuple(prof[field_name]))


def delta_profiles(mesh: Mesh, fields: dict, feature: FeatureSpec, radii) -> dict:
    """Delta values for several vertex fields at several radii in one sweep.

    ``fields`` maps arbitrary keys to vertex-ordered arrays; the expensive
    geometry (sub-cell centroids and distances) is computed once and shared
    across all of them.
    """
    radii = tuple(float(r) for r in radii)
    for r in radii:
        _check_radius(mesh, feature, r)
    prof, _ = _profile(mesh, {k: np.asarray(v) for k, v in fields.items()},
                       feature, radii)
    return prof


def fit_rate(series: DeltaSeries) -> RateFit:
    """Ordinary least squares of log delta against log r.

    Zero deltas are dropped with a warning (their logs are undefined);
    fewer than 4 usable samples is an error.
    """
    r = np.asarray(series.radii, float)
    d = np.asarray(series.deltas, float)
    usable = d > 0
    if not usable.all():
        warnings.warn(f"dropping {int((~usable).sum())} zero delta samples "
                      "before fitting", stacklevel=2)
    r, d = r[usable], d[usable]
    if len(r) < 4:
        raise ValueError(f"need at least 4 usable samples to fit, have {len(r)}")
    lx = np.log(r)
    ly = np.log(d)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(((ly - pred) ** 2).sum())
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    if slope > CLASSIFY_MIN_SLOPE:
        cls = "vanishing"
    elif slope < -CLASSIFY_MIN_SLOPE:
        cls = "localizing"
    else:
        cls = "indeterminate"
    return RateFit(slope=float(slope), amplitude=float(np.exp(intercept)),
                   r_squared=float(min(max(r2, 0.0), 1.0)), classification=cls,
                   n_used=len(r))


def fit_angle_law(points) -> AngleRateLaw:
    """Least squares fit of slope-vs-angle data to s = a / omega + b."""
    pts = [(float(w), float(s)) for w, s in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 (omega, slope) points")
    omegas = np.array([p[0] for p in pts])
    if len(np.unique(omegas)) < len(omegas):
        raise ValueError("angles must be distinct")
    slopes = np.array([p[1] for p in pts])
    X = np.column_stack([1.0 / omegas, np.ones(len(omegas))])
    coef, res, rank, _ = np.linalg.lstsq(X, slopes, rcond=None)
    if rank < 2:
        raise ValueError("degenerate design matrix")
    pred = X @ coef
    ss_res = float(((slopes - pred) ** 2).sum())
    ss_tot = float(((slopes - slopes.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return AngleRateLaw(a=float(coef[0]), b=float(coef[1]),
                        residual=math.sqrt(ss_res),
                        r_squared=float(min(max(r2, 0.0), 1.0)))


@dataclass(frozen=True)
class SpectralReport:
    """Conjugate pairing and sanity flags over a computed spectrum."""
    n_real: int
    conjugate_pairs: tuple      # (i, j) index pairs
    purely_imaginary: tuple     # indices with Re k ~ 0, Im k != 0
    unmatched: tuple            # complex eigenvalues without a conjugate partner

    @property
    def clean(self) -> bool:
        return not self.purely_imaginary and not self.unmatched


def spectral_checks(ks) -> SpectralReport:
    """Pair conjugates and flag violations.

    A k with |Re k| < 1e-8 and |Im k| > 1e-6 is flagged purely imaginary
    (forbidden for a real index of constant sign); complex eigenvalues must
    appear as conjugate pairs within 1e-6 relative.
    """
    ks = [complex(k) for k in ks]
    if not ks:
        raise ValueError("empty spectrum")
    is_complex = [abs(k.imag) > 1e-6 * max(1.0, abs(k)) for k in ks]
    n_real = sum(1 for c in is_complex if not c)
    imag_flags = tuple(i for i, k in enumerate(ks)
                       if abs(k.real) < 1e-8 and abs(k.imag) > 1e-6)
    pairs = []
    used = set()
    for i, k in enumerate(ks):
        if not is_complex[i] or i in used:
            continue
        best = None
        for j in range(i + 1, len(ks)):
            if j in used or not is_complex[j]:
                continue
            if abs(ks[j] - k.conjugate()) <= 1e-6 * max(1.0, abs(k)):
                best = j
                break
        if best is not None:
            pairs.append((i, best))
            used.update((i, best))
    unmatched = tuple(i for i, c in enumerate(is_complex)
                      if c and i not in used)
    return SpectralReport(n_real=n_real, conjugate_pairs=tuple(pairs),
                          purely_imaginary=imag_flags, unmatched=unmatched)

"""Planar domains bounded by straight segments and circular arcs.

Domains are described by closed loops of :class:`BoundarySegment`. Corner
points (tangent discontinuities) are detected automatically and carry their
interior opening angle. ``builtin_domain`` provides the catalogue of study
domains with exact vertex coordinates.
"""

import math
from dataclasses import dataclass, field

import numpy as np

_ARC_TOL = 1e-12


@dataclass(frozen=True)
class BoundarySegment:
    """One piece of a domain boundary: a straight segment or a circular arc.

    For arcs, ``orientation`` is +1 when the arc is traversed
    counterclockwise around ``center`` and -1 for clockwise. Endpoints must
    lie on the circle within 1e-12 relative tolerance.
    """

    kind: str                      # 'straight' | 'arc'
    p0: tuple
    p1: tuple
    center: tuple = None
    radius: float = None
    orientation: int = 1

    def __post_init__(self):
        if self.kind not in ("straight", "arc"):
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if self.kind == "arc":
            if self.center is None or self.radius is None:
                raise ValueError("arc segment needs center and radius")
            for p in (self.p0, self.p1):
                r = math.hypot(p[0] - self.center[0], p[1] - self.center[1])
                if abs(r - self.radius) > _ARC_TOL * max(1.0, self.radius):
                    raise ValueError(
                        f"arc endpoint {p} is off the circle: |p-c|={r!r}, radius={self.radius!r}")
            if self.orientation not in (-1, 1):
                raise ValueError("arc orientation must be +1 or -1")

    # -- arc angle bookkeeping ------------------------------------------------

    def _angles(self):
        c = self.center
        a0 = math.atan2(self.p0[1] - c[1], self.p0[0] - c[0])
        a1 = math.atan2(self.p1[1] - c[1], self.p1[0] - c[0])
        if self.orientation > 0:
            while a1 <= a0 + 1e-14:
                a1 += 2 * math.pi
        else:
            while a1 >= a0 - 1e-14:
                a1 -= 2 * math.pi
        return a0, a1

    def length(self) -> float:
        if self.kind == "straight":
            return math.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1])
        a0, a1 = self._angles()
        return abs(a1 - a0) * self.radius

    def point_at(self, t: float):
        """Point at arclength fraction t in [0, 1]."""
        if self.kind == "straight":
            return (self.p0[0] + t * (self.p1[0] - self.p0[0]),
                    self.p0[1] + t * (self.p1[1] - self.p0[1]))
        a0, a1 = self._angles()
        a = a0 + t * (a1 - a0)
        return (self.center[0] + self.radius * math.cos(a),
                self.center[1] + self.radius * math.sin(a))

    def tangent_at(self, t: float):
        """Unit tangent in the traversal direction at fraction t."""
        if self.kind == "straight":
            d = (self.p1[0] - self.p0[0], self.p1[1] - self.p0[1])
            L = math.hypot(*d)
            return (d[0] / L, d[1] / L)
        a0, a1 = self._angles()
        a = a0 + t * (a1 - a0)
        s = 1.0 if self.orientation > 0 else -1.0
        return (-s * math.sin(a), s * math.cos(a))

    def snap(self, p):
        """Project a nearby point onto the segment curve.

        Straight segments return the orthogonal projection clamped to the
        segment; arcs project radially onto the circle.
        """
        if self.kind == "straight":
            a = np.asarray(self.p0, float)
            b = np.asarray(self.p1, float)
            ab = b - a
            t = float(np.dot(np.asarray(p, float) - a, ab) / np.dot(ab, ab))
            t = min(1.0, max(0.0, t))
            q = a + t * ab
            return (q[0], q[1])
        c = np.asarray(self.center, float)
        v = np.asarray(p, float) - c
        nv = math.hypot(v[0], v[1])
        if nv == 0.0:
            return tuple(self.p0)
        q = c + v * (self.radius / nv)
        return (q[0], q[1])

    def chord_area_correction(self) -> float:
        """Signed area between the arc and its chord (zero for straight).

        Positive when the arc bulges to the left of the chord, so that
        adding the corrections to the shoelace area of the endpoint polygon
        yields the exact region area.
        """
        if self.kind == "straight":
            return 0.0
        a0, a1 = self._angles()
        theta = a1 - a0      # signed sweep
        return 0.5 * self.radius ** 2 * (theta - math.sin(theta))


@dataclass(frozen=True)
class Corner:
    """Boundary point with discontinuous tangent and its interior angle."""
    point: tuple
    opening_angle: float
    loop: int = 0
    index: int = 0     # segment index whose start point this is


@dataclass(frozen=True)
class DomainSpec2D:
    """A bounded planar domain given by closed loops of boundary segments.

    The outer loop is traversed counterclockwise (domain on the left).
    Corners are computed at construction; a shared endpoint whose tangents
    agree within 1e-9 radians is not a corner.
    """

    loops: tuple
    name: str = ""
    corners: tuple = field(init=False, default=())

    def __post_init__(self):
        loops = tuple(tuple(loop) for loop in self.loops)
        object.__setattr__(self, "loops", loops)
        for li, loop in enumerate(loops):
            for si, seg in enumerate(loop):
                nxt = loop[(si + 1) % len(loop)]
                if not np.allclose(seg.p1, nxt.p0, rtol=0, atol=1e-12):
                    raise ValueError(
                        f"loop {li}: segment {si} ends at {seg.p1} but the next starts at {nxt.p0}")
        corners = []
        for li, loop in enumerate(loops):
            for si, seg in enumerate(loop):
                prev = loop[(si - 1) % len(loop)]
                t_in = prev.tangent_at(1.0)
                t_out = seg.tangent_at(0.0)
                turn = math.atan2(t_in[0] * t_out[1] - t_in[1] * t_out[0],
                                  t_in[0] * t_out[0] + t_in[1] * t_out[1])
                if abs(turn) < 1e-9:
                    continue
                omega = math.pi - turn
                if not (0.0 < omega < 2 * math.pi):
                    raise ValueError(f"degenerate corner at {seg.p0}: omega={omega}")
                corners.append(Corner(tuple(seg.p0), omega, li, si))
        object.__setattr__(self, "corners", tuple(corners))

    def segments(self):
        """All segments, flattened over loops, in traversal order."""
        return [seg for loop in self.loops for seg in loop]

    def area(self) -> float:
        """Exact area: shoelace over endpoints plus circular-segment terms."""
        total = 0.0
        for loop in self.loops:
            pts = [seg.p0 for seg in loop]
            n = len(pts)
            sh = 0.0
            for i in range(n):
                x0, y0 = pts[i]
                x1, y1 = pts[(i + 1) % n]
                sh += x0 * y1 - x1 * y0
            total += 0.5 * sh + sum(seg.chord_area_correction() for seg in loop)
        return total

    def bounding_box(self):
        pts = []
        for seg in self.segments():
            # arcs can extend past their endpoints; sample them
            if seg.kind == "arc":
                pts.extend(seg.point_at(t) for t in np.linspace(0, 1, 33))
            else:
                pts.append(seg.p0)
                pts.append(seg.p1)
        pts = np.asarray(pts)
        return pts.min(axis=0), pts.max(axis=0)

    def diameter(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.hypot(*(hi - lo)))


def polyline(spec: DomainSpec2D, h: float):
    """Discretize the boundary at spacing at most h.

    Returns
    -------
    points : (n, 2) array, loop points in traversal order (loops concatenated)
    seg_tag : (n,) int array, flattened segment index owning each point
    corner_id : (n,) int array, corner index or -1
    loop_slices : list of slice, one per loop
    """
    pts, tags, cids, slices = [], [], [], []
    corner_lookup = {(c.loop, c.index): k for k, c in enumerate(spec.corners)}
    flat = 0
    for li, loop in enumerate(spec.loops):
        start = len(pts)
        for si, seg in enumerate(loop):
            nsub = max(2, int(math.ceil(seg.length() / h - 1e-12)))
            for j in range(nsub):            # excludes t=1 (next segment's start)
                pts.append(seg.point_at(j / nsub))
                tags.append(flat)
                cids.append(corner_lookup.get((li, si), -1) if j == 0 else -1)
            flat += 1
        slices.append(slice(start, len(pts)))
    return np.asarray(pts), np.asarray(tags), np.asarray(cids), slices


def contains(spec: DomainSpec2D, points, resolution=None) -> np.ndarray:
    """Even-odd test against the discretized boundary polyline."""
    res = resolution or max(spec.diameter() / 512.0, 1e-6)
    pts, _, _, slices = polyline(spec, res)
    inside = np.zeros(len(np.atleast_2d(points)), dtype=bool)
    P = np.atleast_2d(np.asarray(points, float))
    for sl in slices:
        loop = pts[sl]
        inside ^= _crossing_parity(P, loop)
    return inside


def _crossing_parity(P, loop):
    x, y = P[:, 0], P[:, 1]
    x0, y0 = loop[:, 0], loop[:, 1]
    x1 = np.roll(x0, -1)
    y1 = np.roll(y0, -1)
    inside = np.zeros(len(P), dtype=bool)
    for i in range(len(loop)):
        cond = (y0[i] > y) != (y1[i] > y)
        if not cond.any():
            continue
        xi = (x1[i] - x0[i]) * (y - y0[i]) / (y1[i] - y0[i] + 1e-300) + x0[i]
        inside ^= cond & (x < xi)
    return inside


def enclosing_circle(points):
    """Smallest circle containing the points (Welzl, randomized iterative).

    Returns (center, radius).
    """
    pts = [tuple(p) for p in np.asarray(points, float)]
    rng = np.random.default_rng(1234)
    order = rng.permutation(len(pts))

    def circle_two(a, b):
        c = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
        return c, math.hypot(a[0] - c[0], a[1] - c[1])

    def circle_three(a, b, c):
        ax, ay = a; bx, by = b; cx, cy = c
        d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
        if abs(d) < 1e-300:
            return None
        ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay)
              + (cx**2 + cy**2) * (ay - by)) / d
        uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx)
              + (cx**2 + cy**2) * (bx - ax)) / d
        ctr = (ux, uy)
        return ctr, math.hypot(ax - ux, ay - uy)

    def inside(circ, p, eps=1e-10):
        c, r = circ
        return math.hypot(p[0] - c[0], p[1] - c[1]) <= r * (1 + eps) + 1e-14

    circ = (pts[order[0]], 0.0)
    for ii, i in enumerate(order):
        p = pts[i]
        if inside(circ, p):
            continue
        circ = (p, 0.0)
        for jj in range(ii):
            q = pts[order[jj]]
            if inside(circ, q):
                continue
            circ = circle_two(p, q)
            for kk in range(jj):
                s = pts[order[kk]]
                if inside(circ, s):
                    continue
                c3 = circle_three(p, q, s)
                if c3 is not None:
                    circ = c3
    return circ


# ---------------------------------------------------------------------------
# Built-in domains
# ---------------------------------------------------------------------------

def _polygon(verts, name):
    segs = [BoundarySegment("straight", tuple(verts[i]), tuple(verts[(i + 1) % len(verts)]))
            for i in range(len(verts))]
    return DomainSpec2D((tuple(segs),), name=name)


def builtin_domain(name: str, params=()) -> DomainSpec2D:
    """Construct one of the catalogued study domains.

    Parameters
    ----------
    name : str
        One of ``equilateral_triangle``, ``right_triangle``, ``arrow``,
        ``moon``, ``unit_square``, ``isosceles``, ``sector``, ``disk``.
    params : sequence of float
        ``isosceles`` takes (height, apex_angle); ``sector`` takes
        (radius, angle); ``disk`` takes (radius,). Others take none.

    Returns
    -------
    DomainSpec2D with exact vertex coordinates and computed corner angles.
    """
    params = tuple(float(p) for p in params)
    s3 = math.sqrt(3.0)
    if name == "equilateral_triangle":
        return _polygon([(-1.0, 0.0), (1.0, 0.0), (0.0, s3)], name)
    if name == "right_triangle":
        return _polygon([(s3, 0.0), (0.0, 1.0), (0.0, 0.0)], name)
    if name == "arrow":
        return _polygon([(0.0, s3 / 3), (1.0, 0.0), (0.0, s3), (-1.0, 0.0)], name)
    if name == "unit_square":
        return _polygon([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)], name)
    if name == "moon":
        # lens-complement between unit circles centered (-1/2,0) and (1/2,0);
        # corners at (0, +-sqrt(3)/2), both with opening angle pi/3
        top = (0.0, s3 / 2)
        bot = (0.0, -s3 / 2)
        outer = BoundarySegment("arc", top, bot, center=(-0.5, 0.0), radius=1.0, orientation=1)
        inner = BoundarySegment("arc", bot, top, center=(0.5, 0.0), radius=1.0, orientation=-1)
        return DomainSpec2D(((outer, inner),), name=name)
    if name == "isosceles":
        if len(params) != 2:
            raise ValueError("isosceles needs (height, apex_angle)")
        height, omega = params
        if height <= 0 or not (0 < omega < math.pi):
            raise ValueError(f"isosceles parameters out of range: {params}")
        w = height * math.tan(omega / 2)
        return _polygon([(-w, 0.0), (w, 0.0), (0.0, height)], name)
    if name == "sector":
        if len(params) != 2:
            raise ValueError("sector needs (radius, angle)")
        radius, omega = params
        if radius <= 0 or not (0 < omega < 2 * math.pi):
            raise ValueError(f"sector parameters out of range: {params}")
        tip = (0.0, 0.0)
        a = (radius, 0.0)
        b = (radius * math.cos(omega), radius * math.sin(omega))
        segs = (BoundarySegment("straight", tip, a),
                BoundarySegment("arc", a, b, center=tip, radius=radius, orientation=1),
                BoundarySegment("straight", b, tip))
        return DomainSpec2D((segs,), name=name)
    if name == "disk":
        radius = params[0] if params else 1.0
        if radius <= 0:
            raise ValueError("disk radius must be positive")
        left = (-radius, 0.0)
        right = (radius, 0.0)
        segs = (BoundarySegment("arc", right, left, center=(0.0, 0.0), radius=radius, orientation=1),
                BoundarySegment("arc", left, right, center=(0.0, 0.0), radius=radius, orientation=1))
        return DomainSpec2D((segs,), name=name)
    raise ValueError(f"unknown domain {name!r}")

"""Semi-analytic transmission eigenvalues of the unit disk and unit ball.

Separating variables for a constant coefficient n turns the coupled pair
into a one-dimensional matching condition per angular order m:

    d_m(k) = J_m(k sqrt(n)) J'_m(k) - sqrt(n) J_m(k) J'_m(k sqrt(n))

(with spherical Bessel functions in three dimensions). Its positive roots
are the eigenvalues; the smallest over all orders is the first one. This
module is the independent cross-check for the finite element pipeline and
also supplies the ball quantities used by the search lower bound.
"""

import numpy as np

from .bessel import bessel_j, spherical_jn, bisect_zero

SCAN_CAP = 50.0
SCAN_STEP = 1e-3
MAX_BAND = 40


def radial_determinant(m: int, k, n: float, dim: int = 2):
    """Evaluate d_m(k); vectorized over k. Identically zero when n = 1."""
    if n <= 0:
        raise ValueError("index must be positive")
    if dim not in (2, 3):
        raise ValueError("dim must be 2 or 3")
    rn = np.sqrt(n)
    fj = bessel_j if dim == 2 else spherical_jn
    j_in, jp_in = fj(m, np.asarray(k, float) * rn)
    j_out, jp_out = fj(m, k)
    return j_in * jp_out - rn * j_out * jp_in


def _first_root_in_band(m, n, dim, cap, step):
    """Smallest positive root of d_m below cap, or None."""
    # chunked sign-change scan, then bisection
    lo = step
    chunk = 2048
    while lo < cap:
        ks = lo + step * np.arange(chunk + 1)
        ks = ks[ks <= cap + 0.5 * step]
        if len(ks) < 2:
            break
        d = radial_determinant(m, ks, n, dim)
        hits = _sign_changes(d)
        if len(hits):
            i = hits[0]
            f = lambda k: float(radial_determinant(m, k, n, dim))
            return bisect_zero(f, float(ks[i]), float(ks[i + 1]), tol=1e-12)
        lo = float(ks[-1])  # grid is inclusive of lo, so no interval is skipped
    return None


def _sign_changes(d, floor=1e-60):
    """Bracketing intervals, ignoring underflow noise near k = 0.

    High orders give d ~ k^(2m-1), which underflows to subnormal garbage at
    the start of the scan; a sign change only counts when at least one
    endpoint has meaningful magnitude.
    """
    s = np.sign(d)
    mag_ok = np.maximum(np.abs(d[:-1]), np.abs(d[1:])) > floor
    return np.where((s[:-1] * s[1:] <= 0) & (s[:-1] != s[1:]) & mag_ok)[0]


def _first_te(n: float, dim: int) -> float:
    if n == 1.0:
        raise ValueError("index n = 1 is degenerate: the determinant vanishes identically")
    if not (n > 0):
        raise ValueError("index must be positive")
    best = None
    for m in range(MAX_BAND + 1):
        cap = best if best is not None else SCAN_CAP
        root = _first_root_in_band(m, n, dim, cap + 10 * SCAN_STEP, SCAN_STEP)
        if root is None and m == 0 and best is None:
            # fine second pass before deciding the band is empty
            root = _first_root_in_band(m, n, dim, SCAN_CAP, SCAN_STEP / 10)
        if root is not None and (best is None or root < best):
            best = root
    if best is None:
        raise RuntimeError(f"no transmission eigenvalue found below scan cap {SCAN_CAP}")
    return best


def disk_first_te(n: float) -> float:
    """First positive transmission eigenvalue of the unit disk, constant n."""
    return _first_te(n, dim=2)


def ball_first_te(n: float) -> float:
    """First positive transmission eigenvalue of the unit ball, constant n."""
    return _first_te(n, dim=3)


def roots_by_order(n: float, dim: int = 2, mmax: int = MAX_BAND,
                   cap: float = 10.0, per_order: int = 3):
    """First few determinant roots for each angular order (diagnostics).

    Returns a list of (m, root) pairs, ordered by m then k.
    """
    out = []
    for m in range(mmax + 1):
        lo = SCAN_STEP
        found = 0
        while found < per_order and lo < cap:
            ks = np.arange(lo, cap + SCAN_STEP, SCAN_STEP)
            if len(ks) < 2:
                break
            d = radial_determinant(m, ks, n, dim)
            hits = _sign_changes(d)
            if not len(hits):
                break
            i = hits[0]
            f = lambda k: float(radial_determinant(m, k, n, dim))
            root = bisect_zero(f, float(ks[i]), float(ks[i + 1]), tol=1e-12)
            out.append((m, root))
            found += 1
            lo = root + 2 * SCAN_STEP
    return out

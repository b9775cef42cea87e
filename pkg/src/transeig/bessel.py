"""Bessel functions of the first kind, cylindrical and spherical.

Evaluation is by downward (Miller) recurrence with normalization, with a
power series for very small arguments. Everything here is self-contained
so the semi-analytic eigenvalue oracle stays independent of the sparse
linear algebra used by the finite element pipeline.

Valid ranges: order m <= 60, argument 0 <= x <= 200, absolute error about
1e-10 or better.
"""

import math

import numpy as np

MAX_ORDER = 60
MAX_ARG = 200.0
_RESCALE = 1e250


def _series_jm(m, x):
    # power series at small x; 50 terms is far more than needed there
    half = x / 2.0
    term = half ** m / math.factorial(m) if np.isscalar(x) else half ** m / math.factorial(m)
    total = term
    x2 = half * half
    for j in range(1, 50):
        term = -term * x2 / (j * (m + j))
        total = total + term
    return total


def _miller(m, x):
    """J_m and J_{m-1} (J_1 when m = 0) for positive array x."""
    x = np.asarray(x, float)
    xmax = float(x.max())
    N = max(m + 30, int(1.5 * xmax) + 30)
    if N % 2:
        N += 1
    jp = np.zeros_like(x)            # J_{k+1}, unscaled
    jc = np.full_like(x, 1e-280)     # J_k
    even_sum = np.zeros_like(x)      # sum of J_j for even j >= 2
    want = {m: None, (m - 1) if m >= 1 else (m + 1): None}
    for k in range(N, 0, -1):
        jn = (2.0 * k / x) * jc - jp
        jp, jc = jc, jn              # jc is now J_{k-1}
        idx = k - 1
        big = np.abs(jc) > _RESCALE
        if big.any():
            scale = np.where(big, 1.0 / _RESCALE, 1.0)
            jc = jc * scale
            jp = jp * scale
            even_sum = even_sum * scale
            for key in want:
                if want[key] is not None:
                    want[key] = want[key] * scale
        if idx in want:
            want[idx] = jc.copy()
        if idx >= 2 and idx % 2 == 0:
            even_sum = even_sum + jc
    norm = jc + 2.0 * even_sum       # equals 1/scale by sum rule
    out = {key: val / norm for key, val in want.items() if val is not None}
    return out


def bessel_j(m: int, x):
    """J_m(x) and its derivative J'_m(x).

    Parameters
    ----------
    m : int
        Order, 0 <= m <= 60.
    x : float or array
        Argument(s) in [0, 200].

    Returns
    -------
    (J_m, J'_m) as floats or arrays matching x.
    """
    if not (0 <= m <= MAX_ORDER):
        raise ValueError(f"order {m} outside [0, {MAX_ORDER}]")
    scalar = np.isscalar(x) or np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, float))
    if (x < 0).any() or (x > MAX_ARG).any():
        raise ValueError(f"argument outside [0, {MAX_ARG}]")
    J = np.empty_like(x)
    Jp = np.empty_like(x)

    zero = x == 0.0
    if zero.any():
        J[zero] = 1.0 if m == 0 else 0.0
        Jp[zero] = 0.5 if m == 1 else 0.0
    pos = ~zero
    if pos.any():
        xp = x[pos]
        tiny = xp < 1e-6
        if tiny.any():
            xt = xp[tiny]
            jm = _series_jm(m, xt)
            if m == 0:
                jd = -_series_jm(1, xt)
            else:
                jd = _series_jm(m - 1, xt) - (m / xt) * jm
            J[np.where(pos)[0][tiny]] = jm
            Jp[np.where(pos)[0][tiny]] = jd
        rest = ~tiny
        if rest.any():
            xr = xp[rest]
            vals = _miller(m, xr)
            jm = vals[m]
            if m == 0:
                jd = -vals[1]
            else:
                jd = vals[m - 1] - (m / xr) * jm
            J[np.where(pos)[0][rest]] = jm
            Jp[np.where(pos)[0][rest]] = jd
    if scalar:
        return float(J[0]), float(Jp[0])
    return J, Jp


def spherical_jn(l: int, x):
    """Spherical Bessel j_l(x) and derivative j'_l(x).

    Closed sin/cos forms for l <= 2; downward recurrence normalized against
    j_0 or j_1 (whichever is better conditioned) above that.
    """
    if not (0 <= l <= MAX_ORDER):
        raise ValueError(f"order {l} outside [0, {MAX_ORDER}]")
    scalar = np.isscalar(x) or np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, float))
    if (x < 0).any() or (x > MAX_ARG).any():
        raise ValueError(f"argument outside [0, {MAX_ARG}]")
    j = np.empty_like(x)
    jp = np.empty_like(x)
    zero = x == 0.0
    if zero.any():
        j[zero] = 1.0 if l == 0 else 0.0
        jp[zero] = 1.0 / 3.0 if l == 1 else 0.0
    pos = ~zero
    if pos.any():
        xp = x[pos]
        jl, jlm1 = _spherical_pair(l, xp)
        j[pos] = jl
        if l == 0:
            jp[pos] = -_spherical_pair(1, xp)[0]
        else:
            jp[pos] = jlm1 - ((l + 1) / xp) * jl
    if scalar:
        return float(j[0]), float(jp[0])
    return j, jp


def _sph_series(l, x):
    # j_l(x) = x^l sum_j (-x^2/2)^j / (j! (2l+2j+1)!!), fast for small x
    dd = 1.0
    for i in range(3, 2 * l + 2, 2):
        dd *= i
    term = x ** l / dd
    total = term
    for j in range(1, 12):
        term = term * (-(x * x) / 2.0) / (j * (2 * l + 2 * j + 1))
        total = total + term
    return total


def _sph_closed(l, x):
    # the sin/cos forms cancel catastrophically near 0; switch to the series
    x = np.asarray(x, float)
    small = x < 0.5
    s, c = np.sin(x), np.cos(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        if l == 0:
            out = s / x
        elif l == 1:
            out = s / x ** 2 - c / x
        else:
            out = (3.0 / x ** 3 - 1.0 / x) * s - 3.0 * c / x ** 2
    if small.any():
        out = np.where(small, _sph_series(l, x), out)
    return out


def _spherical_pair(l, x):
    """(j_l, j_{l-1}) for positive array x; j_1 in the second slot when l=0."""
    if l <= 2:
        jl = _sph_closed(l, x)
        other = _sph_closed(1, x) if l == 0 else _sph_closed(l - 1, x)
        return jl, other
    xmax = float(x.max())
    N = max(l + 30, int(1.5 * xmax) + 30)
    jp = np.zeros_like(x)
    jc = np.full_like(x, 1e-280)
    saved = {l: None, l - 1: None, 1: None, 0: None}
    for k in range(N, 0, -1):
        jn = ((2.0 * k + 1.0) / x) * jc - jp
        jp, jc = jc, jn
        idx = k - 1
        big = np.abs(jc) > _RESCALE
        if big.any():
            scale = np.where(big, 1.0 / _RESCALE, 1.0)
            jc = jc * scale
            jp = jp * scale
            for key in saved:
                if saved[key] is not None:
                    saved[key] = saved[key] * scale
        if idx in saved:
            saved[idx] = jc.copy()
    j0 = _sph_closed(0, x)
    j1 = _sph_closed(1, x)
    use0 = np.abs(saved[0]) >= np.abs(saved[1])
    ratio = np.where(use0,
                     j0 / np.where(saved[0] == 0, 1.0, saved[0]),
                     j1 / np.where(saved[1] == 0, 1.0, saved[1]))
    return saved[l] * ratio, saved[l - 1] * ratio


def bisect_zero(fn, a: float, b: float, tol: float = 1e-12, max_iter: int = 200) -> float:
    """Bisection for a bracketed sign change of a scalar function."""
    fa = fn(a)
    fb = fn(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise ValueError(f"no sign change on [{a}, {b}]")
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        fm = fn(mid)
        if fm == 0.0 or (b - a) < tol:
            return mid
        if fa * fm < 0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)

"""Shift-invert Arnoldi solver for the transmission pencil.

The pencil has a J-dimensional eigenspace at lambda = 0 (any boundary
trace with matching harmonic extensions makes A X vanish), which would
dominate a plain (A - sigma B)^{-1} B iteration and stall ARPACK. The
spectral transformation used here is the Cayley form

    C = I + sigma (A - sigma B)^{-1} B,      c = lambda / (lambda - sigma),

which maps that entire cluster to c = 0 exactly while keeping eigenvalues
near the real shift sigma dominant; one sparse LU solve per matrix-vector
product, all in real arithmetic. Eigenvalues are recovered from
lambda = sigma c / (c - 1) and every residual is recomputed against the
original pencil.
"""

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError
from .assembly import Pencil, assemble_dirichlet
from .meshing import Mesh, partition_dofs

DEDUP_REL = 1e-6


@dataclass(frozen=True)
class SearchWindow:
    """Wavenumber interval to search, with the spectral shift.

    ``sigma`` lives in the lambda = k^2 plane and defaults to
    1.1 * k_min^2.
    """
    k_min: float
    k_max: float
    sigma: float = None
    count: int = 6

    def __post_init__(self):
        if not (0 < self.k_min < self.k_max):
            raise ValueError(f"need 0 < k_min < k_max, got [{self.k_min}, {self.k_max}]")
        if self.count < 1:
            raise ValueError("count must be positive")
        if self.sigma is None:
            object.__setattr__(self, "sigma", 1.1 * self.k_min ** 2)
        if not (self.k_min ** 2 <= self.sigma <= self.k_max ** 2):
            raise ValueError(f"sigma={self.sigma} outside [k_min^2, k_max^2]")


@dataclass(frozen=True)
class EigenPair:
    """One transmission eigenvalue with its discrete eigenfunctions.

    ``u0`` and ``u`` are partition-ordered coefficient vectors of length
    I+J (interior values then shared trace); ``x`` is the raw pencil
    vector. ``multiplicity`` counts the numerically coincident cluster the
    pair belongs to.
    """
    k: complex
    u0: np.ndarray
    u: np.ndarray
    x: np.ndarray
    residual: float
    multiplicity: int = 1

    def __post_init__(self):
        for arr in (self.u0, self.u, self.x):
            arr.setflags(write=False)

    @property
    def lam(self) -> complex:
        return self.k ** 2

    def is_real(self, tol=1e-8) -> bool:
        return abs(self.k.imag) <= tol * max(1.0, abs(self.k))


def lu_factor(M, pivot_threshold: float = 1.0):
    """Sparse LU with threshold partial pivoting.

    Raises SolverError on a numerically singular matrix, which during
    shift-invert signals that the shift hit an eigenvalue; the caller
    perturbs the shift and retries.
    """
    M = sp.csc_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", spla.MatrixRankWarning)
            return spla.splu(M, options={"DiagPivotThresh": pivot_threshold})
    except (RuntimeError, spla.MatrixRankWarning) as exc:
        raise SolverError(f"singular factorization: {exc}") from exc


def _residuals(A, B, lam, vecs):
    out = np.empty(len(lam))
    for j in range(len(lam)):
        x = vecs[:, j]
        out[j] = np.linalg.norm(A @ x - lam[j] * (B @ x)) / np.linalg.norm(x)
    return out


def _cayley_eigs(A, B, sigma, nev, ncv, v0):
    lu = None
    sig = sigma
    for attempt in range(5):
        try:
            lu = lu_factor(A - sig * B)
            break
        except SolverError:
            sig = sig * (1.0 + 1e-4) + 1e-8
    if lu is None:
        raise SolverError(f"(A - sigma B) stayed singular near sigma={sigma}")
    op = spla.LinearOperator(A.shape, matvec=lambda v: v + sig * lu.solve(B @ v))
    try:
        cvals, cvecs = spla.eigs(op, k=nev, which="LM", v0=v0, ncv=ncv)
    except spla.ArpackNoConvergence as exc:
        if exc.eigenvalues is None or len(exc.eigenvalues) == 0:
            raise SolverError(f"Arnoldi did not converge: {exc}") from exc
        cvals, cvecs = exc.eigenvalues, exc.eigenvectors
    keep = np.abs(cvals - 1.0) > 1e-12
    lam = np.full(len(cvals), np.inf, dtype=complex)
    lam[keep] = sig * cvals[keep] / (cvals[keep] - 1.0)
    return lam, cvecs, sig


def _dense_eigs(A, B):
    import scipy.linalg as la
    lam, vecs = la.eig(A.toarray(), B.toarray())
    finite = np.isfinite(lam)
    return lam[finite], vecs[:, finite]


def shift_invert_arnoldi(A, B, window: SearchWindow, tol: float = 1e-8,
                         pencil: Pencil = None):
    """All eigenpairs with |k| inside the window, sorted by |k|.

    Complex eigenvalues come back as conjugate duos; numerically coincident
    eigenvalues (relative gap below 1e-6) are merged into clusters whose
    size is reported as the multiplicity, with the cluster basis
    orthonormalized. Residuals are measured against (A, B), never the
    transformed operator, and pairs above ``tol`` are dropped.

    Returns a list of EigenPair when ``pencil`` is given (fields
    extracted), else a list of (k, x) tuples.
    """
    n = A.shape[0]
    rng = np.random.default_rng(0)
    v0 = rng.standard_normal(n)
    sigma = window.sigma

    dense = n < max(60, 3 * window.count + 2)
    nev = min(window.count + 6, max(2, n - 2))
    for round_ in range(4):
        if dense:
            lam, vecs = _dense_eigs(sp.csc_matrix(A), sp.csc_matrix(B))
            sig = sigma
        else:
            ncv = min(n - 1, max(3 * nev, 20))
            lam, vecs, sig = _cayley_eigs(A, B, sigma, nev, ncv, v0)
        k = np.sqrt(lam.astype(complex))
        in_win = (np.abs(k) >= window.k_min * (1 - 1e-12)) & \
                 (np.abs(k) <= window.k_max * (1 + 1e-12))
        got = int(in_win.sum())
        if dense or got >= window.count or nev >= n - 2 or nev >= 30 + 2 * window.count:
            break
        # spectrum may extend past what we asked for; widen and retry
        nev = min(max(2 * nev, nev + 8), max(2, n - 2))

    lam = lam[in_win]
    vecs = vecs[:, in_win]
    k = k[in_win]
    res = _residuals(A, B, lam, vecs)
    ok = res <= tol
    if not ok.all():
        dropped = res[~ok]
        warnings.warn(f"dropping {len(dropped)} unconverged Ritz pairs "
                      f"(residuals up to {dropped.max():.2e})", stacklevel=2)
    lam, vecs, k, res = lam[ok], vecs[:, ok], k[ok], res[ok]
    if len(lam) == 0:
        raise SolverError(
            f"no eigenvalues converged in window [{window.k_min}, {window.k_max}] "
            f"at sigma={sig}")

    order = np.argsort(np.abs(k), kind="stable")
    lam, vecs, k, res = lam[order], vecs[:, order], k[order], res[order]

    # multiplicity clusters: merge |k| gaps below DEDUP_REL, orthonormalize
    clusters = []
    start = 0
    for j in range(1, len(lam) + 1):
        if j == len(lam) or abs(lam[j] - lam[start]) > DEDUP_REL * max(1.0, abs(lam[start])):
            clusters.append(slice(start, j))
            start = j
    pairs = []
    for cl in clusters:
        size = cl.stop - cl.start
        block = vecs[:, cl]
        if size > 1:
            block, _ = np.linalg.qr(block)
        for col in range(size):
            x = block[:, col]
            if abs(x.imag).max() <= 1e-14 * max(abs(x.real).max(), 1e-300):
                x = x.real.astype(complex)
            kk = k[cl.start + col]
            if lam[cl.start + col].real < 0 and abs(lam[cl.start + col].imag) \
                    <= 1e-10 * abs(lam[cl.start + col].real):
                warnings.warn(f"negative real pencil eigenvalue {lam[cl.start + col]:.6g}: "
                              "k reported on the positive imaginary axis", stacklevel=2)
            r = float(np.linalg.norm(A @ x - lam[cl.start + col] * (B @ x))
                      / np.linalg.norm(x))
            if pencil is None:
                pairs.append((complex(kk), x))
            else:
                u, u0 = pencil.field_vectors(x)
                pairs.append(EigenPair(k=complex(kk), u0=u0, u=u, x=x,
                                       residual=r, multiplicity=size))
    return pairs


def normalize(pair: EigenPair, m1_full) -> EigenPair:
    """Scale so the free field has unit L2 norm, with a fixed phase.

    After normalization u0^H M u0 = 1 to 1e-12 and the largest-magnitude
    entry of u0 is real positive. u and the raw pencil vector are scaled by
    the same factor.
    """
    quad = np.vdot(pair.u0, m1_full @ pair.u0)
    nrm = np.sqrt(abs(quad))
    if nrm <= 1e-300:
        raise SolverError("zero eigenfunction: cannot normalize a degenerate Ritz vector")
    top = np.argmax(np.abs(pair.u0))
    phase = pair.u0[top] / abs(pair.u0[top])
    factor = 1.0 / (nrm * phase)
    return replace(pair, u0=pair.u0 * factor, u=pair.u * factor, x=pair.x * factor)


def dirichlet_lambda1(mesh: Mesh, tol: float = 1e-10, max_iter: int = 500) -> float:
    """Smallest Dirichlet eigenvalue of the Laplacian by inverse iteration.

    Conforming P1 approximations decrease monotonically toward the true
    value under uniform refinement.
    """
    part = partition_dofs(mesh)
    S, M = assemble_dirichlet(mesh, part)
    lu = lu_factor(S)
    z = np.ones(S.shape[0])
    z /= np.linalg.norm(z)
    lam_old = np.inf
    for _ in range(max_iter):
        z = lu.solve(M @ z)
        z /= np.linalg.norm(z)
        lam = float(z @ (S @ z)) / float(z @ (M @ z))
        if abs(lam - lam_old) <= tol * abs(lam):
            return lam
        lam_old = lam
    raise SolverError(f"inverse iteration did not converge below {tol} "
                      f"within {max_iter} iterations (last value {lam_old})")


def search_lower_bound(n_star: float, n_sup: float, R: float,
                       lam1: float, lam_ball: float) -> float:
    """Guaranteed lower bound for the first transmission eigenvalue.

    Case n_star > 1 returns max(lam_ball / R, sqrt(lam1 / n_sup)); case
    n_sup < 1 returns max(lam_ball / R, sqrt(lam1)). ``lam_ball`` is the
    first eigenvalue of the unit ball/disk with the matching constant
    index; ``lam1`` is the first Dirichlet eigenvalue of the domain.
    """
    if R <= 0 or lam1 <= 0 or lam_ball <= 0:
        raise ValueError("R, lam1 and lam_ball must be positive")
    if n_star > 1:
        return max(lam_ball / R, np.sqrt(lam1 / n_sup))
    if n_sup < 1:
        return max(lam_ball / R, np.sqrt(lam1))
    raise ValueError(
        f"index range [{n_star}, {n_sup}] straddles 1: no bound available, "
        "supply k_min explicitly")

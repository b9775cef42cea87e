"""Problem definition: domain + coefficient + discretization parameters."""

import warnings
from dataclasses import dataclass

import numpy as np

from .expressions import RefractiveIndex
from .meshing import Mesh


@dataclass(frozen=True)
class TransmissionProblem:
    """A domain (2D spec or the cube), a coefficient and mesh parameters."""
    domain_name: str
    spec: object                  # DomainSpec2D or None for the cube
    index: RefractiveIndex
    h: float
    refinements: int = 0

    @property
    def dim(self):
        return 3 if self.spec is None else 2


def sample_index(index: RefractiveIndex, mesh: Mesh, min_points: int = 100):
    """Coefficient values at element centroids (at least ``min_points``)."""
    cent = mesh.vertices[mesh.elements].mean(axis=1)
    if len(cent) < min_points:
        # densify with element vertices
        cent = np.vstack([cent, mesh.vertices])
    z = cent[:, 2] if mesh.dim == 3 else 0.0
    vals = index(cent[:, 0], cent[:, 1], z)
    return np.asarray(vals, float)


def check_index(index: RefractiveIndex, mesh: Mesh):
    """Validate the coefficient over the mesh.

    An index indistinguishable from 1 (max |n - 1| <= 1e-8 over >= 100
    sample points) is an error: the problem degenerates. An index whose
    range straddles 1 only gets a warning; the solver runs regardless, but
    the theoretical lower bound is unavailable.

    Returns (n_min, n_max).
    """
    vals = sample_index(index, mesh)
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"coefficient {index.source!r} is not finite on the domain")
    if np.abs(vals - 1.0).max() <= 1e-8:
        raise ValueError(
            f"coefficient {index.source!r} is identically 1 on the domain: "
            "the transmission pair is degenerate")
    n_min, n_max = float(vals.min()), float(vals.max())
    if n_min <= 0:
        raise ValueError(f"coefficient takes non-positive values (min {n_min:.3g})")
    if n_min < 1.0 < n_max:
        warnings.warn(
            f"coefficient range [{n_min:.3g}, {n_max:.3g}] straddles 1: existence "
            "theory does not apply and no search lower bound is available",
            stacklevel=2)
    return n_min, n_max

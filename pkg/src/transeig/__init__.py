"""Interior transmission eigenvalues on 2D and simple 3D domains.

A P1 finite element pipeline for the coupled Helmholtz pair with a shared
boundary trace, a shift-invert Arnoldi eigensolver on the resulting real
pencil, a semi-analytic disk/ball oracle for cross-validation, and tools
that quantify how the eigenfunctions vanish or localize near boundary
singularities (corners, cube vertices and edges).
"""

__version__ = "0.1.0"

from .errors import ConfigError, ExpressionError, MeshingError, SolverError
from .expressions import RefractiveIndex, parse_index, eval_index
from .geometry import BoundarySegment, Corner, DomainSpec2D, builtin_domain
from .meshing import (Mesh, DofPartition, mesh_domain, mesh_cube,
                      partition_dofs, refine_uniform)
from .assembly import (BlockMatrices, Pencil, assemble_blocks, assemble_dirichlet,
                       build_pencil, dump_matrix_market, element_mass,
                       element_stiffness, full_mass, to_vertex_order)
from .solver import (EigenPair, SearchWindow, dirichlet_lambda1, lu_factor,
                     normalize, search_lower_bound, shift_invert_arnoldi)
from .bessel import bessel_j, spherical_jn
from .radial import ball_first_te, disk_first_te, radial_determinant
from .analysis import (AngleRateLaw, DeltaSeries, FeatureSpec, RateFit,
                       SpectralReport, delta_corner, delta_edge, delta_profiles, delta_series,
                       fit_angle_law, fit_rate, radii_schedule, spectral_checks)
from .problem import TransmissionProblem, check_index
from .vtk_io import read_vtk, write_mode_vtk, write_vtk
from .plots import plot_loglog
from .config import RunConfig, parse_config
from .runner import RunArtifacts, StageError, run_experiment

__all__ = [
    "__version__",
    "ConfigError", "ExpressionError", "MeshingError", "SolverError",
    "RefractiveIndex", "parse_index", "eval_index",
    "BoundarySegment", "Corner", "DomainSpec2D", "builtin_domain",
    "Mesh", "DofPartition", "mesh_domain", "mesh_cube", "partition_dofs",
    "refine_uniform",
    "BlockMatrices", "Pencil", "assemble_blocks", "assemble_dirichlet",
    "build_pencil", "dump_matrix_market", "element_mass", "element_stiffness",
    "full_mass",
    "to_vertex_order",
    "EigenPair", "SearchWindow", "dirichlet_lambda1", "lu_factor", "normalize",
    "search_lower_bound", "shift_invert_arnoldi",
    "bessel_j", "spherical_jn",
    "ball_first_te", "disk_first_te", "radial_determinant",
    "AngleRateLaw", "DeltaSeries", "FeatureSpec", "RateFit", "SpectralReport",
    "delta_corner", "delta_edge", "delta_profiles", "delta_series",
    "fit_angle_law", "fit_rate",
    "radii_schedule", "spectral_checks",
    "TransmissionProblem", "check_index",
    "read_vtk", "write_mode_vtk", "write_vtk",
    "plot_loglog",
    "RunConfig", "parse_config",
    "RunArtifacts", "StageError", "run_experiment",
]

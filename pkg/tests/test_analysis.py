import math

import numpy as np
import pytest

import transeig as te
from transeig import (DeltaSeries, FeatureSpec, builtin_domain, delta_corner,
                      delta_edge, delta_profiles, delta_series, fit_angle_law,
                      fit_rate, mesh_cube, mesh_domain, spectral_checks)


def _series(radii, deltas):
    feat = FeatureSpec("corner", point=(0.0, 0.0))
    return DeltaSeries(feature=feat, mode=0, field="u0",
                       radii=tuple(radii), deltas=tuple(deltas))


# -- shared-quadrature identity ------------------------------------------------

def test_constant_field_identity_2d(equilateral_mesh):
    ones = np.full(equilateral_mesh.num_vertices, -3.7)
    for P in [(-1.0, 0.0), (0.0, math.sqrt(3))]:
        for r in (0.5, 0.25):
            d = delta_corner(np.abs(ones) * 0 + (-3.7), equilateral_mesh, P, r)
            assert abs(d - 3.7) <= 1e-12


def test_constant_field_identity_3d():
    mesh = mesh_cube(0.25)
    c = 2.5
    field = np.full(mesh.num_vertices, c)
    d = delta_corner(field, mesh, (-0.5, -0.5, -0.5), 0.5)
    assert abs(d - c) <= 1e-12
    d2 = delta_edge(field, mesh, ((-0.5, -0.5, -0.5), (-0.5, -0.5, 0.5)), 0.5)
    assert abs(d2 - c) <= 1e-12


def test_cone_field_at_straight_corner():
    # delta of |x - P| over any straight corner is r / sqrt(2), whatever the
    # opening angle: int rho^2 rho drho dtheta / (omega r^2 / 2) = r^2 / 2
    for name, params, P in [("unit_square", (), (0.0, 0.0)),
                            ("right_triangle", (), (0.0, 0.0))]:
        spec = builtin_domain(name, params)
        mesh = te.refine_uniform(mesh_domain(spec, 0.04), spec)
        field = np.linalg.norm(mesh.vertices - np.asarray(P), axis=1)
        for r in (0.5, 0.25):
            d = delta_corner(field, mesh, P, r)
            assert abs(d - r / math.sqrt(2)) / (r / math.sqrt(2)) < 2e-3


def test_neighborhood_volumes_against_geometry():
    mesh = mesh_cube(1.0 / 8.0)
    field = np.ones(mesh.num_vertices)
    from transeig.analysis import _profile
    feat_v = FeatureSpec("corner", point=(-0.5, -0.5, -0.5))
    _, den = _profile(mesh, {"f": field}, feat_v, [0.5])
    assert abs(den[0] - math.pi * 0.5 ** 3 / 6) < 2e-4         # octant of a ball
    feat_e = FeatureSpec("edge", endpoints=((-0.5, -0.5, -0.5), (-0.5, -0.5, 0.5)))
    _, den_e = _profile(mesh, {"f": field}, feat_e, [0.25])
    assert abs(den_e[0] - math.pi * 0.25 ** 2 / 4) < 2e-4      # quarter cylinder


# -- rate fitting ---------------------------------------------------------------

def test_exact_power_law_recovery():
    r = 0.5 ** np.arange(1, 6)
    fit = fit_rate(_series(r, 2.0 * r ** 3))
    assert abs(fit.slope - 3.0) <= 1e-12
    assert abs(fit.amplitude - 2.0) <= 1e-12
    assert fit.r_squared == 1.0
    assert fit.classification == "vanishing"


def test_localizing_power_law():
    r = 0.5 ** np.arange(1, 6)
    fit = fit_rate(_series(r, 5.0 * r ** -1.5))
    assert abs(fit.slope + 1.5) <= 1e-12
    assert abs(fit.amplitude - 5.0) <= 1e-11
    assert fit.classification == "localizing"


def test_flat_series_indeterminate():
    r = 0.5 ** np.arange(1, 6)
    fit = fit_rate(_series(r, np.full(5, 0.8)))
    assert fit.classification == "indeterminate"


def test_slope_scale_invariance_exact():
    r = 0.5 ** np.arange(1, 6)
    d = 1.3 * r ** 2.2
    f1 = fit_rate(_series(r, d))
    f2 = fit_rate(_series(r, 77.0 * d))
    assert f1.slope == f2.slope
    assert abs(f2.amplitude / f1.amplitude - 77.0) < 1e-9


def test_zero_delta_dropped_with_warning():
    r = 0.5 ** np.arange(1, 6)
    d = 2.0 * r ** 3
    d[-1] = 0.0
    with pytest.warns(UserWarning, match="zero delta"):
        fit = fit_rate(_series(r, d))
    assert fit.n_used == 4
    assert abs(fit.slope - 3.0) <= 1e-12


def test_too_few_samples_rejected():
    r = 0.5 ** np.arange(1, 4)
    with pytest.raises(ValueError, match="at least 4"):
        fit_rate(_series(r, r ** 2))


def test_radii_must_halve():
    with pytest.raises(ValueError, match="factors of 2"):
        _series([0.5, 0.3, 0.15, 0.075], [1, 1, 1, 1])


def test_angle_law_exact():
    omegas = np.array([math.pi / 12, math.pi / 6, math.pi / 3, 2 * math.pi / 3])
    law = fit_angle_law([(w, 3.0 / w) for w in omegas])
    assert abs(law.a - 3.0) <= 1e-12
    assert abs(law.b) <= 1e-12
    assert law.r_squared > 1.0 - 1e-12


def test_angle_law_validation():
    with pytest.raises(ValueError, match="at least 3"):
        fit_angle_law([(1.0, 1.0), (2.0, 0.5)])
    with pytest.raises(ValueError, match="distinct"):
        fit_angle_law([(1.0, 1.0), (1.0, 0.5), (2.0, 0.2)])


# -- spectral checks -------------------------------------------------------------

def test_spectral_conjugate_pairing():
    rep = spectral_checks([1.5, 2 + 1j, 2 - 1j])
    assert rep.n_real == 1
    assert rep.conjugate_pairs == ((1, 2),)
    assert rep.purely_imaginary == ()
    assert rep.unmatched == ()
    assert rep.clean


def test_spectral_purely_imaginary_flagged():
    rep = spectral_checks([3j])
    assert rep.purely_imaginary == (0,)
    assert not rep.clean


def test_spectral_unmatched_flagged():
    rep = spectral_checks([2 + 1j, 5.0])
    assert rep.unmatched == (0,)
    assert not rep.clean


def test_spectral_empty_rejected():
    with pytest.raises(ValueError):
        spectral_checks([])


# -- representative invariance over a degenerate cluster --------------------------

def test_cluster_rotation_slope_stability():
    spec = builtin_domain("equilateral_triangle")
    mesh = te.refine_uniform(mesh_domain(spec, 0.04), spec)
    P = np.array([-1.0, 0.0])
    rho = np.linalg.norm(mesh.vertices - P, axis=1)
    theta = np.arctan2(mesh.vertices[:, 1] - P[1], mesh.vertices[:, 0] - P[0])
    # two orthogonal-looking modes with the same corner decay rho^3
    f1 = rho ** 3 * np.cos(3 * theta) * np.exp(-rho)
    f2 = rho ** 3 * np.sin(3 * theta) * np.exp(-rho)
    radii = (0.5, 0.25, 0.125, 0.0625)
    feat = FeatureSpec("corner", point=tuple(P))
    slopes = []
    rng = np.random.default_rng(5)
    for trial in range(3):
        if trial == 0:
            g1, g2 = f1, f2
        else:
            a = rng.uniform(0, 2 * np.pi)
            g1 = np.cos(a) * f1 + np.sin(a) * f2
            g2 = -np.sin(a) * f1 + np.cos(a) * f2
        prof = delta_profiles(mesh, {"g1": g1, "g2": g2}, feat, radii)
        for key in ("g1", "g2"):
            s = DeltaSeries(feature=feat, mode=0, field="u0", radii=radii,
                            deltas=tuple(prof[key]))
            slopes.append(fit_rate(s).slope)
    assert max(slopes) - min(slopes) <= 0.3


def test_delta_series_convenience(equilateral_mesh):
    field = np.ones(equilateral_mesh.num_vertices)
    feat = FeatureSpec("corner", point=(1.0, 0.0))
    s = delta_series(equilateral_mesh, field, feat, (0.5, 0.25), mode=2,
                     field_name="u")
    assert s.mode == 2 and s.field == "u"
    assert np.abs(np.asarray(s.deltas) - 1.0).max() <= 1e-12


def test_radius_validation(equilateral_mesh):
    field = np.ones(equilateral_mesh.num_vertices)
    with pytest.raises(ValueError, match="not on the boundary"):
        delta_corner(field, equilateral_mesh, (0.0, 0.5), 0.5)
    with pytest.raises(ValueError, match="below resolution"):
        delta_corner(field, equilateral_mesh, (-1.0, 0.0), 0.05)
    with pytest.raises(ValueError, match="diameter"):
        delta_corner(field, equilateral_mesh, (-1.0, 0.0), 50.0)


def test_delta_refinement_stability():
    # converged-mode delta values move by no more than 2% per refinement
    spec = builtin_domain("equilateral_triangle")
    mesh = te.refine_uniform(mesh_domain(spec, 0.04), spec)
    feat = FeatureSpec("corner", point=(-1.0, 0.0))
    deltas = {}
    for level in (0, 1):
        part = te.partition_dofs(mesh)
        blocks = te.assemble_blocks(mesh, part, te.parse_index("16"))
        pencil = te.build_pencil(blocks)
        win = te.SearchWindow(k_min=1.2, k_max=1.8, sigma=2.5, count=1)
        pairs = te.shift_invert_arnoldi(pencil.a, pencil.b, win, pencil=pencil)
        pair = te.normalize(pairs[0], te.full_mass(blocks))
        u0 = te.to_vertex_order(part, pair.u0)
        prof = delta_profiles(mesh, {"u0": u0}, feat, (0.5, 0.25))
        deltas[level] = np.asarray(prof["u0"])
        if level == 0:
            mesh = te.refine_uniform(mesh, spec)
    rel = np.abs(deltas[1] - deltas[0]) / deltas[0]
    assert rel.max() <= 0.02

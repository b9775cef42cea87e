"""Vanishing of eigenfunctions toward corners, and the fitted rates.

Solves the equilateral triangle with n = 16, then measures the averaged-L2
size of the first eigenfunction in shrinking balls around each corner. The
log-log slope comes out near 3 at every corner (opening angle pi/3) for
every mode, and a plot is written as SVG.
"""

import numpy as np

import transeig as te

spec = te.builtin_domain("equilateral_triangle")
mesh = te.refine_uniform(te.mesh_domain(spec, 0.04), spec)
part = te.partition_dofs(mesh)
blocks = te.assemble_blocks(mesh, part, te.parse_index("16"))
pencil = te.build_pencil(blocks)

window = te.SearchWindow(k_min=1.2, k_max=2.2, sigma=2.5, count=3)
pairs = te.shift_invert_arnoldi(pencil.a, pencil.b, window, pencil=pencil)
pairs = [te.normalize(p, te.full_mass(blocks)) for p in pairs]
print("eigenvalues:", ", ".join(f"{p.k.real:.5f}" for p in pairs))

series_for_plot = []
for j, corner in enumerate(spec.corners):
    feat = te.FeatureSpec("corner", point=corner.point, label=f"P{j + 1}")
    radii = te.radii_schedule(mesh, feat)
    for mi, pair in enumerate(pairs):
        u0 = te.to_vertex_order(part, pair.u0)
        s = te.delta_series(mesh, u0, feat, radii, mode=mi)
        fit = te.fit_rate(s)
        print(f"corner P{j + 1}, mode {mi}: slope {fit.slope:.3f} "
              f"(R^2 {fit.r_squared:.4f}, {fit.classification})")
        if mi == 0:
            series_for_plot.append((f"P{j + 1}", s.radii, s.deltas, fit.slope))

te.plot_loglog(series_for_plot, "equilateral_vanishing.svg",
               title="first mode, equilateral triangle")
print("wrote equilateral_vanishing.svg")

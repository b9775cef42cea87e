"""Localization at a reflex corner.

On the arrow polygon the interior angle at P1 exceeds pi. The averaged-L2
metric of the first eigenfunction then GROWS as the ball shrinks (negative
log-log slope), while the difference of the two fields keeps vanishing
there, and the sharp corners still vanish at high order.
"""

import transeig as te

spec = te.builtin_domain("arrow")
mesh = te.refine_uniform(te.mesh_domain(spec, 0.03), spec)
part = te.partition_dofs(mesh)
blocks = te.assemble_blocks(mesh, part, te.parse_index("16"))
pencil = te.build_pencil(blocks)

window = te.SearchWindow(k_min=1.5, k_max=3.0, sigma=5.3, count=2)
pairs = te.shift_invert_arnoldi(pencil.a, pencil.b, window, pencil=pencil)
pair = te.normalize(min(pairs, key=lambda p: abs(p.k)), te.full_mass(blocks))
print(f"first eigenvalue: {pair.k.real:.5f}")

u0 = te.to_vertex_order(part, pair.u0)
diff = te.to_vertex_order(part, pair.u - pair.u0)
for j, corner in enumerate(spec.corners):
    feat = te.FeatureSpec("corner", point=corner.point, label=f"P{j + 1}")
    radii = te.radii_schedule(mesh, feat)
    prof = te.delta_profiles(mesh, {"u0": u0, "diff": diff}, feat, radii)
    out = {}
    for name in ("u0", "diff"):
        s = te.DeltaSeries(feature=feat, mode=0, field=name, radii=tuple(radii),
                           deltas=tuple(prof[name]))
        out[name] = te.fit_rate(s)
    kind = "reflex" if corner.opening_angle > 3.141592653589793 else "convex"
    print(f"P{j + 1} ({kind}, {corner.opening_angle:.3f} rad): "
          f"u0 slope {out['u0'].slope:+.2f} ({out['u0'].classification}), "
          f"u-u0 slope {out['diff'].slope:+.2f} ({out['diff'].classification})")

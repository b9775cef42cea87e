"""Coefficient expressions and domain meshing.

Parses a spatially varying refractive index, builds meshes of a few of the
built-in domains (including the arc-bounded moon), refines one of them, and
exports a legacy VTK file you can open in ParaView.
"""

import numpy as np

import transeig as te

# -- a coefficient over the plane ------------------------------------------------
n = te.parse_index("16+8*sin(4*x*y)")
print("n(0, 0)      =", n(0.0, 0.0))
print("n(0.5, 0.5)  =", n(0.5, 0.5))
print("printed form =", n.to_text())

# evaluation is vectorized over numpy arrays
xs = np.linspace(0, 1, 5)
print("on a grid    =", np.round(n(xs, xs), 4))

# -- built-in domains --------------------------------------------------------------
for name, params in [("equilateral_triangle", ()), ("moon", ()),
                     ("sector", (1.0, 4 * np.pi / 3))]:
    spec = te.builtin_domain(name, params)
    mesh = te.mesh_domain(spec, 0.08)
    corners = ", ".join(f"{np.degrees(c.opening_angle):.0f} deg" for c in spec.corners)
    print(f"{name}: area {mesh.measures().sum():.6f} (exact {spec.area():.6f}), "
          f"{mesh.num_vertices} vertices, corners [{corners}]")

# -- refinement keeps curved boundaries curved ------------------------------------
spec = te.builtin_domain("moon")
mesh = te.mesh_domain(spec, 0.1)
fine = te.refine_uniform(mesh, spec)
print(f"moon refined: {mesh.num_elements} -> {fine.num_elements} triangles, "
      f"area error {abs(fine.measures().sum() - spec.area()):.2e}")

te.write_vtk("moon_mesh.vtk", fine, title="moon mesh")
print("wrote moon_mesh.vtk")

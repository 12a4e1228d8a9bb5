"""Forward homogenization walkthrough.

Builds a double-arrowhead unit cell out of a stiff core and a weak
shell, solves the three periodic cell problems, and prints the
homogenized elasticity tensor together with the apparent Poisson ratio.
Run it as:  python demos/forward_homogenization.py
"""

import numpy as np

from auxcell import fem, homogenization, levelset, materials, mesh

n = 100
m = mesh.build_mesh(n)
print(f"unit cell: {n}x{n} grid, {m.n_elements} triangles, "
      f"{m.n_dof} periodic scalar DOFs")

# Four phases: weak (E=0.91), void, stiff (E=1.82), void; all nu=0.3.
phases = materials.PhaseSet.from_moduli(
    E=(0.91, 0.0001, 1.82, 0.0001),
    nu=(0.3, 0.3, 0.3, 0.3),
    eps=2 * m.dx)

# Level set 1: negative inside the arrowhead strokes (the material).
# Level set 2: positive inside a thinner copy of the same strokes, so
# the core of every stroke is the stiff phase and the rest is weak.
d1 = levelset.arrows_pattern(m, rows=1, apex=0.3, thickness=0.12)
d2 = levelset.arrows_pattern(m, rows=1, apex=0.3, thickness=0.05,
                             invert=True)

dmats = fem.material_field(m, d1, d2, phases)
sols = fem.solve_cell_problems(m, dmats)
ah = homogenization.homogenized_tensor(m, dmats, sols)

print("\nhomogenized tensor entries:")
for key in ("1111", "1122", "2222", "1212"):
    print(f"  A{key} = {ah.entry(key):+.5f}")
nu = homogenization.apparent_poisson(ah)
print(f"\napparent Poisson ratio: {nu:+.4f}")
print("negative: stretching this cell horizontally makes it expand "
      "vertically" if nu < 0 else "positive: conventional response")

dens = materials.phase_densities(m.element_values(d1),
                                 m.element_values(d2), phases)
names = ("weak", "void", "stiff", "void")
print("\nphase volume fractions:")
for name, rho in zip(names, dens):
    print(f"  {name:>5}: {float(np.sum(m.areas * rho)):.3f}")

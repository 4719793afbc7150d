"""Muckenhoupt characteristics, the weighted sparse form, and the exponent
triangles that delimit every estimate in the toolkit.
"""

from fractions import Fraction

import numpy as np

from heislab import dyadic, regions, sparse, weights
from heislab.corpus import GaussianField
from heislab.heis import HeisPoint, cube_region
from heislab.means import CellGrid

# --- weights over a cell system ---------------------------------------------

region = cube_region(1, 1.1, 0.35)
grid = CellGrid(region, (32, 32, 80))
cd = dyadic.CellDyadicSystems(grid, 0.5, 0, 2, seed=3, num_systems=3)
Q0 = cd.cube(0, 0, int(np.argmax(cd._tables[0][0]["count"])))
z, t = grid.centers()

checker = np.where((np.floor(z[:, 0].real / 0.25) + np.floor(z[:, 0].imag / 0.25)
                    + np.floor(t / 0.1)) % 2 == 0, 2.0, 0.5)
kor = np.minimum((np.sum(np.abs(z) ** 2, axis=-1) ** 2 + t ** 2) ** 0.25, 0.8) + 0.05
print(f"{'weight':>12} {'[w]_A2':>8} {'[w]_RH2':>8}")
for name, w in (("const", np.ones(grid.num_cells)), ("checker", checker),
                ("koranyi^1", kor)):
    print(f"{name:>12} {weights.ap_characteristic(w, 2.0, cd):8.3f} "
          f"{weights.rh_characteristic(w, 2.0, cd):8.3f}")

f = GaussianField(1, 2.0, 3.0, HeisPoint(Q0.center.z, Q0.center.t), 1.0)
fv = (0.3 + f.eval_batch(z, t)) * Q0.mask()
gv = (0.2 + np.random.default_rng(2).random(grid.num_cells)) * Q0.mask()
fam = sparse.build_sparse_family(fv, gv, Q0, 1.5, 1.5)
print("\nweighted sparse-form bound (slack = rhs/lhs, >= 1 means it held):")
for name, w in (("const", np.ones(grid.num_cells)), ("checker", checker)):
    rep = weights.bfp_check(fam, fv, gv, w, 2.0, 1.5, 1.5, cd)
    print(f"  {name:>8}: alpha = {rep['alpha']:.2f}, slack = {rep['slack']:.3f}")

print("\nweighted boundedness exponent 1/phi(1/p0) at n = 2:")
for p0_inv in (0.2, 2 / 3, 0.9):
    print(f"  1/p0 = {p0_inv:.2f} -> 1/phi = {weights.phi_exponent(p0_inv, 2):.4f}")

# --- exponent triangles ------------------------------------------------------

print("\nexponent triangles at n = 2 (1/p, 1/q):")
for name in regions.TRIANGLE_NAMES:
    tri = regions.triangle(name, 2)
    verts = ", ".join(f"({a}, {b})" for a, b in tri.vertices)
    print(f"  {name:20s} {verts}")
tri = regions.triangle("lacunary_sparse", 2)
print("\nEuclidean lacunary vertex (2/3, 2/3) inside the sparse triangle:",
      tri.contains(Fraction(2, 3), Fraction(2, 3), strict=True))

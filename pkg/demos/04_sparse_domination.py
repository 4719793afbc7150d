"""The stopping-time sparse pipeline, end to end at delta = 1/2.

Cell systems -> localized means A_Q -> linearization sets E_Q, B_Q ->
Calderon-Zygmund stopping -> recursive 1/2-sparse family -> the bilinear
form Lambda_{S,p,q} dominating the discretized lacunary maximal pairing.
"""

import numpy as np

from heislab import dyadic, sparse
from heislab.corpus import GaussianField
from heislab.heis import HeisPoint, cube_region
from heislab.means import CellGrid, circle_rule

region = cube_region(1, 1.1, 0.35)
grid = CellGrid(region, (40, 40, 96))
cd = dyadic.CellDyadicSystems(grid, 0.5, 0, 3, seed=3, num_systems=3)
Q0 = cd.cube(0, 0, int(np.argmax(cd._tables[0][0]["count"])))
print(f"grid {grid.shape} = {grid.num_cells} cells; root cube |Q0| = {Q0.measure:.3f}")

z, t = grid.centers()
f = GaussianField(1, 2.0, 3.0, HeisPoint(Q0.center.z, Q0.center.t), 1.0)
fv = f.eval_batch(z, t) * Q0.mask()
rng = np.random.default_rng(2)
gv = (0.2 + rng.random(grid.num_cells)) * Q0.mask()
rule = circle_rule(64)

# localized means and the exact half-inequality
cubes = [Q0] + [c for c in Q0.children() if c.cell_count > 400]
aqs = [sparse.localized_AQ(fv, c, rule, margin=1.1) for c in cubes]
lin = sparse.linearize(aqs, cubes)
sup = np.maximum.reduce([np.abs(v) for v in aqs])
lhs = float(np.sum(sup * gv))
rhs = 2 * sum(float(np.sum(np.abs(v) * gv * b)) for v, b in zip(aqs, lin.B))
print(f"linearization: {len(cubes)} cubes, B_Q disjoint cover = {lin.covering_ok()}")
print(f"half-inequality <sup A_Q f, g> = {lhs:.4f} <= 2 sum <A_Q f, g 1_B> = {rhs:.4f}")

# stopping cubes and the sparse family
stops = sparse.cz_stopping(fv, Q0, 1.5, 2.0)
print(f"CZ stopping cubes above 2<f>_Q0: {len(stops)} "
      f"(levels {sorted({c.level for c in stops})})")
fam = sparse.build_sparse_family(fv, gv, Q0, 1.5, 1.5)
print(f"sparse family: {len(fam.cubes)} cubes, exact 1/2-sparsity = {fam.check_sparsity()}")

# domination report
rep = sparse.verify_domination(f, fv, gv, cd, Q0, 1.5, 1.5, rule, j_list=(2, 3),
                               corpus_id="demo-bump")
print(f"domination <M_lac f, g> / Lambda_S = {rep['ratio']:.3f} "
      f"(lhs {rep['lhs']:.4f}, rhs {rep['rhs']:.4f})")
sparse.domination_rows_to_csv("domination_demo.csv", [rep])
print("wrote domination_demo.csv")

"""Adjacent dyadic systems on the Heisenberg group at theorem scale.

Builds N = 6 left-translated lattice systems with delta = 1/100, checks the
ball sandwich B(center, delta^k/12) <= Q <= B(center, 4 delta^k) on the rich
level, and hunts for a containing cube for random balls (the adjacency
property that makes the sparse argument work).
"""

import numpy as np

from heislab import dyadic
from heislab.heis import HeisPoint, cube_region, dist_batch

delta = 0.01
region = cube_region(1, 3 * delta ** 2, 3 * delta ** 4)
systems = dyadic.build_systems(region, delta, 0, 2, seed=42, num_systems=6)
print(f"built {len(systems)} adjacent systems, delta = {delta}, levels 0..2")
print(f"theorem-delta hypothesis satisfied: {systems[0].theorem_delta_ok}")

rng = np.random.default_rng(0)
m = 30000
z = rng.uniform(-1, 1, (m, 1)) * region.half_widths[0] \
    + 1j * rng.uniform(-1, 1, (m, 1)) * region.half_widths[1]
t = rng.uniform(-1, 1, m) * region.t_half_width

sys0 = systems[0]
keys, zc, tc = sys0.locate_keys(z, t, 2)
print(f"level-2 cubes discovered by sampling: {len(np.unique(keys, axis=0))}")
print(f"outer sandwich max d(center, x)/delta^2 = "
      f"{np.max(dist_batch(zc, tc, z, t)) / delta**2:.3f}  (theorem constant 4)")

inner = tested = 0
for key in np.unique(keys, axis=0):
    c = sys0.cube_center(key, 2)
    if not region.contains(c.z[None, :], np.array([c.t]), shrink=0.25)[0]:
        continue  # boundary cubes are masked
    bz, bt = dyadic.koranyi_ball_sample(c, delta ** 2 / 12, m=96, seed=7)
    kk, _, _ = sys0.locate_keys(bz, bt, 2)
    tested += 1
    inner += bool(np.all(np.all(kk == key, axis=-1)))
print(f"inner 1/12-ball containment: {inner}/{tested} interior cubes")

fails = 0
for trial in range(100):
    r = float(np.exp(rng.uniform(np.log(delta ** 4), np.log(delta ** 3))))
    x = HeisPoint(rng.uniform(-0.8, 0.8, 1) * region.half_widths[0]
                  + 1j * rng.uniform(-0.8, 0.8, 1) * region.half_widths[1],
                  float(rng.uniform(-0.8, 0.8) * region.t_half_width))
    bz, bt = dyadic.koranyi_ball_sample(x, r, m=128, seed=trial)
    if not any(np.all(s.locate_keys(bz, bt, 2)[0] == s.locate_keys(bz, bt, 2)[0][0])
               for s in systems):
        fails += 1
print(f"containing-cube property: {100 - fails}/100 random balls inside some "
      f"level-2 cube of the collection")

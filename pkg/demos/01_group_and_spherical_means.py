"""Spherical means on H^1: two independent routes to the same number.

The spherical mean A_r f averages f over the codimension-two sphere
{(w,0) : |w| = r} twisted by the group law.  This script evaluates it by
direct sphere quadrature and through the Laguerre band expansion of the
partial Fourier transform, and watches the two routes agree.
"""

import numpy as np

from heislab import corpus, means, spectral
from heislab.heis import HeisPoint, group_mul, group_inv, koranyi_norm, dilate

# --- group arithmetic -------------------------------------------------------

a = HeisPoint(np.array([1.0 + 0.0j]), 0.0)
b = HeisPoint(np.array([1j]), 0.0)
print("group law:      (1,0)*(i,0) =", group_mul(a, b).z, group_mul(a, b).t)
print("inverse check:  a * a^-1    =", group_mul(a, group_inv(a)).z[0])
print("Koranyi norm:   |(0,4)|     =", koranyi_norm(HeisPoint(np.zeros(1, complex), 4.0)))
x = HeisPoint(np.array([0.3 - 0.2j]), 0.7)
print("homogeneity:    |d_2 x| / |x| =", koranyi_norm(dilate(2.0, x)) / koranyi_norm(x))
print()

# --- the two routes to A_r f ------------------------------------------------

f = corpus.default_corpus(1)[0]          # unit Gaussian, closed-form f^lambda
rule = means.circle_rule(256)

print(f"{'r':>4} {'point':>22} {'quadrature':>12} {'spectral':>12} {'rel err':>9}")
rng = np.random.default_rng(1)
for r in (0.5, 1.0, 2.0):
    th = rng.uniform(0, 2 * np.pi)
    z = np.array([[r * 0.9 * np.exp(1j * th)]])
    t = np.array([0.1])
    quad = float(means.spherical_mean(f, r, (z, t), rule)[0])
    res = spectral.spectral_spherical_mean(f, r, (z, t))
    spec = float(np.asarray(res.value)[0])
    print(f"{r:4.1f} ({z[0,0]:+.3f}, {t[0]:+.2f}) {quad:12.8f} {spec:12.8f} "
          f"{abs(spec-quad)/abs(quad):9.2e}")

print("\nspectral record:", res.to_json(oracle_value=quad))

# --- r -> 0 recovers the function (the band coefficients all tend to 1) -----

z = np.array([[0.2 + 0.1j]])
t = np.array([0.0])
res0 = spectral.spectral_spherical_mean(f, 1e-4, (z, t))
print("\nr -> 0:", float(np.asarray(res0.value)[0]), "vs f(x) =",
      float(f.eval_batch(z, t)[0]))

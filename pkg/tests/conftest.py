import numpy as np
import pytest

from heislab.corpus import GaussianField, default_corpus
from heislab.heis import HeisPoint, cube_region
from heislab.means import CellGrid
from heislab import dyadic


@pytest.fixture(scope="session")
def corpus_n1():
    return default_corpus(1)


@pytest.fixture(scope="session")
def cell_systems_n1():
    """delta = 1/2 cell systems, 4 levels, shared by the sparse/weight tests."""
    region = cube_region(1, 1.1, 0.35)
    grid = CellGrid(region, (40, 40, 96))
    cd = dyadic.CellDyadicSystems(grid, 0.5, 0, 3, seed=3, num_systems=3)
    return cd


@pytest.fixture(scope="session")
def root_cube(cell_systems_n1):
    tab = cell_systems_n1._tables[0][0]
    return cell_systems_n1.cube(0, 0, int(np.argmax(tab["count"])))


@pytest.fixture(scope="session")
def sparse_corpus(cell_systems_n1, root_cube):
    """>= 10 nonnegative (f, g) cell-value pairs supported in the root cube:
    indicators, two-bump fields, smooth bumps, constants and mixtures."""
    cd, Q0 = cell_systems_n1, root_cube
    z, t = cd.grid.centers()
    own = Q0.mask()
    c = Q0.center
    rng = np.random.default_rng(7)

    def bump(zc, tc, a, b, amp=1.0):
        f = GaussianField(1, a, b, HeisPoint(np.atleast_1d(zc), tc), amp)
        return f.eval_batch(z, t) * own

    kids = Q0.children()
    kid = max(kids, key=lambda q: q.cell_count)
    quarter = kid.children()[0] if kid.children() else kid
    pairs = []
    ones = own.astype(float)
    pairs.append(("const-const", ones.copy(), ones.copy()))
    pairs.append(("indicator-child", kid.mask().astype(float), ones.copy()))
    pairs.append(("indicator-quarter", quarter.mask().astype(float),
                  kid.mask().astype(float)))
    pairs.append(("bump-central", bump(c.z[0], c.t, 3.0, 5.0), ones.copy()))
    pairs.append(("bump-vs-bump", bump(c.z[0] + 0.2, c.t, 4.0, 8.0),
                  bump(c.z[0] - 0.2, c.t, 4.0, 8.0)))
    two = bump(c.z[0] + 0.3, c.t, 8.0, 12.0) + bump(c.z[0] - 0.3, c.t, 8.0, 12.0)
    pairs.append(("two-bump", two, ones.copy()))
    pairs.append(("two-bump-sym", two, two.copy()))
    tall = bump(c.z[0], c.t, 30.0, 60.0, amp=40.0)
    pairs.append(("tall-narrow", tall, ones.copy()))
    noise = (0.1 + rng.random(cd.grid.num_cells)) * own
    pairs.append(("rough-g", bump(c.z[0], c.t, 2.0, 3.0), noise))
    pairs.append(("rough-both", (0.1 + rng.random(cd.grid.num_cells)) * own, noise.copy()))
    pairs.append(("mixed", ones + two, 0.5 * ones + noise))
    return pairs


@pytest.fixture(scope="session")
def brute_force_cz():
    """Exhaustive stopping-cube oracle: scan every descendant, keep maximal."""
    from heislab import sparse
    from heislab.dyadic import cube_average

    def run(cd, Q0, fv, p, mult):
        base = cube_average(fv, Q0, p)
        viol = []
        for k in range(Q0.level + 1, cd.k_max + 1):
            for i in sparse._descendants_at(cd, Q0, k):
                c = cd.cube(Q0.alpha, k, int(i))
                if cube_average(fv, c, p) > mult * base:
                    viol.append(c)
        maximal = []
        for c in viol:
            dominated = any(
                o.level < c.level and np.all(~c.mask() | o.mask()) for o in viol
            )
            if not dominated:
                maximal.append(c)
        return sorted((c.level, c.key) for c in maximal)

    return run


@pytest.fixture(scope="session")
def theorem_systems():
    """delta = 1/100 systems on a finest-scale region (criterion 6 geometry)."""
    delta = 0.01
    region = cube_region(1, 3 * delta ** 2, 3 * delta ** 4)
    return region, dyadic.build_systems(region, delta, 0, 2, seed=42, num_systems=6)

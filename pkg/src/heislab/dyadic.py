"""Adjacent dyadic systems on (H^n, d_L) at desk scale.

Construction.  The scaled Heisenberg lattice

    Gamma_s = { (s(m + i m'), (s^2/2) p) : m, m' in Z^n, p in Z }

is a subgroup of H^n (the twist (1/2) Im z.conj(w) of two lattice points
lies in (s^2/2) Z), with Koranyi separation s/sqrt(2) and covering radius
about 0.75 s (n=1) / 1.02 s (n=2).  With s_k = sqrt(2) delta^k the level-k
net is delta^k-separated, and the nets are nested whenever 1/delta is an
integer.  Adjacent systems are left translates x_alpha . Gamma_{s_k} by
seeded offsets; left translations are d_L-isometries, so every system is an
isometric copy with shifted boundaries.

A point is located by exact lattice arithmetic (round in z with a +-1
window, then the optimal t slot), assigned at the finest level, and walked
up via nearest-coarser-net parent links.  Partition and nesting are then
exact by construction; the ball sandwich (iii) and the containing-cube
property (2) are verified empirically, as are all theorem-level claims.

Two materializations share this core: sampled systems (cube set discovered
by locating sample points; used for the small-delta theorem checks) and
cell systems (every grid cell labelled per level; used by the sparse and
weight machinery, where cube averages are bincounts over labels).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .heis import BoxRegion, HeisPoint, dist_batch, mul_batch, norm_batch, twist
from .means import CellGrid

__all__ = [
    "DyadicSystem",
    "DyadicCube",
    "build_systems",
    "CellDyadicSystems",
    "koranyi_ball_sample",
    "locate",
    "children",
]

_SQRT2 = np.sqrt(2.0)


def _nearest_net(n: int, s: float, z, t):
    """Exact d_L-nearest point of Gamma_s to the batch (z, t).

    Searches the +-1 window around coordinate-wise rounding in z (3^{2n}
    candidates; the optimal lattice point is within the window because the
    t-slot error is at most s^2/4) and picks the optimal t slot for each.
    Ties break deterministically by candidate order.
    """
    z = np.asarray(z, dtype=complex)
    t = np.asarray(t, dtype=float)
    base = np.round(np.stack([z.real, z.imag], axis=-1) / s)  # (..., n, 2)
    ts = 0.5 * s * s
    best_d = np.full(t.shape, np.inf)
    best_z = np.zeros_like(z)
    best_t = np.zeros_like(t)
    best_iz = np.zeros(z.shape[:-1] + (z.shape[-1], 2), dtype=np.int64)
    best_it = np.zeros(t.shape, dtype=np.int64)
    shifts = np.array(np.meshgrid(*([[-1, 0, 1]] * (2 * n)), indexing="ij"))
    shifts = shifts.reshape(2 * n, -1).T  # (3^{2n}, 2n)
    for sh in shifts:
        iz = base + sh.reshape(n, 2)
        zc = s * (iz[..., 0] + 1j * iz[..., 1])
        # optimal t slot for this z candidate
        tw = twist(zc, z)  # (1/2) Im zc.conj(z); gamma^{-1}x twist is -(1/2)Im(zc.conj(z))...
        # d_L(gamma, x) = |gamma^{-1} x|, gamma^{-1}x = (z-zc, t-tc-(1/2)Im(zc. conj(z)))
        resid = t - twist(zc, z)
        it = np.round(resid / ts)
        tc = ts * it
        dz2 = np.sum(np.abs(z - zc) ** 2, axis=-1)
        d4 = dz2 * dz2 + (resid - tc) ** 2
        better = d4 < best_d
        best_d = np.where(better, d4, best_d)
        best_z = np.where(better[..., None], zc, best_z)
        best_t = np.where(better, tc, best_t)
        best_iz = np.where(better[..., None, None], iz.astype(np.int64), best_iz)
        best_it = np.where(better, it.astype(np.int64), best_it)
    return best_z, best_t, best_iz, best_it


def _key_arrays(iz, it):
    """Integer key array (..., 2n+1) identifying lattice points."""
    flat = iz.reshape(iz.shape[:-2] + (-1,))
    return np.concatenate([flat, it[..., None]], axis=-1)


@dataclass(frozen=True)
class DyadicSystem:
    """One translated lattice hierarchy: cubes are hierarchical Voronoi cells."""

    n: int
    delta: float
    k_min: int
    k_max: int
    alpha: int
    offset_z: np.ndarray
    offset_t: float

    def __post_init__(self):
        if not (0 < self.delta < 1):
            raise ValueError("delta must lie in (0,1)")
        if abs(round(1 / self.delta) - 1 / self.delta) > 1e-9:
            raise ValueError("1/delta must be an integer for nested lattice nets")
        if self.k_max < self.k_min:
            raise ValueError("empty level range")

    @property
    def theorem_delta_ok(self) -> bool:
        return self.delta <= 1.0 / 96

    def scale(self, k: int) -> float:
        return _SQRT2 * self.delta ** k

    def _to_base(self, z, t):
        zi, ti = -self.offset_z, -self.offset_t
        return mul_batch(np.broadcast_to(zi, np.asarray(z, dtype=complex).shape), ti, z, t)

    def _from_base(self, z, t):
        return mul_batch(np.broadcast_to(self.offset_z, z.shape), self.offset_t, z, t)

    def net_point(self, z, t, k: int):
        """Nearest level-k net point (in ambient coordinates) and its key."""
        zb, tb = self._to_base(z, t)
        zc, tc, iz, it = _nearest_net(self.n, self.scale(k), zb, tb)
        za, ta = self._from_base(zc, tc)
        return za, ta, _key_arrays(iz, it)

    def locate_keys(self, z, t, k: int):
        """Hierarchical cube key of each point at level k.

        Assignment at the finest level, then nearest-coarser-net steps.
        """
        if not (self.k_min <= k <= self.k_max):
            raise ValueError(f"level {k} outside [{self.k_min}, {self.k_max}]")
        zb, tb = self._to_base(z, t)
        zc, tc, iz, it = _nearest_net(self.n, self.scale(self.k_max), zb, tb)
        lev = self.k_max
        while lev > k:
            lev -= 1
            zc, tc, iz, it = _nearest_net(self.n, self.scale(lev), zc, tc)
        return _key_arrays(iz, it), zc, tc

    def cube_center(self, key, k: int) -> HeisPoint:
        """Ambient-coordinate center of the cube with the given lattice key."""
        key = np.asarray(key, dtype=np.int64)
        s = self.scale(k)
        iz = key[:-1].reshape(self.n, 2)
        zc = s * (iz[:, 0] + 1j * iz[:, 1])
        tc = 0.5 * s * s * key[-1]
        za, ta = self._from_base(zc[None, :], np.array([tc]))
        return HeisPoint(za[0], float(ta[0]))

    def parent_key(self, key, k: int):
        """Key of the level-(k-1) parent of the level-k cube."""
        c = self.cube_center(key, k)
        zb, tb = self._to_base(c.z[None, :], np.array([c.t]))
        _, _, iz, it = _nearest_net(self.n, self.scale(k - 1), zb, tb)
        return tuple(_key_arrays(iz, it)[0].tolist())


def build_systems(region: BoxRegion, delta: float, k_min: int, k_max: int,
                  seed: int = 0, num_systems: int = 6):
    """N adjacent systems on the region; offsets are seeded group elements.

    The finest level must stay resolvable inside the region: the region has
    to contain at least one full level-k_max cube, else the caller asked
    for levels below the region's own scale.
    """
    n = region.n
    s_fine = _SQRT2 * delta ** k_max
    if np.min(region.half_widths[:-1]) < s_fine or region.t_half_width < 0.25 * s_fine ** 2:
        raise ValueError(
            "region cannot resolve level k_max = %d (needs z half-widths >= %.3g "
            "and t half-width >= %.3g)" % (k_max, s_fine, 0.25 * s_fine ** 2)
        )
    rng = np.random.default_rng(seed)
    systems = []
    for alpha in range(num_systems):
        if alpha == 0:
            oz = np.zeros(n, dtype=complex)
            ot = 0.0
        else:
            # offsets on the coarse-cube scale shift every level's boundaries
            u = rng.uniform(-1, 1, 2 * n) * delta ** k_min
            oz = u[0::2] + 1j * u[1::2]
            ot = float(rng.uniform(-1, 1) * delta ** (2 * k_min))
        systems.append(DyadicSystem(n, delta, k_min, k_max, alpha, oz, ot))
    return systems


def koranyi_ball_sample(center: HeisPoint, radius: float, m: int = 256, seed: int = 0,
                        boundary_fraction: float = 0.5):
    """Deterministic sample of B(center, radius) = center . delta_radius B(0,1).

    A fraction of the points is pushed to |u| = 0.999 (the strict ball
    boundary is the hard case for containment checks).
    """
    rng = np.random.default_rng(seed)
    n = center.n
    pts_z = np.empty((0, n), dtype=complex)
    pts_t = np.empty(0)
    while len(pts_t) < m:
        z = rng.uniform(-1, 1, (2 * m, n)) + 1j * rng.uniform(-1, 1, (2 * m, n))
        t = rng.uniform(-1, 1, 2 * m)
        keep = norm_batch(z, t) < 1.0
        pts_z = np.concatenate([pts_z, z[keep]])
        pts_t = np.concatenate([pts_t, t[keep]])
    pts_z, pts_t = pts_z[:m], pts_t[:m]
    nb = int(m * boundary_fraction)
    if nb:
        nrm = norm_batch(pts_z[:nb], pts_t[:nb])
        f = 0.999 / nrm
        pts_z[:nb] *= f[:, None]
        pts_t[:nb] *= (f * f)
    pts_z *= radius
    pts_t *= radius * radius
    return mul_batch(np.broadcast_to(center.z, pts_z.shape), center.t, pts_z, pts_t)


@dataclass(frozen=True)
class DyadicCube:
    """A cube of a cell system: explicit cell-index set plus lattice identity."""

    systems: "CellDyadicSystems"
    alpha: int
    level: int
    index: int

    @property
    def key(self):
        return tuple(self.systems._tables[self.alpha][self.level]["keys"][self.index])

    @property
    def center(self) -> HeisPoint:
        tab = self.systems._tables[self.alpha][self.level]
        return HeisPoint(tab["cz"][self.index], float(tab["ct"][self.index]))

    @property
    def side(self) -> float:
        return self.systems.delta ** self.level

    @property
    def cells(self) -> np.ndarray:
        return np.nonzero(self.systems.labels(self.alpha, self.level) == self.index)[0]

    @property
    def cell_count(self) -> int:
        tab = self.systems._tables[self.alpha][self.level]
        return int(tab["count"][self.index])

    @property
    def measure(self) -> float:
        return self.cell_count * self.systems.grid.cell_volume

    def parent(self) -> "DyadicCube | None":
        if self.level == self.systems.k_min:
            return None
        tab = self.systems._tables[self.alpha][self.level]
        return DyadicCube(self.systems, self.alpha, self.level - 1, int(tab["parent"][self.index]))

    def children(self):
        if self.level == self.systems.k_max:
            return []
        tab = self.systems._tables[self.alpha][self.level + 1]
        idx = np.nonzero(tab["parent"] == self.index)[0]
        return [DyadicCube(self.systems, self.alpha, self.level + 1, int(i)) for i in idx]

    def mask(self) -> np.ndarray:
        return self.systems.labels(self.alpha, self.level) == self.index

    def contains_point(self, z, t) -> np.ndarray:
        keys, _, _ = self.systems.systems[self.alpha].locate_keys(z, t, self.level)
        return np.all(keys == np.asarray(self.key), axis=-1)


class CellDyadicSystems:
    """Adjacent dyadic systems materialized on a CellGrid.

    Each grid cell carries one cube label per (system, level); cubes are
    the label classes, |Q| = cell count x cell volume, and averages are
    bincounts.  Partition and nesting hold exactly by construction.
    """

    def __init__(self, grid: CellGrid, delta: float, k_min: int, k_max: int,
                 seed: int = 0, num_systems: int = 3):
        self.grid = grid
        self.delta = float(delta)
        self.k_min = int(k_min)
        self.k_max = int(k_max)
        s_fine = _SQRT2 * delta ** k_max
        sp = grid.spacings
        if np.max(sp[:-1]) > 0.5 * s_fine or sp[-1] > 0.25 * s_fine * s_fine:
            raise ValueError(
                "grid too coarse for k_max = %d: need z spacings <= %.3g and "
                "t spacing <= %.3g, got %s" % (k_max, 0.5 * s_fine, 0.25 * s_fine ** 2, sp)
            )
        self.systems = build_systems(grid.region, delta, k_min, k_max, seed, num_systems)
        self._labels = {}
        self._tables = []
        z, t = grid.centers()
        for alpha, sys in enumerate(self.systems):
            tables = {}
            # finest-level assignment of every cell, then parent-walk on the
            # (small) set of distinct net points
            keys, zc, tc = sys.locate_keys(z, t, k_max)
            for k in range(k_max, k_min - 1, -1):
                uk, labels = np.unique(keys, axis=0, return_inverse=True)
                centers_z = np.empty((len(uk), grid.n), dtype=complex)
                centers_t = np.empty(len(uk))
                for i, key in enumerate(uk):
                    c = sys.cube_center(key, k)
                    centers_z[i] = c.z
                    centers_t[i] = c.t
                tables[k] = {
                    "keys": uk,
                    "cz": centers_z,
                    "ct": centers_t,
                    "count": np.bincount(labels, minlength=len(uk)),
                    "parent": np.full(len(uk), -1, dtype=np.int64),
                }
                self._labels[(alpha, k)] = labels
                if k > k_min:
                    # one parent step applied to the unique net points
                    pz, pt, piz, pit = _nearest_net(
                        sys.n, sys.scale(k - 1), *sys._to_base(centers_z, centers_t)
                    )
                    pkeys = _key_arrays(piz, pit)
                    keys = pkeys[labels]
            # fill parent indices (cells of one cube share one parent: nesting)
            for k in range(k_max, k_min, -1):
                child = tables[k]
                lab_k = self._labels[(alpha, k)]
                lab_p = self._labels[(alpha, k - 1)]
                first = np.full(len(child["keys"]), -1, dtype=np.int64)
                first[lab_k] = lab_p
                child["parent"] = first
            self._tables.append(tables)

    @property
    def num_systems(self) -> int:
        return len(self.systems)

    @property
    def n(self) -> int:
        return self.grid.n

    def labels(self, alpha: int, k: int) -> np.ndarray:
        return self._labels[(alpha, k)]

    def level_cubes(self, alpha: int, k: int):
        tab = self._tables[alpha][k]
        return [DyadicCube(self, alpha, k, i) for i in range(len(tab["keys"]))]

    def all_cubes(self):
        out = []
        for alpha in range(self.num_systems):
            for k in range(self.k_min, self.k_max + 1):
                out.extend(self.level_cubes(alpha, k))
        return out

    def cube(self, alpha: int, k: int, index: int) -> DyadicCube:
        return DyadicCube(self, alpha, k, index)

    def locate_cube(self, x: HeisPoint, k: int, alpha: int = 0) -> "DyadicCube | None":
        """The level-k cube of system alpha containing x (None if x is off-grid)."""
        keys, _, _ = self.systems[alpha].locate_keys(x.z[None, :], np.array([x.t]), k)
        tab = self._tables[alpha][k]
        hit = np.nonzero(np.all(tab["keys"] == keys[0], axis=1))[0]
        if len(hit) == 0:
            return None
        return DyadicCube(self, alpha, k, int(hit[0]))

    def cube_averages(self, values: np.ndarray, alpha: int, k: int, p: float) -> np.ndarray:
        """<|f|^p>_Q^{1/p} for every level-k cube at once (midpoint sums)."""
        if p < 1:
            raise ValueError("p must be >= 1")
        labels = self.labels(alpha, k)
        tab = self._tables[alpha][k]
        s = np.bincount(labels, weights=np.abs(values) ** p, minlength=len(tab["keys"]))
        return (s / tab["count"]) ** (1.0 / p)

    def dump_json(self, path):
        recs = []
        for alpha in range(self.num_systems):
            for k in range(self.k_min, self.k_max + 1):
                tab = self._tables[alpha][k]
                for i in range(len(tab["keys"])):
                    recs.append({
                        "alpha": alpha,
                        "k": k,
                        "center": list(map(float, tab["cz"][i].view(float))) + [float(tab["ct"][i])],
                        "cell_count": int(tab["count"][i]),
                        "parent_id": int(tab["parent"][i]),
                    })
        with open(path, "w") as fh:
            json.dump(recs, fh)


def cube_average(f_values: np.ndarray, Q: DyadicCube, p: float = 1.0) -> float:
    """<f>_{Q,p} = (|Q|^{-1} int_Q |f|^p)^{1/p} on the cube's cell set."""
    if p < 1:
        raise ValueError("p must be >= 1")
    vals = np.abs(f_values.reshape(-1)[Q.cells]) ** p
    return float(np.mean(vals) ** (1.0 / p))


def locate(x: HeisPoint, k: int, system) -> "DyadicCube | None":
    """Spec-level accessor: unique level-k cube containing x."""
    if isinstance(system, tuple):
        systems, alpha = system
        return systems.locate_cube(x, k, alpha)
    raise TypeError("system must be (CellDyadicSystems, alpha)")


def children(Q: DyadicCube):
    """Spec-level accessor: the cubes partitioning Q one level down."""
    return Q.children()

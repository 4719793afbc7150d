"""Spherical means on H^n by direct quadrature, and the field machinery.

The spherical mean of f over the sphere {(w,0) : |w| = r} is

    A_r f(z,t) = integral_{|w|=r} f(z-w, t - (1/2) Im z.conj(w)) dmu_r(w)

with mu_r the normalized surface measure.  Fields are either closed-form
objects (see corpus.py) or SampledField grids with multilinear off-grid
interpolation and compact-support convention (0 outside the box).

Discretized suprema (lacunary_max, local_max) are lower bounds of the
mathematical sup and are refinement-monotone; domination tests elsewhere
use the same discretization on both sides.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.stats import qmc

from .heis import BoxRegion, HeisPoint, dilate, group_inv, group_mul, twist

__all__ = [
    "CellGrid",
    "SampledField",
    "SphereRule",
    "circle_rule",
    "s3_rule",
    "sphere_rule",
    "spherical_mean",
    "derivative_mean_fd",
    "translate",
    "dilate_field",
    "lacunary_max",
    "local_max",
    "NormSampler",
    "continuity_ratio",
]


@dataclass(frozen=True)
class CellGrid:
    """Uniform cell decomposition of a BoxRegion; values live at cell centers."""

    region: BoxRegion
    shape: tuple

    def __post_init__(self):
        if len(self.shape) != 2 * self.region.n + 1:
            raise ValueError("shape must have 2n+1 axes")
        object.__setattr__(self, "shape", tuple(int(m) for m in self.shape))

    @property
    def n(self) -> int:
        return self.region.n

    @property
    def axes(self):
        hw = self.region.half_widths
        return tuple(
            -hw[i] + (np.arange(m) + 0.5) * (2 * hw[i] / m)
            for i, m in enumerate(self.shape)
        )

    @property
    def spacings(self):
        hw = self.region.half_widths
        return np.array([2 * hw[i] / m for i, m in enumerate(self.shape)])

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.shape))

    def centers(self):
        """Flattened cell centers as (z, t): complex (N, n) and float (N,)."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        flat = [m.reshape(-1) for m in mesh]
        xy = np.stack(flat[:-1], axis=-1)
        z = xy[:, 0::2] + 1j * xy[:, 1::2]
        return z, flat[-1]

    def refine(self, factor: int = 2) -> "CellGrid":
        return CellGrid(self.region, tuple(m * factor for m in self.shape))


class SampledField:
    """Real- or complex-valued function sampled on a CellGrid.

    Evaluation off the cell centers is multilinear; outside the region the
    field is 0 (compact support convention).  Values are immutable once the
    field is built.
    """

    def __init__(self, grid: CellGrid, values: np.ndarray):
        values = np.asarray(values)
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} != grid shape {grid.shape}")
        if not np.all(np.isfinite(values.view(float) if values.dtype.kind == "c" else values)):
            raise ValueError("field values must be finite")
        self.grid = grid
        self.values = values
        self.values.setflags(write=False)
        self._interp = RegularGridInterpolator(
            grid.axes, values, method="linear", bounds_error=False, fill_value=0.0
        )

    @property
    def n(self) -> int:
        return self.grid.n

    @classmethod
    def from_function(cls, grid: CellGrid, fn) -> "SampledField":
        z, t = grid.centers()
        return cls(grid, np.asarray(fn(z, t)).reshape(grid.shape))

    def eval_batch(self, z, t):
        z = np.asarray(z, dtype=complex)
        t = np.asarray(t, dtype=float)
        xy = np.stack([z.real, z.imag], axis=-1).reshape(z.shape[:-1] + (2 * self.n,))
        pts = np.concatenate([xy, t[..., None]], axis=-1)
        return self._interp(pts)

    def lp_norm(self, p: float) -> float:
        """Midpoint-Riemann L^p norm over the grid."""
        return float(
            (np.sum(np.abs(self.values) ** p) * self.grid.cell_volume) ** (1.0 / p)
        )

    def integral(self) -> float:
        return float(np.sum(self.values) * self.grid.cell_volume)


@dataclass(frozen=True)
class SphereRule:
    """Quadrature nodes on the unit sphere of C^n with weights summing to 1."""

    nodes: np.ndarray  # complex, shape (M, n), |node| = 1
    weights: np.ndarray
    meta: tuple = ()

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=complex)
        w = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 2 or w.shape != (nodes.shape[0],):
            raise ValueError("nodes must be (M, n), weights (M,)")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        w = w / w.sum()
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.nodes.shape[1]

    def is_antipodal(self, tol: float = 1e-12) -> bool:
        """True if the node set is symmetric under w -> -w with equal weights."""
        key = np.concatenate([self.nodes.view(float).reshape(len(self.weights), -1),
                              self.weights[:, None]], axis=1)
        neg = np.concatenate([(-self.nodes).view(float).reshape(len(self.weights), -1),
                              self.weights[:, None]], axis=1)
        a = np.round(key / tol).astype(np.int64)
        b = np.round(neg / tol).astype(np.int64)
        return set(map(tuple, a)) == set(map(tuple, b))


def circle_rule(m: int = 128) -> SphereRule:
    """Uniform m-point rule on the unit circle of C (n=1); spectrally accurate.

    Even m gives exact antipodal symmetry, killing odd integrands such as
    the Im z.conj(w) twist for f linear in t.
    """
    theta = 2 * np.pi * np.arange(m) / m
    nodes = np.exp(1j * theta)[:, None]
    return SphereRule(nodes, np.full(m, 1.0 / m), meta=("circle", m))


def s3_rule(m_eta: int = 6, m_phi: int = 8) -> SphereRule:
    """Product rule on S^3 in C^2 via Hopf coordinates.

    w = (cos(eta) e^{i phi1}, sin(eta) e^{i phi2}); the normalized measure is
    (2 pi^2)^{-1} sin(eta) cos(eta) d(eta) d(phi1) d(phi2), and v = sin^2(eta)
    turns the eta factor into (1/2) dv on [0,1], handled by Gauss-Legendre.
    Even m_phi makes the rule antipodally symmetric.
    """
    v, wv = np.polynomial.legendre.leggauss(m_eta)
    v = 0.5 * (v + 1.0)
    wv = 0.5 * wv
    phi1 = 2 * np.pi * np.arange(m_phi) / m_phi
    phi2 = 2 * np.pi * np.arange(m_phi) / m_phi
    V, P1, P2 = np.meshgrid(v, phi1, phi2, indexing="ij")
    c = np.sqrt(1.0 - V)
    s = np.sqrt(V)
    nodes = np.stack([c * np.exp(1j * P1), s * np.exp(1j * P2)], axis=-1).reshape(-1, 2)
    w = (np.tile(wv[:, None, None], (1, m_phi, m_phi)) / (m_phi * m_phi)).reshape(-1)
    return SphereRule(nodes, w, meta=("s3_hopf", m_eta, m_phi))


def sphere_rule(n: int, size: int = 0) -> SphereRule:
    """Default rule for dimension n (n = 1 or 2 at desk scale)."""
    if n == 1:
        return circle_rule(size or 128)
    if n == 2:
        return s3_rule(*( (size, size) if size else (6, 8) ))
    raise ValueError("sphere rules implemented for n in {1, 2}")


def _as_batch(x):
    if isinstance(x, HeisPoint):
        return x.z[None, :], np.array([x.t]), True
    z, t = x
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    return z, np.atleast_1d(np.asarray(t, dtype=float)), False


def spherical_mean(f, r: float, x, rule: SphereRule, return_info: bool = False):
    """A_r f at x (a HeisPoint or a batch (z, t)); exact average for f = const.

    f(z - w, t - (1/2) Im z.conj(w)) is summed against the rule weights with
    w = r * node.  With return_info=True also returns a dict whose
    ``flagged`` entry marks spheres that exit a SampledField's region while
    the field still carries mass there (clipped averages).
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    z, t, scalar = _as_batch(x)
    w = r * rule.nodes  # (M, n)
    zz = z[:, None, :] - w[None, :, :]
    tt = t[:, None] - twist(z[:, None, :], w[None, :, :])
    vals = f.eval_batch(zz, tt)
    out = vals @ rule.weights
    res = float(np.real(out[0])) if scalar and np.isrealobj(out) else (out[0] if scalar else out)
    if not return_info:
        return res
    info = {"flagged": False, "outside_fraction": 0.0, "boundary_mass": 0.0}
    if isinstance(f, SampledField):
        outside = ~f.grid.region.contains(zz, tt)
        info["outside_fraction"] = float(np.mean(outside))
        # field magnitude on the outermost cell slabs of the region
        edge = 0.0
        for axis in range(len(f.grid.shape)):
            sl = [slice(None)] * len(f.grid.shape)
            for idx in (0, -1):
                sl[axis] = idx
                edge = max(edge, float(np.max(np.abs(f.values[tuple(sl)]))))
        info["boundary_mass"] = edge
        info["flagged"] = bool(np.any(outside) and edge > 1e-12)
    return res, info


def derivative_mean_fd(f, r: float, x, rule: SphereRule, h: float = 1e-3):
    """d/dr A_r f at x by Richardson-extrapolated central differences."""
    def central(step):
        return (spherical_mean(f, r + step, x, rule) - spherical_mean(f, r - step, x, rule)) / (2 * step)

    d1 = central(h)
    d2 = central(h / 2)
    return (4.0 * d2 - d1) / 3.0


class _TranslatedField:
    """tau_y f with closed-form composition: (tau_y f)(x) = f(x y^{-1})."""

    def __init__(self, base, y: HeisPoint):
        self.base = base
        self.y = y
        self.n = y.n

    def eval_batch(self, z, t):
        zy, ty = self.y.z, self.y.t
        z = np.asarray(z, dtype=complex)
        zz = z - zy
        tt = np.asarray(t) - ty - twist(z, np.broadcast_to(zy, z.shape))
        return self.base.eval_batch(zz, tt)


class _DilatedField:
    """delta_r f: (delta_r f)(w,t) = f(rw, r^2 t)."""

    def __init__(self, base, r: float):
        self.base = base
        self.r = float(r)
        self.n = base.n

    def eval_batch(self, z, t):
        return self.base.eval_batch(self.r * np.asarray(z, dtype=complex),
                                    self.r * self.r * np.asarray(t))


def translate(f, y: HeisPoint):
    """Right translation tau_y f(x) = f(x y^{-1}).

    SampledFields are resampled on their own grid (multilinear error is part
    of the budget); closed-form fields stay closed-form.
    """
    if isinstance(f, SampledField):
        zc, tc = f.grid.centers()
        yz, yt = y.z, y.t
        zz = zc - yz
        tt = tc - yt - twist(zc, np.broadcast_to(yz, zc.shape))
        return SampledField(f.grid, f.eval_batch(zz, tt).reshape(f.grid.shape))
    return _TranslatedField(f, y)


def dilate_field(f, r: float):
    """Non-isotropic dilation of the field; exact for SampledField.

    delta_r f sampled at (x/r, t/r^2) equals f at (x, t), so the value array
    is shared and only the region axes rescale (z by 1/r, t by 1/r^2).
    """
    if not r > 0:
        raise ValueError("dilation parameter must be positive")
    if isinstance(f, SampledField):
        hw = f.grid.region.half_widths.copy()
        hw[:-1] /= r
        hw[-1] /= r * r
        return SampledField(CellGrid(BoxRegion(hw), f.grid.shape), f.values)
    return _DilatedField(f, r)


def lacunary_max(f, delta: float, j_range, x, rule: SphereRule):
    """sup over j in j_range of |A_{delta^j} f(x)| (discretized lacunary max)."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0,1)")
    js = list(j_range)
    if not js:
        raise ValueError("empty j range")
    vals = [np.abs(spherical_mean(f, delta ** j, x, rule)) for j in js]
    return np.maximum.reduce(vals)


def local_max(f, delta: float, r_nodes: int, x, rule: SphereRule):
    """sup over r in [1, 1/delta] of |A_r f(x)|, on a geometric r-grid.

    A lower bound of the true sup; more nodes never decrease the value.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0,1)")
    if r_nodes < 1:
        raise ValueError("need at least one node")
    rs = np.geomspace(1.0, 1.0 / delta, r_nodes)
    vals = [np.abs(spherical_mean(f, r, x, rule)) for r in rs]
    return np.maximum.reduce(vals)


class NormSampler:
    """Fixed evaluation nodes + weights for L^p norms of closed-form fields.

    Quasi-Monte-Carlo nodes (scaled Sobol) share the same point set across
    every field they measure, so norm *ratios* are consistent discretized
    quantities.
    """

    def __init__(self, z, t, weight: float):
        self.z = z
        self.t = t
        self.weight = float(weight)

    @classmethod
    def quasi_mc(cls, region: BoxRegion, m: int, seed: int = 0) -> "NormSampler":
        d = 2 * region.n + 1
        eng = qmc.Sobol(d, scramble=True, seed=seed)
        u = eng.random(m)
        hw = region.half_widths
        pts = (2 * u - 1.0) * hw
        z = pts[:, 0:-1:2] + 1j * pts[:, 1:-1:2]
        return cls(z, pts[:, -1], region.volume() / m)

    @classmethod
    def from_grid(cls, grid: CellGrid) -> "NormSampler":
        z, t = grid.centers()
        return cls(z, t, grid.cell_volume)

    def lp_norm(self, values, p: float) -> float:
        return float((np.sum(np.abs(values) ** p) * self.weight) ** (1.0 / p))

    def field_lp_norm(self, f, p: float) -> float:
        return self.lp_norm(f.eval_batch(self.z, self.t), p)


def continuity_ratio(f, y: HeisPoint, p: float, q: float, r: float,
                     rule: SphereRule, sampler: NormSampler) -> float:
    """||A_r f - A_r tau_y f||_q / ||f||_p on the sampler's fixed nodes."""
    fy = translate(f, y)
    a = spherical_mean(f, r, (sampler.z, sampler.t), rule)
    b = spherical_mean(fy, r, (sampler.z, sampler.t), rule)
    return sampler.lp_norm(a - b, q) / sampler.field_lp_norm(f, p)

"""Heisenberg group arithmetic.

The group H^n = C^n x R carries the product

    (z,t)(w,s) = (z+w, t+s+(1/2) Im z.conj(w)),

the Koranyi norm |(z,t)| = (|z|^4+t^2)^(1/4), the non-isotropic dilations
delta_r(z,t) = (rz, r^2 t), and the left-invariant metric
d_L(x,y) = |x^{-1} y|.  Everything here is pure and stateless; the batch
functions accept arrays of points (z with shape (..., n) complex, t with
shape (...)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HeisPoint",
    "BoxRegion",
    "group_mul",
    "group_inv",
    "identity",
    "koranyi_norm",
    "dist_left",
    "dilate",
    "ball_contains",
    "twist",
    "mul_batch",
    "inv_batch",
    "norm_batch",
    "dist_batch",
]


@dataclass(frozen=True)
class HeisPoint:
    """A point (z, t) of H^n; z is a complex n-vector, t a real scalar."""

    z: np.ndarray
    t: float

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.z, dtype=complex))
        if z.ndim != 1:
            raise ValueError("z must be a 1-d complex vector")
        if not (np.all(np.isfinite(z.view(float))) and np.isfinite(self.t)):
            raise ValueError("coordinates must be finite")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return self.z.shape[0]

    def __mul__(self, other: "HeisPoint") -> "HeisPoint":
        return group_mul(self, other)


def identity(n: int) -> HeisPoint:
    return HeisPoint(np.zeros(n, dtype=complex), 0.0)


def twist(z, w):
    """(1/2) Im z.conj(w), the symplectic form entering the group law.

    Broadcasts over leading axes; the last axis is the C^n coordinate.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return 0.5 * np.imag(np.sum(z * np.conj(w), axis=-1))


def group_mul(a: HeisPoint, b: HeisPoint) -> HeisPoint:
    """(z,t)(w,s) = (z+w, t+s+(1/2) Im z.conj(w))."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    return HeisPoint(a.z + b.z, a.t + b.t + float(twist(a.z, b.z)))


def group_inv(a: HeisPoint) -> HeisPoint:
    """Group inverse (-z, -t); Im z.conj(-z) = 0 makes this exact."""
    return HeisPoint(-a.z, -a.t)


def koranyi_norm(a: HeisPoint) -> float:
    """|(z,t)| = (|z|^4 + t^2)^(1/4)."""
    zz = float(np.sum(np.abs(a.z) ** 2))
    return float((zz * zz + a.t * a.t) ** 0.25)


def dist_left(x: HeisPoint, y: HeisPoint) -> float:
    """Left-invariant metric d_L(x,y) = |x^{-1} y|."""
    return koranyi_norm(group_mul(group_inv(x), y))


def dilate(r: float, a: HeisPoint) -> HeisPoint:
    """Non-isotropic dilation delta_r(z,t) = (rz, r^2 t); requires r > 0."""
    if not r > 0:
        raise ValueError("dilation parameter must be positive")
    return HeisPoint(r * a.z, r * r * a.t)


def ball_contains(center: HeisPoint, radius: float, x: HeisPoint) -> bool:
    """Membership in B(a,r) = {x : |a^{-1}x| < r} (strict inequality)."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    return dist_left(center, x) < radius


# Batch forms used by the grid and dyadic machinery.  z arrays have shape
# (..., n) complex, t arrays shape (...).


def mul_batch(z1, t1, z2, t2):
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    return z1 + z2, np.asarray(t1) + np.asarray(t2) + twist(z1, z2)


def inv_batch(z, t):
    return -np.asarray(z, dtype=complex), -np.asarray(t)


def norm_batch(z, t):
    zz = np.sum(np.abs(np.asarray(z, dtype=complex)) ** 2, axis=-1)
    return (zz * zz + np.asarray(t) ** 2) ** 0.25


def dist_batch(zc, tc, z, t):
    """d_L((zc,tc), (z,t)) broadcast over leading axes."""
    zi, ti = inv_batch(zc, tc)
    zm, tm = mul_batch(zi, ti, z, t)
    return norm_batch(zm, tm)


@dataclass(frozen=True)
class BoxRegion:
    """Axis-aligned box [-L_i, L_i] in the real coordinates (x1,y1,...,xn,yn,t).

    half_widths has length 2n+1; the last entry is the t half-width.
    """

    half_widths: np.ndarray

    def __post_init__(self):
        hw = np.asarray(self.half_widths, dtype=float)
        if hw.ndim != 1 or hw.shape[0] < 3 or hw.shape[0] % 2 == 0:
            raise ValueError("half_widths must be a 1-d array of odd length >= 3")
        if not np.all(hw > 0):
            raise ValueError("half-widths must be strictly positive")
        object.__setattr__(self, "half_widths", hw)

    @property
    def n(self) -> int:
        return (self.half_widths.shape[0] - 1) // 2

    @property
    def z_half_widths(self) -> np.ndarray:
        return self.half_widths[:-1]

    @property
    def t_half_width(self) -> float:
        return float(self.half_widths[-1])

    def contains(self, z, t, shrink: float = 0.0):
        """Vectorized box membership; shrink in [0,1) tests the box scaled
        down by that relative fraction per axis."""
        z = np.asarray(z, dtype=complex)
        xy = np.stack([z.real, z.imag], axis=-1).reshape(z.shape[:-1] + (2 * self.n,))
        hw = self.half_widths * (1.0 - shrink)
        ok = np.all(np.abs(xy) <= hw[:-1], axis=-1)
        return ok & (np.abs(np.asarray(t)) <= hw[-1])

    def volume(self) -> float:
        return float(np.prod(2.0 * self.half_widths))


def cube_region(n: int, z_half: float, t_half: float) -> BoxRegion:
    """Convenience: box with equal z half-widths and the given t half-width."""
    return BoxRegion(np.array([z_half] * (2 * n) + [t_half]))

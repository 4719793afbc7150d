"""Closed-form test fields and the corpus definition file format.

The workhorse is the separable Gaussian

    f(z,t) = amplitude * exp(-a |z - z0|^2) * exp(-b (t - t0)^2),

whose partial Fourier transform in t is closed-form,

    f^lambda(z) = amplitude * exp(-a|z-z0|^2) * sqrt(pi/b)
                  * exp(-lambda^2/(4b)) * exp(i lambda t0),

which removes one quadrature layer from every spectral test.

Corpus files are flat key-value text with sections (configparser syntax):

    [gaussian:g1]
    a = 1.0
    b = 1.0
    center = 0.1 -0.2 0.0    # x1 y1 ... xn yn t
    amplitude = 1.0

    [random:r1]
    seed = 7
    smooth = 2
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from .heis import HeisPoint

__all__ = ["GaussianField", "RandomFieldSpec", "default_corpus", "load_corpus", "write_corpus"]


@dataclass(frozen=True)
class GaussianField:
    n: int
    a: float
    b: float
    center: HeisPoint = None
    amplitude: float = 1.0
    name: str = "gaussian"

    def __post_init__(self):
        if self.center is None:
            object.__setattr__(self, "center", HeisPoint(np.zeros(self.n, dtype=complex), 0.0))
        if self.center.n != self.n:
            raise ValueError("center dimension mismatch")
        if not (self.a > 0 and self.b > 0):
            raise ValueError("gaussian decay rates must be positive")

    def eval_batch(self, z, t):
        z = np.asarray(z, dtype=complex)
        dz = np.sum(np.abs(z - self.center.z) ** 2, axis=-1)
        dt = np.asarray(t, dtype=float) - self.center.t
        return self.amplitude * np.exp(-self.a * dz - self.b * dt * dt)

    def z_profile(self, z):
        z = np.asarray(z, dtype=complex)
        dz = np.sum(np.abs(z - self.center.z) ** 2, axis=-1)
        return self.amplitude * np.exp(-self.a * dz)

    def t_profile(self, t):
        dt = np.asarray(t, dtype=float) - self.center.t
        return np.exp(-self.b * dt * dt)

    def partial_ft_closed_form(self, lam: float):
        """z-profile of f^lambda as a callable, with its scalar t-factor."""
        c = self.amplitude * np.sqrt(np.pi / self.b) * np.exp(-lam * lam / (4 * self.b))
        phase = np.exp(1j * lam * self.center.t)

        def profile(z):
            z = np.asarray(z, dtype=complex)
            dz = np.sum(np.abs(z - self.center.z) ** 2, axis=-1)
            return (c * phase) * np.exp(-self.a * dz)

        return profile

    def z_sigma(self) -> float:
        """Gaussian scale in z (1/e half-width is 1/sqrt(a))."""
        return 1.0 / np.sqrt(self.a)


@dataclass(frozen=True)
class RandomFieldSpec:
    """Reproducible random nonnegative field: realized on a grid on demand.

    `smooth` neighbor-averaging passes tame the cell noise; the same seed on
    the same grid always produces the same field.
    """

    seed: int
    smooth: int = 0
    amplitude: float = 1.0
    name: str = "random"

    def realize(self, grid):
        from .means import SampledField

        rng = np.random.default_rng(self.seed)
        vals = rng.random(grid.shape)
        for _ in range(self.smooth):
            acc = vals.copy()
            for axis in range(vals.ndim):
                acc = acc + np.roll(vals, 1, axis) + np.roll(vals, -1, axis)
            vals = acc / (2 * vals.ndim + 1)
        return SampledField(grid, self.amplitude * vals)


def default_corpus(n: int):
    """The built-in Gaussian corpus (>= 5 parameter sets)."""
    mk = lambda a, b, zc, tc, name: GaussianField(
        n, a, b, HeisPoint(np.asarray(zc, dtype=complex), tc), 1.0, name
    )
    if n == 1:
        return [
            mk(1.0, 1.0, [0.0], 0.0, "g-unit"),
            mk(0.5, 1.0, [0.0], 0.0, "g-wide-z"),
            mk(2.0, 0.7, [0.0], 0.0, "g-narrow-z"),
            mk(1.0, 2.0, [0.3], 0.1, "g-offset"),
            mk(1.5, 0.5, [0.2 - 0.1j], -0.2, "g-skew"),
            mk(0.8, 1.5, [-0.25j], 0.15, "g-imag"),
        ]
    zeros = [0.0] * n
    off = [0.2] + [0.0] * (n - 1)
    return [
        mk(1.0, 1.0, zeros, 0.0, "g-unit"),
        mk(0.5, 1.0, zeros, 0.0, "g-wide-z"),
        mk(2.0, 0.7, zeros, 0.0, "g-narrow-z"),
        mk(1.0, 2.0, off, 0.1, "g-offset"),
        mk(1.5, 0.5, off, -0.2, "g-skew"),
    ]


def load_corpus(path, n: int):
    """Parse a corpus definition file into field objects."""
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    fields = []
    for sec in cp.sections():
        kind, _, name = sec.partition(":")
        if kind == "gaussian":
            coords = [float(v) for v in cp.get(sec, "center", fallback="").split()] or [0.0] * (2 * n + 1)
            if len(coords) != 2 * n + 1:
                raise ValueError(f"corpus section {sec}: center needs 2n+1 coordinates")
            z = np.asarray(coords[0:-1:2]) + 1j * np.asarray(coords[1:-1:2])
            fields.append(
                GaussianField(
                    n,
                    cp.getfloat(sec, "a"),
                    cp.getfloat(sec, "b"),
                    HeisPoint(z, coords[-1]),
                    cp.getfloat(sec, "amplitude", fallback=1.0),
                    name or kind,
                )
            )
        elif kind == "random":
            fields.append(
                RandomFieldSpec(
                    cp.getint(sec, "seed"),
                    cp.getint(sec, "smooth", fallback=0),
                    cp.getfloat(sec, "amplitude", fallback=1.0),
                    name or kind,
                )
            )
        else:
            raise ValueError(f"unknown corpus section kind {kind!r}")
    return fields


def write_corpus(path, fields):
    cp = configparser.ConfigParser()
    for f in fields:
        sec = f"gaussian:{f.name}"
        cp[sec] = {}
        cp[sec]["a"] = repr(float(f.a))
        cp[sec]["b"] = repr(float(f.b))
        coords = []
        for zj in f.center.z:
            coords += [float(zj.real), float(zj.imag)]
        coords.append(float(f.center.t))
        cp[sec]["center"] = " ".join(repr(c) for c in coords)
        cp[sec]["amplitude"] = repr(float(f.amplitude))
    with open(path, "w") as fh:
        cp.write(fh)

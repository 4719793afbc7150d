"""Exponent regions: the (1/p, 1/q) triangles for the L^p-L^q and sparse bounds.

All vertices are exact rationals (fractions.Fraction); membership tests are
exact, so open/closed boundary semantics carry no floating-point ambiguity.

Named triangles (n is the Heisenberg dimension parameter):

* ``lacunary_sparse`` (a.k.a. S_n): (0,1), (1,0), ((3n+1)/(3n+4), (3n+1)/(3n+4)),
  the sparse-form exponent region for the lacunary maximal function.
* ``lacunary_lplq`` (S_n'): (0,0), (1,1), ((3n+1)/(3n+4), 3/(3n+4)), the
  L^p-L^q region for the single-scale average (dual picture).
* ``full_sparse`` (F_n): (0,1), ((2n-1)/(2n), 1/(2n)), ((3n+1)/(3n+7), (3n+1)/(3n+7)).
* ``full_lplq`` (F_n'): (0,0), ((2n-1)/(2n), (2n-1)/(2n)), ((3n+1)/(3n+7), 6/(3n+7)),
  the region for the local full maximal operator.
* ``euclidean_lacunary``: (0,1), (1,0), (n/(n+1), n/(n+1)), the Euclidean
  reference triangle contained in ``lacunary_sparse``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction

__all__ = ["ExponentTriangle", "triangle", "TRIANGLE_NAMES", "duality_map", "vertices_to_csv"]


@dataclass(frozen=True)
class ExponentTriangle:
    name: str
    vertices: tuple

    def __post_init__(self):
        vs = tuple((Fraction(a), Fraction(b)) for a, b in self.vertices)
        if len(vs) != 3:
            raise ValueError("a triangle needs exactly three vertices")
        for a, b in vs:
            if not (0 <= a <= 1 and 0 <= b <= 1):
                raise ValueError("vertices must lie in the unit square")
        if self._orientation(vs) == 0:
            raise ValueError("degenerate triangle")
        object.__setattr__(self, "vertices", vs)

    @staticmethod
    def _orientation(vs):
        (x0, y0), (x1, y1), (x2, y2) = vs
        return (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)

    def contains(self, p_inv, q_inv, strict: bool = True) -> bool:
        """Exact barycentric membership; strict=True means open interior."""
        p = Fraction(p_inv)
        q = Fraction(q_inv)
        sgn = 1 if self._orientation(self.vertices) > 0 else -1
        vs = self.vertices
        for i in range(3):
            (x0, y0), (x1, y1) = vs[i], vs[(i + 1) % 3]
            side = sgn * ((x1 - x0) * (q - y0) - (p - x0) * (y1 - y0))
            if strict and side <= 0:
                return False
            if not strict and side < 0:
                return False
        return True

    def contains_triangle(self, other: "ExponentTriangle", strict: bool = False) -> bool:
        return all(self.contains(a, b, strict=strict) for a, b in other.vertices)

    def boundary_points(self, per_edge: int = 16):
        """Sampled boundary polyline (closed), exact rationals."""
        pts = []
        vs = self.vertices
        for i in range(3):
            (x0, y0), (x1, y1) = vs[i], vs[(i + 1) % 3]
            for j in range(per_edge):
                s = Fraction(j, per_edge)
                pts.append((x0 + s * (x1 - x0), y0 + s * (y1 - y0)))
        pts.append(vs[0])
        return pts

    def centroid(self):
        xs = sum(v[0] for v in self.vertices) / 3
        ys = sum(v[1] for v in self.vertices) / 3
        return xs, ys


def _frac(a, b) -> Fraction:
    return Fraction(a, b)


TRIANGLE_NAMES = (
    "lacunary_sparse",
    "lacunary_lplq",
    "full_sparse",
    "full_lplq",
    "euclidean_lacunary",
)


def triangle(name: str, n: int) -> ExponentTriangle:
    """Build a named exponent triangle for dimension parameter n >= 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if name == "lacunary_sparse":
        v = _frac(3 * n + 1, 3 * n + 4)
        verts = ((0, 1), (1, 0), (v, v))
    elif name == "lacunary_lplq":
        verts = ((0, 0), (1, 1), (_frac(3 * n + 1, 3 * n + 4), _frac(3, 3 * n + 4)))
    elif name == "full_sparse":
        v = _frac(3 * n + 1, 3 * n + 7)
        verts = ((0, 1), (_frac(2 * n - 1, 2 * n), _frac(1, 2 * n)), (v, v))
    elif name == "full_lplq":
        verts = (
            (0, 0),
            (_frac(2 * n - 1, 2 * n), _frac(2 * n - 1, 2 * n)),
            (_frac(3 * n + 1, 3 * n + 7), _frac(6, 3 * n + 7)),
        )
    elif name == "euclidean_lacunary":
        v = _frac(n, n + 1)
        verts = ((0, 1), (1, 0), (v, v))
    else:
        raise ValueError(f"unknown triangle name: {name!r}")
    return ExponentTriangle(name=f"{name}[n={n}]", vertices=verts)


def duality_map(p_inv, q_inv):
    """(1/p, 1/q) -> (1/p, 1 - 1/q), carrying a region to its dual picture."""
    return Fraction(p_inv), 1 - Fraction(q_inv)


def vertices_to_csv(path, names, n_values):
    """Emit vertex tables for plotting; exact fractions as text.

    Degenerate combinations (the Euclidean triangle collapses to a segment
    at n = 1) are skipped.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "n", "vertex", "p_inv", "q_inv", "p_inv_float", "q_inv_float"])
        for name in names:
            for n in n_values:
                try:
                    tri = triangle(name, n)
                except ValueError:
                    continue
                for i, (a, b) in enumerate(tri.vertices):
                    writer.writerow([name, n, i, str(a), str(b), float(a), float(b)])

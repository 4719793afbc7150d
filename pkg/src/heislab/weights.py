"""Muckenhoupt and reverse-Holder characteristics, and weighted sparse forms.

For a positive weight w and sigma = w^{1-p'},

    [w]_{A_p}  = sup_Q <w>_Q <sigma>_Q^{p-1},
    [w]_{RH_p} = sup_Q <w>_Q^{-1} <w>_{Q,p},

with the sup taken (at desk scale) over all built dyadic cubes across
systems.  The weighted sparse-form bound under test is

    Lambda_{p0,q0}(f,g) <= ([w]_{A_{p/p0}} [w]_{RH_{(q0'/p)'}})^alpha
                           ||f||_{L^p(w)} ||g||_{L^{p'}(sigma)},
    alpha = max(1/(p-1), (q0'-1)/(q0'-p)),  p0 < p < q0'.
"""

from __future__ import annotations

import csv

import numpy as np

from .dyadic import CellDyadicSystems
from .sparse import SparseFamily, sparse_form

__all__ = [
    "ap_characteristic",
    "rh_characteristic",
    "bfp_check",
    "phi_exponent",
    "weight_rows_to_csv",
]


def _check_weight(w_values):
    w = np.asarray(w_values, dtype=float).reshape(-1)
    if np.any(w <= 0):
        raise ValueError("weight must be strictly positive on the grid")
    return w


def _sup_over_cubes(cd: CellDyadicSystems, fn):
    best = -np.inf
    for alpha in range(cd.num_systems):
        for k in range(cd.k_min, cd.k_max + 1):
            best = max(best, float(np.max(fn(alpha, k))))
    return best


def ap_characteristic(w_values, p: float, cd: CellDyadicSystems) -> float:
    """[w]_{A_p} over all built cubes; >= 1 by Jensen, = 1 for constants."""
    if not p > 1:
        raise ValueError("A_p needs p > 1")
    w = _check_weight(w_values)
    pp = p / (p - 1.0)
    sigma = w ** (1.0 - pp)

    def per_level(alpha, k):
        aw = cd.cube_averages(w, alpha, k, 1.0)
        asig = cd.cube_averages(sigma, alpha, k, 1.0)
        return aw * asig ** (p - 1.0)

    return _sup_over_cubes(cd, per_level)


def rh_characteristic(w_values, p: float, cd: CellDyadicSystems) -> float:
    """[w]_{RH_p} over all built cubes; >= 1 by the power-mean inequality."""
    if not p >= 1:
        raise ValueError("RH_p needs p >= 1")
    w = _check_weight(w_values)

    def per_level(alpha, k):
        return cd.cube_averages(w, alpha, k, p) / cd.cube_averages(w, alpha, k, 1.0)

    return _sup_over_cubes(cd, per_level)


def bfp_check(S: SparseFamily, f_values, g_values, w_values, p: float,
              p0: float, q0: float, cd: CellDyadicSystems) -> dict:
    """Evaluate both sides of the weighted sparse-form bound on the grid.

    Returns the report dict with the slack factor rhs/lhs (slack >= 1 means
    the inequality held with the absorbed constant).
    """
    if not (1 <= p0 < _conj(q0) and p0 < p < _conj(q0)):
        raise ValueError("need 1 <= p0 < q0' and p0 < p < q0'")
    w = _check_weight(w_values)
    f = np.asarray(f_values, dtype=float).reshape(-1)
    g = np.asarray(g_values, dtype=float).reshape(-1)
    q0p = _conj(q0)
    pp = _conj(p)
    sigma = w ** (1.0 - pp)
    vol = cd.grid.cell_volume
    lhs = sparse_form(S, f, g, p0, q0)
    apc = ap_characteristic(w, p / p0, cd)
    rhc = rh_characteristic(w, _conj(q0p / p), cd)
    alpha = max(1.0 / (p - 1.0), (q0p - 1.0) / (q0p - p))
    fn = (np.sum(np.abs(f) ** p * w) * vol) ** (1.0 / p)
    gn = (np.sum(np.abs(g) ** pp * sigma) * vol) ** (1.0 / pp)
    rhs = (apc * rhc) ** alpha * fn * gn
    return {
        "p": p, "p0": p0, "q0": q0,
        "ap_char": apc, "rh_char": rhc, "alpha": alpha,
        "lhs": lhs, "rhs": rhs,
        "slack": rhs / lhs if lhs > 0 else np.inf,
    }


def _conj(p: float) -> float:
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def phi_exponent(p0_inv: float, n: int) -> float:
    """1/phi(1/p0) for the weighted boundedness region of the lacunary
    maximal function:

        1 - 1/(n p0)   for 0 < 1/p0 <= n/(n+1),
        n (1 - 1/p0)   for n/(n+1) < 1/p0 < 1,

    continuous at the breakpoint n/(n+1)."""
    if not 0 < p0_inv < 1:
        raise ValueError("need 0 < 1/p0 < 1")
    if p0_inv <= n / (n + 1.0):
        return 1.0 - p0_inv / n
    return n * (1.0 - p0_inv)


def weight_rows_to_csv(path, rows):
    cols = ["weight_id", "p", "p0", "q0", "ap_char", "rh_char", "alpha", "lhs", "rhs", "slack"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow([r.get(c) for c in cols])

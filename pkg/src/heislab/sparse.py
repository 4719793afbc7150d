"""Stopping-time sparse machinery over cell dyadic systems.

The pipeline mirrors the lacunary sparse-domination argument:

* localized means A_Q f = A_{delta^{k+2}}(f 1_{V_Q}) with
  V_Q = union of the level-(k+3) pieces P (of system 0) whose ball
  B(z_P, delta^{k+1}) lies inside Q; the support of A_Q f stays in Q.
* linearization sets E_Q = {x in Q : A_Q f(x) >= (1/2) sup_P A_P f(x)} and
  B_Q = E_Q minus the E's of strictly larger cubes; the B_Q are disjoint and
  <sup_Q A_Q f, g> <= 2 sum_Q <A_Q f, g 1_{B_Q}> holds exactly.
* Calderon-Zygmund stopping cubes (maximal with <f>_{P,p} above a threshold
  multiple of <f>_{Q0,p}), the two-sided (f, g) variant with the threshold
  multiplier escalated 2, 4, 8, ... until the stopping cubes fill less than
  half of Q0, and the recursive sparse-family builder with major sets
  E_S = S minus its stopping children (1/2-sparse by construction).
* the sparse form Lambda_{S,p,q}(f,g) = sum |S| <f>_{S,p} <g>_{S,q}, the
  Lorentz L^{r,1} norms, the level-set lemma with its exact constant 2, and
  the Carleson embedding check.

Everything set-level is exact on grid cells: masks are boolean cell arrays
and measures are cell counts times cell volume.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .dyadic import CellDyadicSystems, DyadicCube, cube_average, koranyi_ball_sample
from .heis import HeisPoint, mul_batch, twist
from .means import SampledField, SphereRule, spherical_mean

__all__ = [
    "localized_AQ",
    "localized_AQ_full",
    "LinearizationSets",
    "linearize",
    "cz_stopping",
    "stopping_children",
    "SparseFamily",
    "build_sparse_family",
    "sparse_form",
    "verify_domination",
    "lorentz_norm",
    "lorentz_norm_rearranged",
    "lorentz_lp_embedding_constant",
    "check_level_set_lemma",
    "carleson_check",
    "domination_rows_to_csv",
]


def _chunked_mean(f, r, z, t, rule, chunk=16384):
    out = np.empty(len(t))
    for i in range(0, len(t), chunk):
        out[i:i + chunk] = spherical_mean(f, r, (z[i:i + chunk], t[i:i + chunk]), rule)
    return out


def v_mask(Q: DyadicCube, margin="lemma", ball_samples: int = 96) -> np.ndarray:
    """Cell mask of the localization set V_Q.

    margin="lemma": literal definition, the level-(k+3) pieces P of system 0
    whose ball B(z_P, delta^{k+1}) lies in Q.  At delta = 1/2 this set is
    provably empty (the ball radius equals the cube inradius), so engineering
    runs at large delta pass margin = c instead: cells whose own ball
    B(center, c * delta^{k+2}) lies in Q, which keeps the support property
    exact while the lemma-faithful variant is exercised at small delta.
    """
    cd = Q.systems
    sysq = cd.systems[Q.alpha]
    k = Q.level
    delta = cd.delta
    z, t = cd.grid.centers()
    own = Q.mask()
    idx_own = np.nonzero(own)[0]
    mask = np.zeros(cd.grid.num_cells, dtype=bool)
    qkey = np.asarray(Q.key)
    if margin == "lemma":
        zp, tp, keys = cd.systems[0].net_point(z[own], t[own], k + 3)
        uk, inv = np.unique(keys, axis=0, return_inverse=True)
        ok_unique = np.zeros(len(uk), dtype=bool)
        for i in range(len(uk)):
            j = np.nonzero(inv == i)[0][0]
            c = HeisPoint(zp[j], float(tp[j]))
            bz, bt = koranyi_ball_sample(c, delta ** (k + 1), m=ball_samples, seed=13)
            kk, _, _ = sysq.locate_keys(bz, bt, k)
            ok_unique[i] = bool(np.all(np.all(kk == qkey, axis=-1)))
        mask[idx_own] = ok_unique[inv]
        return mask
    # cell-level margin: translate one fixed ball sample to every candidate
    radius = float(margin) * delta ** (k + 2)
    ok = np.ones(len(idx_own), dtype=bool)
    bz, bt = koranyi_ball_sample(HeisPoint(np.zeros(cd.n, dtype=complex), 0.0),
                                 radius, m=ball_samples, seed=13)
    zi, ti = z[idx_own], t[idx_own]
    for j in range(ball_samples):
        sel = np.nonzero(ok)[0]
        if len(sel) == 0:
            break
        zz, tt = mul_batch(zi[sel], ti[sel], bz[j][None, :], bt[j])
        kk, _, _ = sysq.locate_keys(zz, tt, k)
        ok[sel[~np.all(kk == qkey, axis=-1)]] = False
    mask[idx_own[ok]] = True
    return mask


def localized_AQ(f_values: np.ndarray, Q: DyadicCube, rule: SphereRule,
                 margin="lemma", return_mask: bool = False):
    """A_Q f = A_{delta^{k+2}}(f 1_{V_Q}) sampled at every grid cell center.

    A_Q f is supported in Q, so only Q's cells are evaluated; all other
    cells are exactly 0.
    """
    cd = Q.systems
    mask = v_mask(Q, margin)
    masked = np.where(mask, f_values.reshape(-1), 0.0).reshape(cd.grid.shape)
    fld = SampledField(cd.grid, masked)
    z, t = cd.grid.centers()
    idx = np.nonzero(Q.mask())[0]
    vals = np.zeros(cd.grid.num_cells)
    vals[idx] = _chunked_mean(fld, cd.delta ** (Q.level + 2), z[idx], t[idx], rule)
    return (vals, mask) if return_mask else vals


def localized_AQ_full(f_values: np.ndarray, Q: DyadicCube, rule: SphereRule,
                      r_nodes: int = 3, margin="lemma", return_mask: bool = False):
    """The local-full variant: sup over a geometric t-grid in
    [delta^{k+3}, delta^{k+2}) of A_t(f 1_{V_Q}); r_nodes = 1 degenerates to
    the lacunary A_Q."""
    cd = Q.systems
    mask = v_mask(Q, margin)
    masked = np.where(mask, f_values.reshape(-1), 0.0).reshape(cd.grid.shape)
    fld = SampledField(cd.grid, masked)
    z, t = cd.grid.centers()
    k = Q.level
    if r_nodes == 1:
        radii = [cd.delta ** (k + 2)]
    else:
        radii = np.geomspace(cd.delta ** (k + 3), cd.delta ** (k + 2), r_nodes + 1)[1:]
    idx = np.nonzero(Q.mask())[0]
    vals = np.zeros(cd.grid.num_cells)
    for r in radii:
        vals[idx] = np.maximum(vals[idx], np.abs(_chunked_mean(fld, r, z[idx], t[idx], rule)))
    return (vals, mask) if return_mask else vals


@dataclass
class LinearizationSets:
    cubes: list
    E: list
    B: list

    def covering_ok(self) -> bool:
        """Union of B equals union of E, and the B are pairwise disjoint."""
        uB = np.zeros_like(self.B[0])
        for b in self.B:
            if np.any(uB & b):
                return False
            uB |= b
        uE = np.zeros_like(self.E[0])
        for e in self.E:
            uE |= e
        return bool(np.all(uB == uE))


def linearize(aq_values: list, cubes: list) -> LinearizationSets:
    """Linearization of sup_Q A_Q f over a finite cube collection.

    E_Q = {x in Q : A_Q f(x) >= (1/2) sup_P A_P f(x)} (ties kept: closed
    condition), B_Q = E_Q minus the E's of strictly containing cubes.
    """
    if len(aq_values) != len(cubes):
        raise ValueError("one value array per cube required")
    sup = np.maximum.reduce([np.abs(v) for v in aq_values])
    E = []
    for v, Q in zip(aq_values, cubes):
        E.append(Q.mask() & (sup > 0) & (np.abs(v) >= 0.5 * sup))
    # strict containment via ancestor chains (same system, coarser level)
    where = {(Q.alpha, Q.level, Q.index): i for i, Q in enumerate(cubes)}

    def ancestors(i):
        out = []
        P = cubes[i].parent()
        while P is not None:
            j = where.get((P.alpha, P.level, P.index))
            if j is not None:
                out.append(j)
            P = P.parent()
        return out

    B = []
    for i in range(len(cubes)):
        b = E[i].copy()
        for j in ancestors(i):
            b &= ~E[j]
        B.append(b)
    return LinearizationSets(list(cubes), E, B)


def _level_range(cd: CellDyadicSystems, Q0: DyadicCube):
    return range(Q0.level + 1, cd.k_max + 1)


def _descendants_at(cd, Q0, k):
    """Indices of level-k cubes below Q0 (same system)."""
    idx = [Q0.index]
    lev = Q0.level
    while lev < k:
        lev += 1
        tab = cd._tables[Q0.alpha][lev]
        idx = np.nonzero(np.isin(tab["parent"], idx))[0]
    return np.atleast_1d(np.asarray(idx, dtype=np.int64))


def cz_stopping(f_values: np.ndarray, Q0: DyadicCube, p: float,
                threshold_mult: float) -> list:
    """Maximal dyadic subcubes P of Q0 with <f>_{P,p} > threshold_mult <f>_{Q0,p}.

    Breadth-first from Q0's children; a cube above threshold is collected
    and not descended into, so maximality holds by construction.
    """
    if not threshold_mult > 1:
        raise ValueError("threshold multiplier must exceed 1")
    cd = Q0.systems
    base = cube_average(f_values, Q0, p)
    out = []
    frontier = Q0.children()
    while frontier:
        nxt = []
        for P in frontier:
            if cube_average(f_values, P, p) > threshold_mult * base:
                out.append(P)
            else:
                nxt.extend(P.children())
        frontier = nxt
    return sorted(out, key=lambda c: (c.level, c.key))


def stopping_children(Q0: DyadicCube, f_values: np.ndarray, g_values: np.ndarray,
                      p: float, q: float, start_mult: float = 2.0,
                      sparsity: float = 0.5):
    """Maximal subcubes violating either the f- or the g-average threshold.

    The multiplier starts at 2 and doubles until the stopping cubes cover
    less than (1 - sparsity) of Q0 (the 'suitable c_n > 1' of the
    construction); the multiplier actually used is returned.
    """
    cd = Q0.systems
    fb = cube_average(f_values, Q0, p)
    gb = cube_average(g_values, Q0, q)
    mult = start_mult
    while True:
        out = []
        frontier = Q0.children()
        while frontier:
            nxt = []
            for P in frontier:
                if (cube_average(f_values, P, p) > mult * fb
                        or cube_average(g_values, P, q) > mult * gb):
                    out.append(P)
                else:
                    nxt.extend(P.children())
            frontier = nxt
        covered = sum(c.cell_count for c in out)
        if covered < (1.0 - sparsity) * Q0.cell_count:
            return sorted(out, key=lambda c: (c.level, c.key)), mult
        mult *= 2.0


@dataclass
class SparseFamily:
    cubes: list
    majors: list  # boolean cell masks E_S
    eta: float = 0.5
    multipliers: list = field(default_factory=list)
    truncated: bool = False

    def check_sparsity(self) -> bool:
        """Exact set-level check: disjoint majors with |E_S| > eta |S|."""
        taken = np.zeros_like(self.majors[0])
        for S, E in zip(self.cubes, self.majors):
            if np.any(taken & E):
                return False
            taken |= E
            if not np.count_nonzero(E) > self.eta * S.cell_count:
                return False
        return True

    def form(self, f_values, g_values, p, q) -> float:
        return sparse_form(self, f_values, g_values, p, q)


def build_sparse_family(f_values: np.ndarray, g_values: np.ndarray, Q0: DyadicCube,
                        p: float, q: float, max_depth: int = 8) -> SparseFamily:
    """Recursive stopping-time construction of a 1/2-sparse family below Q0.

    Each node contributes E_S = S minus its stopping children; recursion
    enters every stopping child until max_depth or the leaf level.
    """
    cubes, majors, mults = [], [], []
    truncated = False

    def visit(S, depth):
        nonlocal truncated
        if depth >= max_depth:
            truncated = True
            return
        if S.level >= S.systems.k_max:
            cubes.append(S)
            majors.append(S.mask())
            return
        kids, mult = stopping_children(S, f_values, g_values, p, q)
        mask = S.mask().copy()
        for c in kids:
            mask &= ~c.mask()
        cubes.append(S)
        majors.append(mask)
        mults.append(mult)
        for c in kids:
            visit(c, depth + 1)

    visit(Q0, 0)
    return SparseFamily(cubes, majors, 0.5, mults, truncated)


def sparse_form(S: SparseFamily, f_values: np.ndarray, g_values: np.ndarray,
                p: float, q: float) -> float:
    """Lambda_{S,p,q}(f,g) = sum_S |S| <f>_{S,p} <g>_{S,q}."""
    total = 0.0
    for Q in S.cubes:
        total += Q.measure * cube_average(f_values, Q, p) * cube_average(g_values, Q, q)
    return total


def verify_domination(f, f_values, g_values, cd: CellDyadicSystems, Q0: DyadicCube,
                      p: float, q: float, rule: SphereRule, j_list,
                      max_depth: int = 8, corpus_id: str = "") -> dict:
    """Observed lacunary domination: <M_disc f, g> vs Lambda_{S,p,q}(f,g).

    M_disc(x) = max over j in j_list of |A_{delta^j} f(x)| at cell centers
    (closed-form f); the family comes from the stopping recursion below Q0.
    Both sides use the same grid measure.
    """
    z, t = cd.grid.centers()
    m = np.zeros(cd.grid.num_cells)
    for j in j_list:
        m = np.maximum(m, np.abs(_chunked_mean(f, cd.delta ** j, z, t, rule)))
    lhs = float(np.sum(m * g_values) * cd.grid.cell_volume)
    fam = build_sparse_family(f_values, g_values, Q0, p, q, max_depth)
    rhs = sparse_form(fam, f_values, g_values, p, q)
    return {
        "corpus_id": corpus_id,
        "n": cd.n,
        "p": p,
        "q": q,
        "lhs": lhs,
        "rhs": rhs,
        "ratio": lhs / rhs if rhs > 0 else np.inf,
        "family_size": len(fam.cubes),
        "max_depth": max_depth,
        "sparsity_ok": fam.check_sparsity(),
    }


def domination_rows_to_csv(path, rows):
    cols = ["n", "p", "q", "corpus_id", "lhs", "rhs", "ratio", "family_size", "max_depth"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow([r[c] for c in cols])


# ---------------------------------------------------------------------------
# Lorentz norms and the level-set lemma (probability measure on a cube)


def _dist_steps(values, weights):
    """Sorted distinct positive values v_j and mu(|f| >= v_j)."""
    v = np.abs(np.asarray(values, dtype=float))
    w = np.asarray(weights, dtype=float)
    order = np.argsort(v)
    v, w = v[order], w[order]
    tail = np.cumsum(w[::-1])[::-1]  # mu(|f| >= v_sorted[i]) for ties handled below
    uniq, first = np.unique(v, return_index=True)
    mu_ge = tail[first]
    pos = uniq > 0
    return uniq[pos], mu_ge[pos]


def lorentz_norm(values, r: float, weights=None) -> float:
    """||f||_{L^{r,1}} = int_0^inf d_f(s)^{1/r} ds with d_f(s) = mu(|f| > s).

    Exact for step functions (grid fields); for f = c constant on a
    probability space this returns c.
    """
    if not r > 1:
        raise ValueError("r must exceed 1")
    values = np.asarray(values, dtype=float).reshape(-1)
    if weights is None:
        weights = np.full(values.shape, 1.0 / values.size)
    v, mu_ge = _dist_steps(values, weights)
    if len(v) == 0:
        return 0.0
    # d_f(s) = mu(|f| > s) is mu_ge[j+1] on [v_j, v_{j+1}) and mu_ge[0] below v_0
    prev = 0.0
    total = 0.0
    for j in range(len(v)):
        total += (v[j] - prev) * mu_ge[j] ** (1.0 / r)
        prev = v[j]
    return float(total)


def lorentz_norm_rearranged(values, r: float, weights=None) -> float:
    """(1/r) int_0^inf t^{1/r-1} f*(t) dt: the rearrangement form, which
    equals the distribution-function form by the layer-cake identity."""
    if not r > 1:
        raise ValueError("r must exceed 1")
    values = np.asarray(values, dtype=float).reshape(-1)
    if weights is None:
        weights = np.full(values.shape, 1.0 / values.size)
    order = np.argsort(-np.abs(values))
    v = np.abs(values[order])
    w = np.asarray(weights, dtype=float)[order]
    edges = np.concatenate([[0.0], np.cumsum(w)])
    total = 0.0
    for j in range(len(v)):
        total += v[j] * (edges[j + 1] ** (1.0 / r) - edges[j] ** (1.0 / r))
    return float(total)


def lorentz_lp_embedding_constant(r: float, p: float) -> float:
    """C_{r,p} = (int_0^1 t^{-p'/r'} dt)^{1/p'} for p > r (probability space)."""
    if not (p > r > 1):
        raise ValueError("need p > r > 1")
    pp = p / (p - 1.0)
    rp = r / (r - 1.0)
    return (1.0 / (1.0 - pp / rp)) ** (1.0 / pp)


def check_level_set_lemma(values, r: float, weights=None):
    """(sum_m 2^m mu(E_m)^{1/r}, 2 ||f||_{L^{r,1}}) with
    E_m = {2^m <= |f| < 2^{m+1}}; lhs <= rhs holds with the exact constant 2.
    """
    values = np.abs(np.asarray(values, dtype=float).reshape(-1))
    if weights is None:
        weights = np.full(values.shape, 1.0 / values.size)
    pos = values > 0
    lhs = 0.0
    if np.any(pos):
        m_lo = int(np.floor(np.log2(values[pos].min())))
        m_hi = int(np.floor(np.log2(values[pos].max())))
        for m in range(m_lo, m_hi + 1):
            sel = (values >= 2.0 ** m) & (values < 2.0 ** (m + 1))
            mu = float(np.sum(np.asarray(weights)[sel]))
            lhs += 2.0 ** m * mu ** (1.0 / r)
    return lhs, 2.0 * lorentz_norm(values, r, weights)


def lemma_hn_report(f, systems, k: int, region, rule: SphereRule,
                    n_samples: int = 400, seed: int = 0,
                    ball_samples: int = 64) -> dict:
    """Literal localization-lemma check at theorem-scale delta.

    For sample points x and each system alpha, evaluates A_{delta^{k+2}} f(x)
    against sum_alpha A_{Q_alpha(x)} f(x), where A_Q f = A_{delta^{k+2}}
    (f 1_{V_Q}) and V_Q keeps the sphere nodes y whose level-(k+3) net point
    z_P (system 0) has B(z_P, delta^{k+1}) inside Q.  Also verifies that
    A_Q f vanishes at sample points outside Q (support containment).

    Pointwise masks need no cell grid, so this runs at delta <= 1/96 where
    the lemma's geometry genuinely holds.
    """
    delta = systems[0].delta
    n = systems[0].n
    rng = np.random.default_rng(seed)
    hw = region.half_widths
    xz = (rng.uniform(-0.6, 0.6, (n_samples, n)) + 1j * rng.uniform(-0.6, 0.6, (n_samples, n))) * hw[0]
    xt = rng.uniform(-0.6, 0.6, n_samples) * hw[-1]
    r_sphere = delta ** (k + 2)
    w = r_sphere * rule.nodes  # (M, n)
    # sphere points y(x, node) = (z - w, t - twist)
    yz = xz[:, None, :] - w[None, :, :]
    yt = xt[:, None] - twist(xz[:, None, :], w[None, :, :])
    fy = np.asarray(f.eval_batch(yz, yt))
    lhs = fy @ rule.weights  # plain A_{delta^{k+2}} f

    flat_z = yz.reshape(-1, n)
    flat_t = yt.reshape(-1)
    zp, tp, _ = systems[0].net_point(flat_z, flat_t, k + 3)
    # ball-containment of B(z_P, delta^{k+1}) in the level-k cube per system,
    # vectorized over one shared unit-ball sample
    bz, bt = koranyi_ball_sample(HeisPoint(np.zeros(n, dtype=complex), 0.0),
                                 delta ** (k + 1), m=ball_samples, seed=7)
    rhs = np.zeros(n_samples)
    support_violation = 0.0
    for sys in systems:
        kx, _, _ = sys.locate_keys(xz, xt, k)         # cube of x
        kp0, _, _ = sys.locate_keys(zp, tp, k)        # cube of z_P
        ok = np.all(kp0 == np.repeat(kx, len(w), axis=0), axis=-1)
        for j in range(ball_samples):
            alive = np.nonzero(ok)[0]
            if len(alive) == 0:
                break
            zz, tt = mul_batch(zp[alive], tp[alive], bz[j][None, :], bt[j])
            kk, _, _ = sys.locate_keys(zz, tt, k)
            ok[alive[~np.all(kk == np.repeat(kx, len(w), axis=0)[alive], axis=-1)]] = False
        contrib = (fy * ok.reshape(n_samples, len(w))) @ rule.weights
        rhs += contrib
        # support: the same masked average for a NEIGHBOR cube must vanish;
        # equivalent check: nodes passing the mask for cube(x) lie in cube(x)
        ky, _, _ = sys.locate_keys(flat_z, flat_t, k)
        outside = ~np.all(ky == np.repeat(kx, len(w), axis=0), axis=-1)
        if np.any(ok & outside):
            support_violation = max(support_violation,
                                    float(np.max(fy.reshape(-1)[ok & outside])))
    viol = lhs - rhs
    return {
        "delta": delta,
        "k": k,
        "samples": n_samples,
        "covering_violations": int(np.sum(viol > 1e-12 * np.maximum(lhs, 1e-300))),
        "max_covering_gap": float(np.max(viol)),
        "support_violation": support_violation,
        "lhs_max": float(np.max(lhs)),
    }


def carleson_check(S: SparseFamily, phi_values, s: float, t: float):
    """(sum_{Q in S} <phi>_{Q,s} |Q|, <phi>_{Q0,t} |Q0|) for 1 <= s < t;
    the ratio is the observed Carleson embedding constant."""
    if not (1 <= s < t):
        raise ValueError("need 1 <= s < t")
    lhs = sum(Q.measure * cube_average(phi_values, Q, s) for Q in S.cubes)
    Q0 = S.cubes[0]
    rhs = Q0.measure * cube_average(phi_values, Q0, t)
    return float(lhs), float(rhs)

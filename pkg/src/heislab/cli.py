"""Experiment runner: `heislab <suite> --config <path> [--out <dir>] [--seed <u64>]`.

Each suite emits CSV/JSON artifacts plus a summary.json with one pass/fail
line per assertion; the exit status is 0 iff every selected assertion
passed, 1 on assertion failure, 2 on invalid configuration.  Reruns with an
identical config produce byte-identical outputs (fixed seeds, ordered
reductions, no timestamps).
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

SUITES = (
    "laguerre-verify",
    "means-compare",
    "continuity",
    "grid-build",
    "sparse-verify",
    "full-verify",
    "weights-verify",
    "regions",
)


@dataclass
class RunConfig:
    n: int = 1
    delta: float = 0.5
    grid_delta: float = 0.01
    seed: int = 0
    k_max: int = 200
    n_lambda: int = 80
    num_systems: int = 3
    out: str = "heislab-out"

    @classmethod
    def load(cls, path, seed=None, out=None) -> "RunConfig":
        cfg = cls()
        if path is not None:
            cp = configparser.ConfigParser()
            read = cp.read(path)
            if not read:
                raise ValueError(f"cannot read config file {path}")
            sec = cp["run"] if cp.has_section("run") else cp["DEFAULT"]
            for key in ("n", "seed", "k_max", "n_lambda", "num_systems"):
                if key in sec:
                    setattr(cfg, key, sec.getint(key))
            for key in ("delta", "grid_delta"):
                if key in sec:
                    setattr(cfg, key, sec.getfloat(key))
        if seed is not None:
            cfg.seed = seed
        if out is not None:
            cfg.out = out
        if cfg.n not in (1, 2):
            raise ValueError("desk scale supports n in {1, 2}")
        if not (0 < cfg.delta < 1 and 0 < cfg.grid_delta < 1):
            raise ValueError("delta parameters must lie in (0,1)")
        return cfg


def _emit(outdir: Path, suite: str, cfg: RunConfig, assertions):
    outdir.mkdir(parents=True, exist_ok=True)
    ok = all(a["passed"] for a in assertions)
    cfg_dict = asdict(cfg)
    cfg_dict.pop("out")  # keep reruns byte-identical across output dirs
    summary = {
        "suite": suite,
        "config": cfg_dict,
        "assertions": assertions,
        "passed": ok,
    }
    with open(outdir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
    for a in assertions:
        print(("PASS" if a["passed"] else "FAIL"), a["name"], "--", a.get("detail", ""))
    return ok


def _assert(name, passed, detail=""):
    return {"name": name, "passed": bool(passed), "detail": str(detail)}


def suite_regions(cfg: RunConfig, outdir: Path):
    from fractions import Fraction

    from . import regions

    regions.vertices_to_csv(outdir / "triangle_vertices.csv", regions.TRIANGLE_NAMES, range(1, 11))
    with open(outdir / "triangle_boundaries.csv", "w") as fh:
        fh.write("name,n,p_inv,q_inv\n")
        for name in regions.TRIANGLE_NAMES:
            for n in (1, 2, 3):
                try:
                    tri = regions.triangle(name, n)
                except ValueError:
                    continue
                for a, b in tri.boundary_points(per_edge=12):
                    fh.write(f"{name},{n},{float(a)},{float(b)}\n")
    out = []
    t = regions.triangle("lacunary_lplq", 2)
    out.append(_assert("lacunary_lplq_vertex_n2", t.vertices[2] == (Fraction(7, 10), Fraction(3, 10)),
                       str(t.vertices[2])))
    t = regions.triangle("full_lplq", 2)
    out.append(_assert("full_lplq_vertices_n2",
                       t.vertices == ((0, 0), (Fraction(3, 4), Fraction(3, 4)),
                                      (Fraction(7, 13), Fraction(6, 13))), str(t.vertices)))
    euc_ok = all(
        regions.triangle("lacunary_sparse", n).contains(Fraction(n, n + 1), Fraction(n, n + 1), strict=True)
        for n in range(2, 7)
    )
    out.append(_assert("euclidean_vertex_inside_lacunary_sparse_n2..6", euc_ok))
    incl = all(
        regions.triangle("lacunary_lplq", n).contains_triangle(regions.triangle("full_lplq", n))
        for n in range(2, 11)
    )
    out.append(_assert("full_lplq_inside_lacunary_lplq_n2..10", incl))
    return out


def suite_laguerre(cfg: RunConfig, outdir: Path):
    from . import laguerre as lg

    out = []
    ks = [0, 1, 2, 7, 50, 400, 10000]
    worst = max(
        abs(float(lg.psi_all(k, d, np.asarray(0.0))[-1]) - 1.0)
        for k in ks for d in (-1 / 3, 0.0, 0.5, 1.0, float(cfg.n - 1))
    )
    out.append(_assert("psi_at_zero_equals_one", worst < 1e-12, f"worst |psi(0)-1| = {worst:.2e}"))
    x = np.linspace(0.0, 25.0, 11)
    closed = {
        0: np.ones_like(x),
        1: 2.0 - x,
        2: x * x / 2 - 3 * x + 3,
    }
    worst = max(np.max(np.abs(lg.laguerre_poly(k, 1.0, x) - c)) for k, c in closed.items())
    out.append(_assert("recurrence_vs_closed_forms_delta1", worst < 1e-10, f"worst = {worst:.2e}"))
    lams = np.geomspace(10.0, 1e4, 9)
    rows = []
    for d in (0.0, 1.0):
        sups = lg.uniform_bound_scan(d, lams)
        for lam, s in zip(lams, sups):
            rows.append((d, lam, int(max(64, 1.5 * lam)), s, s * lam ** (d + 1 / 3)))
        slope = np.polyfit(np.log(lams), np.log(sups), 1)[0]
        out.append(_assert(f"uniform_scan_slope_delta{d}", abs(slope + d + 1 / 3) < 0.15,
                           f"slope = {slope:.3f} target {-(d+1/3):.3f}"))
    lg.scan_rows_to_csv(outdir / "uniform_scan.csv", rows)
    return out


def suite_means_compare(cfg: RunConfig, outdir: Path):
    from . import corpus, means, spectral

    rule = means.circle_rule(256)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    records = []
    worst = 0.0
    for f in corpus.default_corpus(1)[:5]:
        for r in (0.5, 1.0, 2.0):
            th = rng.uniform(0, 2 * np.pi, 4)
            rad = r * rng.uniform(0.75, 1.05, 4)
            z = (rad * np.exp(1j * th))[:, None] + f.center.z
            t = f.center.t + rng.uniform(-0.4, 0.4, 4)
            quad = means.spherical_mean(f, r, (z, t), rule)
            res = spectral.spectral_spherical_mean(f, r, (z, t))
            rel = float(np.max(np.abs(res.value - quad) / np.abs(quad)))
            worst = max(worst, rel)
            rows.append((f.name, r, rel))
            records.append(res.to_json(oracle_value=quad))
    with open(outdir / "means_compare.csv", "w") as fh:
        fh.write("corpus_id,r,rel_err\n")
        for name, r, rel in rows:
            fh.write(f"{name},{r},{rel}\n")
    with open(outdir / "spectral_records.jsonl", "w") as fh:
        fh.write("\n".join(records) + "\n")
    return [_assert("cross_route_rel_err<=1e-3", worst <= 1e-3, f"worst = {worst:.2e}")]


def suite_continuity(cfg: RunConfig, outdir: Path):
    from . import corpus, means
    from .heis import HeisPoint, cube_region, dilate, koranyi_norm

    n = cfg.n
    f = corpus.default_corpus(n)[0]
    rule = means.sphere_rule(n)
    region = cube_region(n, 4.0, 4.0)
    sampler = means.NormSampler.quasi_mc(region, 4096, seed=cfg.seed)
    y0 = HeisPoint(np.full(n, (1 + 1j) / np.sqrt(4 * n), dtype=complex), 0.5 / np.sqrt(2))
    y0 = dilate(1.0 / koranyi_norm(y0), y0)
    sizes = 2.0 ** -np.arange(1, 7)
    ratios = [means.continuity_ratio(f, dilate(s, y0), 2, 2, 1.0, rule, sampler) for s in sizes]
    slope = float(np.polyfit(np.log(sizes), np.log(ratios), 1)[0])
    with open(outdir / "continuity.csv", "w") as fh:
        fh.write("y_norm,ratio\n")
        for s, rr in zip(sizes, ratios):
            fh.write(f"{s},{rr}\n")
    return [_assert("continuity_loglog_slope>=0.8", slope >= 0.8, f"slope = {slope:.3f} (n={n})")]


def suite_grid_build(cfg: RunConfig, outdir: Path):
    from . import dyadic
    from .heis import HeisPoint, cube_region, dist_batch

    delta = cfg.grid_delta
    region = cube_region(1, 3 * delta ** 2, 3 * delta ** 4)
    systems = dyadic.build_systems(region, delta, 0, 2, seed=cfg.seed, num_systems=6)
    rng = np.random.default_rng(cfg.seed)
    m = 20000
    z = rng.uniform(-1, 1, (m, 1)) * region.half_widths[0] + 1j * rng.uniform(-1, 1, (m, 1)) * region.half_widths[1]
    t = rng.uniform(-1, 1, m) * region.t_half_width
    sys0 = systems[0]
    keys, zc, tc = sys0.locate_keys(z, t, 2)
    out = []
    d = dist_batch(zc, tc, z, t)
    out.append(_assert("outer_sandwich<=4", float(np.max(d)) <= 4 * delta ** 2,
                       f"max d/center = {np.max(d)/delta**2:.3f}"))
    uk = np.unique(keys, axis=0)
    inner_ok, tested = 0, 0
    for key in uk:
        c = sys0.cube_center(key, 2)
        if not region.contains(c.z[None, :], np.array([c.t]), shrink=0.25)[0]:
            continue
        bz, bt = dyadic.koranyi_ball_sample(c, delta ** 2 / 12, m=64, seed=7)
        kk, _, _ = sys0.locate_keys(bz, bt, 2)
        tested += 1
        inner_ok += bool(np.all(np.all(kk == key, axis=-1)))
    out.append(_assert("inner_sandwich_1_12", inner_ok == tested, f"{inner_ok}/{tested} interior cubes"))
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
    out.append(_assert("property2_100_balls", fails == 0, f"{fails} failures"))
    with open(outdir / "grid_cubes.json", "w") as fh:
        json.dump([{"alpha": 0, "k": 2, "center": list(map(float, sys0.cube_center(k, 2).z.view(float)))
                    + [sys0.cube_center(k, 2).t]} for k in uk.tolist()], fh, sort_keys=True)
    return out


def _sparse_setup(cfg: RunConfig, shape=(40, 40, 96), k_max=3):
    from . import dyadic
    from .corpus import GaussianField
    from .heis import HeisPoint, cube_region
    from .means import CellGrid

    region = cube_region(1, 1.1, 0.35)
    grid = CellGrid(region, shape)
    cd = dyadic.CellDyadicSystems(grid, cfg.delta, 0, k_max, seed=cfg.seed, num_systems=cfg.num_systems)
    tab0 = cd._tables[0][0]
    Q0 = cd.cube(0, 0, int(np.argmax(tab0["count"])))
    z, t = grid.centers()
    f = GaussianField(1, 2.0, 3.0, HeisPoint(Q0.center.z, Q0.center.t), 1.0)
    fv = f.eval_batch(z, t) * Q0.mask()
    rng = np.random.default_rng(cfg.seed + 1)
    gv = (0.2 + rng.random(grid.num_cells)) * Q0.mask()
    return cd, Q0, f, fv, gv


def suite_sparse(cfg: RunConfig, outdir: Path):
    from . import sparse
    from .means import circle_rule

    cd, Q0, f, fv, gv = _sparse_setup(cfg)
    rule = circle_rule(64)
    out = []
    fam = sparse.build_sparse_family(fv, gv, Q0, 1.5, 1.5)
    out.append(_assert("half_sparsity_exact", fam.check_sparsity(), f"{len(fam.cubes)} cubes"))
    rows = []
    for (p, q) in ((1.5, 1.5), (1.25, 2.0), (2.0, 1.25)):
        rep = sparse.verify_domination(f, fv, gv, cd, Q0, p, q, rule,
                                       j_list=(2, 3), corpus_id="gauss-bump")
        rows.append(rep)
        out.append(_assert(f"domination_finite_p{p}_q{q}",
                           np.isfinite(rep["ratio"]) and rep["sparsity_ok"],
                           f"ratio = {rep['ratio']:.3f}"))
    sparse.domination_rows_to_csv(outdir / "domination.csv", rows)
    return out


def suite_full(cfg: RunConfig, outdir: Path):
    from . import sparse
    from .means import circle_rule

    cd, Q0, f, fv, gv = _sparse_setup(cfg)
    rule = circle_rule(64)
    out = []
    a_lac = sparse.localized_AQ(fv, Q0, rule, margin=1.1)
    a_full = sparse.localized_AQ_full(fv, Q0, rule, r_nodes=3, margin=1.1)
    a_deg = sparse.localized_AQ_full(fv, Q0, rule, r_nodes=1, margin=1.1)
    out.append(_assert("full_r_nodes1_degenerates_to_lacunary",
                       float(np.max(np.abs(a_deg - np.abs(a_lac)))) < 1e-12))
    out.append(_assert("full_dominates_lacunary_member",
                       bool(np.all(a_full >= np.abs(a_lac) - 1e-12))))
    lin = sparse.linearize([a_full], [Q0])
    out.append(_assert("full_linearize_covering", lin.covering_ok()))
    return out


def suite_weights(cfg: RunConfig, outdir: Path):
    from . import sparse, weights

    cd, Q0, f, fv, gv = _sparse_setup(cfg, shape=(32, 32, 80), k_max=2)
    z, t = cd.grid.centers()
    rng = np.random.default_rng(cfg.seed + 2)
    checker = np.where((np.floor(z[:, 0].real / 0.25) + np.floor(z[:, 0].imag / 0.25)
                        + np.floor(t / 0.1)) % 2 == 0, 2.0, 0.5)
    rows = []
    out = []
    fam = sparse.build_sparse_family(fv, gv, Q0, 1.5, 1.5)
    for wid, w in (("const", np.ones(cd.grid.num_cells)), ("checker", checker)):
        apc = weights.ap_characteristic(w, 2.0, cd)
        rhc = weights.rh_characteristic(w, 2.0, cd)
        rep = weights.bfp_check(fam, fv, gv, w, 2.0, 1.5, 1.5, cd)
        rep["weight_id"] = wid
        rows.append(rep)
        out.append(_assert(f"bfp_slack>=1_{wid}", rep["slack"] >= 1.0, f"slack = {rep['slack']:.3f}"))
        if wid == "const":
            out.append(_assert("constant_weight_chars_equal_1",
                               abs(apc - 1) < 1e-12 and abs(rhc - 1) < 1e-12,
                               f"A_p = {apc}, RH_p = {rhc}"))
    weights.weight_rows_to_csv(outdir / "weighted.csv", rows)
    return out


_SUITE_FN = {
    "regions": suite_regions,
    "laguerre-verify": suite_laguerre,
    "means-compare": suite_means_compare,
    "continuity": suite_continuity,
    "grid-build": suite_grid_build,
    "sparse-verify": suite_sparse,
    "full-verify": suite_full,
    "weights-verify": suite_weights,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="heislab", description=__doc__)
    parser.add_argument("suite", choices=SUITES)
    parser.add_argument("--config", default=None)
    parser.add_argument("--out", default=None)
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(args.config, seed=args.seed, out=args.out)
    except (ValueError, KeyError, configparser.Error) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    outdir = Path(cfg.out if args.out is None else args.out) / args.suite
    outdir.mkdir(parents=True, exist_ok=True)
    assertions = _SUITE_FN[args.suite](cfg, outdir)
    ok = _emit(outdir, args.suite, cfg, assertions)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

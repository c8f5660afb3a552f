"""Desk-scale calibration pilot: collision operator choice and run length.

Runs a batch of random footprints through the 2D channel with both collision
operators and several end times, plus a few 3D extrusions, and reports
stability, feature ranges, and rank agreement.  Results inform the desk
configuration defaults (collision kind, t_max, feature normalization bounds).

Usage: python3 scripts/pilot_operators.py out.json [n_shapes]
"""

import json
import sys
import time

import numpy as np

from windmap.errors import SelfIntersecting, SimulationDiverged
from windmap.geometry import Genome, decode_genome, extrude, rasterize
from windmap.lbm import SimConfig, run_simulation


def sample_genomes(n, base_radius, rng):
    out = []
    while len(out) < n:
        params = rng.random(32)
        g = Genome.from_params(params, base_radius)
        try:
            decode_genome(g, 8)
        except SelfIntersecting:
            continue
        out.append(params)
    return out


def spearman(a, b):
    def ranks(v):
        order = np.argsort(v)
        r = np.empty(len(v))
        r[order] = np.arange(len(v))
        return r

    ra, rb = ranks(np.asarray(a)), ranks(np.asarray(b))
    ra -= ra.mean()
    rb -= rb.mean()
    return float((ra * rb).sum() / np.sqrt((ra**2).sum() * (rb**2).sum()))


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else "pilot_operators.json"
    n_shapes = int(sys.argv[2]) if len(sys.argv) > 2 else 20
    base_radius = 10.0
    offset = (60.0, 50.0)
    rng = np.random.Generator(np.random.PCG64(1234))
    genomes = sample_genomes(n_shapes, base_radius, rng)

    variants = {
        "kbc_t8": dict(collision="kbc", t_max=8.0, t_warm=3.0),
        "kbc_t20": dict(collision="kbc", t_max=20.0, t_warm=8.0),
        "bgk_t8": dict(collision="bgk", t_max=8.0, t_warm=3.0),
    }
    results = {name: [] for name in variants}
    report = {"n_shapes": n_shapes, "variants": {}, "three_d": {}}

    for name, kw in variants.items():
        cfg = SimConfig(nx=200, ny=100, reynolds=300.0, mach=0.075, char_length=2 * base_radius, **kw)
        t0 = time.time()
        diverged = 0
        for params in genomes:
            g = Genome.from_params(np.asarray(params), base_radius)
            mask = rasterize(decode_genome(g, 8), cfg.nx, cfg.ny, offset)
            try:
                feats = run_simulation(cfg, mask)
                results[name].append([feats.u_max, feats.enstrophy_mean, feats.area])
            except SimulationDiverged:
                diverged += 1
                results[name].append([np.nan, np.nan, np.nan])
        arr = np.asarray(results[name])
        ok = ~np.isnan(arr[:, 0])
        report["variants"][name] = {
            "seconds_per_sim": (time.time() - t0) / n_shapes,
            "diverged": diverged,
            "u_max_range": [float(np.nanmin(arr[:, 0])), float(np.nanmax(arr[:, 0]))],
            "enstrophy_range": [float(np.nanmin(arr[:, 1])), float(np.nanmax(arr[:, 1]))],
            "n_ok": int(ok.sum()),
        }
        with open(out_path, "w") as fh:
            json.dump(report, fh, indent=2)
        print(name, report["variants"][name], flush=True)

    a, b, c = (np.asarray(results[k]) for k in ("kbc_t8", "kbc_t20", "bgk_t8"))
    ok = ~np.isnan(a[:, 0]) & ~np.isnan(b[:, 0]) & ~np.isnan(c[:, 0])
    report["rank_agreement"] = {
        "umax_kbc8_vs_kbc20": spearman(a[ok, 0], b[ok, 0]),
        "enst_kbc8_vs_kbc20": spearman(a[ok, 1], b[ok, 1]),
        "umax_bgk8_vs_kbc8": spearman(c[ok, 0], a[ok, 0]),
        "enst_bgk8_vs_kbc8": spearman(c[ok, 1], a[ok, 1]),
        "umax_bgk8_vs_kbc20": spearman(c[ok, 0], b[ok, 0]),
        "enst_bgk8_vs_kbc20": spearman(c[ok, 1], b[ok, 1]),
    }
    with open(out_path, "w") as fh:
        json.dump(report, fh, indent=2)
    print(report["rank_agreement"], flush=True)

    # a few 3D extrusions: stability and operator agreement at N_z = 16
    three_d = {"kbc": [], "bgk": []}
    for kind in ("kbc", "bgk"):
        cfg3 = SimConfig(
            nx=200, ny=100, nz=16, reynolds=300.0, mach=0.075,
            char_length=2 * base_radius, collision=kind, t_max=8.0, t_warm=3.0,
        )
        for params in genomes[:4]:
            g = Genome.from_params(np.asarray(params), base_radius)
            mask = extrude(rasterize(decode_genome(g, 8), cfg3.nx, cfg3.ny, offset), 16)
            t0 = time.time()
            try:
                feats = run_simulation(cfg3, mask)
                three_d[kind].append([feats.u_max, feats.enstrophy_mean, time.time() - t0])
            except SimulationDiverged:
                three_d[kind].append([np.nan, np.nan, time.time() - t0])
            report["three_d"] = three_d
            with open(out_path, "w") as fh:
                json.dump(report, fh, indent=2)
            print(kind, three_d[kind][-1], flush=True)

    k3 = np.asarray(three_d["kbc"])
    b3 = np.asarray(three_d["bgk"])
    ok3 = ~np.isnan(k3[:, 0]) & ~np.isnan(b3[:, 0])
    if ok3.sum() >= 3:
        report["rank_agreement_3d"] = {
            "umax": spearman(b3[ok3, 0], k3[ok3, 0]),
            "enst": spearman(b3[ok3, 1], k3[ok3, 1]),
        }
    with open(out_path, "w") as fh:
        json.dump(report, fh, indent=2)
    print("done", flush=True)


if __name__ == "__main__":
    main()

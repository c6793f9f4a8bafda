"""Command-line surface: one subcommand per reproducible experiment.

Every run takes an optional TOML config (schema-validated, unknown keys
rejected), writes RFC-4180 CSV data at 12 significant digits plus a JSON
summary, and drops a manifest with the config hash, toolkit version,
per-stage wall-clock and output list.  Identical configs (seeds included)
reproduce byte-identical CSV outputs.

Exit codes: 0 success, 2 config/schema violation, 3 numerical failure
(partial artifacts plus a diagnostic are still written).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import chemistry as chem
from . import holography as holo
from . import mediators as med
from . import mitigation as mit
from .eigensolver import EigensolverError, lowest_eigenpairs
from .lattice import (
    LatticeGeometry,
    NucleusSpec,
    PotentialField,
    assemble_single_particle,
    build_kinetic,
    build_nuclear_potential,
    hydrogen_like,
    units_from_hopping,
)

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


class Stages:
    """Wall-clock bookkeeping for the manifest."""

    def __init__(self):
        self.times: dict[str, float] = {}

    def run(self, name, fn):
        t0 = time.perf_counter()
        out = fn()
        self.times[name] = round(time.perf_counter() - t0, 3)
        return out


def _config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _validate(cfg: dict, schema: dict, experiment: str) -> dict:
    unknown = set(cfg) - set(schema)
    if unknown:
        raise ConfigError(
            f"{experiment}: unknown config keys {sorted(unknown)}; "
            f"allowed: {sorted(schema)}"
        )
    out = {}
    for key, (typ, default) in schema.items():
        val = cfg.get(key, default)
        if typ is float and isinstance(val, int):
            val = float(val)
        if typ is list:
            if not isinstance(val, (list, tuple)):
                raise ConfigError(f"{experiment}: key '{key}' must be a list")
            val = list(val)
        elif not isinstance(val, typ):
            raise ConfigError(
                f"{experiment}: key '{key}' must be {typ.__name__}, "
                f"got {type(val).__name__}"
            )
        out[key] = val
    return out


def _emit(outdir: Path, experiment: str, cfg: dict, stages: Stages,
          summary: dict, files: list[str], status: str = "ok") -> None:
    summary_path = outdir / "summary.json"
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=float)
    manifest = {
        "experiment": experiment,
        "status": status,
        "version": __version__,
        "config": cfg,
        "config_hash": _config_hash(cfg),
        "wall_clock_s": stages.times,
        "outputs": sorted(files + ["summary.json"]),
    }
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def _centered_nucleus(geom: LatticeGeometry, charge: float) -> list[NucleusSpec]:
    return [NucleusSpec(geom.center(), charge)]


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

EXPERIMENTS: dict[str, dict] = {}


def experiment(name, columns, schema, paper_overrides=None):
    def deco(fn):
        EXPERIMENTS[name] = {
            "fn": fn,
            "columns": columns,
            "schema": schema,
            "paper": paper_overrides or {},
        }
        return fn
    return deco


@experiment(
    "hydrogen-spectrum",
    columns=["bohr_ratio", "level_index", "energy_ry"],
    schema={
        "n_side": (int, 40),
        "ratios": (list, [2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0]),
        "levels": (int, 14),
        "tol": (float, 1e-8),
    },
    paper_overrides={"n_side": 100},
)
def _run_hydrogen_spectrum(cfg, outdir, seed, stages):
    geom = LatticeGeometry(cfg["n_side"])
    nuclei = _centered_nucleus(geom, 1.0)
    rows = []
    per_ratio = {}
    for ratio in cfg["ratios"]:
        op, units = hydrogen_like(geom, nuclei, ratio)
        ep = stages.run(f"solve:{ratio}", lambda: lowest_eigenpairs(
            op, k=cfg["levels"], tol=cfg["tol"], seed=seed))
        evry = units.to_ry(ep.values)
        per_ratio[ratio] = evry
        for i, e in enumerate(evry):
            rows.append([ratio, i, e])
    write_csv(outdir / "spectrum.csv", EXPERIMENTS["hydrogen-spectrum"]["columns"], rows)
    shells = {1: [0], 2: [1, 2, 3, 4], 3: list(range(5, 14))}
    best = {}
    for n, idx in shells.items():
        if max(idx) >= cfg["levels"]:
            continue
        target = -1.0 / n**2
        errs = {r: abs(min(e[i] for i in idx) - target) / abs(target)
                for r, e in per_ratio.items()}
        r_best = min(errs, key=errs.get)
        best[f"n{n}"] = {
            "ratio": r_best,
            "energy_ry": float(min(per_ratio[r_best][i] for i in idx)),
            "relative_error": float(errs[r_best]),
        }
    return {"best_levels": best}, ["spectrum.csv"]


@experiment(
    "extrapolate",
    columns=["e_guess", "sigma_b"],
    schema={
        "n_side": (int, 80),
        "ratios": (list, [3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]),
        "tol": (float, 1e-9),
        "fixture": (str, ""),
    },
    paper_overrides={"n_side": 250},
)
def _run_extrapolate(cfg, outdir, seed, stages):
    if cfg["fixture"]:
        if cfg["fixture"] == "builtin":
            from importlib.resources import files
            raw = (files("latticechem") / "data" / "synthetic_curve.csv").read_text()
        else:
            raw = Path(cfg["fixture"]).read_text()
        pts = [tuple(map(float, ln.split(","))) for ln in raw.strip().splitlines()[1:]]
        curve = mit.EnergyCurve(np.array([p[0] for p in pts]),
                                np.array([p[1] for p in pts]))
    else:
        geom = LatticeGeometry(cfg["n_side"])
        nuclei = _centered_nucleus(geom, 1.0)

        def family(r):
            return hydrogen_like(geom, nuclei, r)

        curve = stages.run("scan", lambda: mit.scan_bohr_radius(
            family, cfg["ratios"], tol=cfg["tol"], seed=seed))
    res = stages.run("fit", lambda: mit.extrapolate(curve))
    write_csv(outdir / "sigma_scan.csv", EXPERIMENTS["extrapolate"]["columns"],
              [[e, s] for e, s in res.sigma_curve])
    write_csv(outdir / "curve.csv", ["bohr_ratio", "energy_ry"],
              np.column_stack([curve.ratios, curve.energies_ry]))
    return {
        "e_infinity": res.e_infinity,
        "exponent_b": res.exponent_b,
        "fit_window": [int(i) for i in res.fit_window],
    }, ["sigma_scan.csv", "curve.csv"]


@experiment(
    "hologram",
    columns=["refine", "seed", "final_epsilon", "iterations", "converged"],
    schema={
        "n_side": (int, 12),
        "refines": (list, [1, 2, 4]),
        "seeds": (int, 30),
        "v0": (float, 1.0),
        "stop_tol": (float, 1e-4),
        "max_iters": (int, 4000),
        "export_phase": (bool, False),
    },
    paper_overrides={"n_side": 16},
)
def _run_hologram(cfg, outdir, seed, stages):
    geom = LatticeGeometry(cfg["n_side"])
    nuclei = _centered_nucleus(geom, 1.0)
    rows = []
    medians = {}
    files = ["epsilons.csv"]
    for rf in cfg["refines"]:
        plan = holo.coulomb_target(geom, nuclei, cfg["v0"], int(rf))
        finals = []

        def sweep(plan=plan, rf=rf):
            out = []
            for s in range(cfg["seeds"]):
                res = holo.gs_iterate(plan, seed=seed + s,
                                      stop_tol=cfg["stop_tol"],
                                      max_iters=cfg["max_iters"])
                out.append(res)
            return out

        results = stages.run(f"gs:rf{rf}", sweep)
        for s, res in enumerate(results):
            finals.append(res.final_epsilon)
            rows.append([int(rf), seed + s, res.final_epsilon,
                         len(res.epsilon_trace) - 1, res.converged])
        medians[str(int(rf))] = float(np.median(finals))
        if cfg["export_phase"]:
            name = f"phase_rf{int(rf)}.txt"
            np.savetxt(outdir / name, results[0].phases, fmt="%.9g")
            files.append(name)
            name = f"trace_rf{int(rf)}.csv"
            write_csv(outdir / name, ["iteration", "epsilon"],
                      list(enumerate(results[0].epsilon_trace)))
            files.append(name)
    write_csv(outdir / "epsilons.csv", EXPERIMENTS["hologram"]["columns"], rows)
    return {"median_epsilon": medians}, files


@experiment(
    "noise-robustness",
    columns=["eps", "seed", "energy_ry"],
    schema={
        "n_side": (int, 60),
        "t_f_over_v0": (float, 1.0),
        "eps_list": (list, [0.02, 0.05, 0.08, 0.11, 0.14, 0.17, 0.2]),
        "seeds": (int, 30),
        "tol": (float, 1e-9),
    },
)
def _run_noise(cfg, outdir, seed, stages):
    geom = LatticeGeometry(cfg["n_side"])
    nuclei = _centered_nucleus(geom, 1.0)
    t_f = 1.0
    units = units_from_hopping(t_f, t_f / cfg["t_f_over_v0"])
    kin = build_kinetic(geom, t_f)
    pot = build_nuclear_potential(geom, nuclei, units.v0)
    h0 = assemble_single_particle(kin, pot)
    ep0 = stages.run("baseline", lambda: lowest_eigenpairs(h0, k=1, tol=cfg["tol"],
                                                           seed=seed))
    e0 = float(units.to_ry(ep0.values[0]))
    warm = ep0.vectors[:, 0]
    rows = []
    mean_abs, abs_mean = [], []
    for i, eps in enumerate(cfg["eps_list"]):
        def sweep(eps=eps, i=i):
            es = []
            for s in range(cfg["seeds"]):
                pert = holo.perturb_potential(pot, eps, seed=seed + 1000 * i + s)
                hp = assemble_single_particle(kin, pert)
                ep = lowest_eigenpairs(hp, k=1, tol=cfg["tol"], v0=warm)
                es.append(float(units.to_ry(ep.values[0])))
            return es

        es = stages.run(f"eps:{eps}", sweep)
        for s, e in enumerate(es):
            rows.append([eps, seed + 1000 * i + s, e])
        es = np.asarray(es)
        mean_abs.append(float(np.mean(np.abs(es - e0)) / abs(e0)))
        abs_mean.append(float(abs(np.mean(es) - e0) / abs(e0)))
    write_csv(outdir / "energies.csv", EXPERIMENTS["noise-robustness"]["columns"], rows)
    x = np.asarray(cfg["eps_list"], dtype=float)

    def slope(y):
        a = np.vstack([x, np.ones_like(x)]).T
        return float(np.linalg.lstsq(a, np.asarray(y), rcond=None)[0][0])

    write_csv(outdir / "errors.csv",
              ["eps", "mean_abs_rel_error", "abs_mean_rel_error"],
              np.column_stack([x, mean_abs, abs_mean]))
    return {
        "baseline_energy_ry": e0,
        "slope_mean_abs": slope(mean_abs),
        "slope_abs_mean": slope(abs_mean),
    }, ["energies.csv", "errors.csv"]


@experiment(
    "scheme1-bound",
    columns=["r", "wavefunction", "yukawa_reference"],
    schema={
        "u_over_tb": (float, 4.0),
        "n_side_m": (int, 120),
    },
    paper_overrides={"n_side_m": 200},
)
def _run_scheme1_bound(cfg, outdir, seed, stages):
    p = med.MediatorParams(scheme="I", u=cfg["u_over_tb"], t_b=1.0,
                           n_side_m=cfg["n_side_m"])
    sol = stages.run("solve", lambda: med.scheme1_single_bound_state(p))
    rows = []
    for r, v in sorted(sol.wavefunction_samples.items()):
        ref = np.exp(-r / sol.analytic_length) / r if r > 0 else float("nan")
        rows.append([r, v, ref])
    write_csv(outdir / "wavefunction.csv",
              EXPERIMENTS["scheme1-bound"]["columns"], rows)
    return {
        "bound_energy": sol.energy,
        "fitted_length": sol.fitted_length,
        "analytic_length": sol.analytic_length,
        "franck_condon": sol.franck_condon,
    }, ["wavefunction.csv"]


@experiment(
    "scheme1-pair",
    columns=["d", "v_numeric", "v_short_branch", "v_yukawa_branch"],
    schema={
        "u_over_tb": (float, 4.0),
        "n_side_m": (int, 120),
        "d_list": (list, list(range(2, 30))),
    },
)
def _run_scheme1_pair(cfg, outdir, seed, stages):
    p = med.MediatorParams(scheme="I", u=cfg["u_over_tb"], t_b=1.0,
                           n_side_m=cfg["n_side_m"])
    pot = stages.run("solve", lambda: med.scheme1_pair_potential(
        p, [int(d) for d in cfg["d_list"]]))
    rows = [[d, pot.samples[d], pot.analytic_short[d], pot.analytic_long[d]]
            for d in sorted(pot.samples)]
    write_csv(outdir / "pair_potential.csv",
              EXPERIMENTS["scheme1-pair"]["columns"], rows)
    return {"length": pot.length, "strength": pot.strength}, ["pair_potential.csv"]


@experiment(
    "triangle-eta",
    columns=["x", "eta", "w", "energy"],
    schema={
        "scheme": (int, 3),
        "base": (int, 6),
        "heights": (list, [4, 5, 6, 8, 10, 14, 20, 30]),
        "length": (float, 10.0),
        "n_side_m": (int, 0),  # 0 -> per-scheme default
        "u": (float, 2.0),
        "delta": (float, 4.5),
        "g": (float, 5e-3),
        "height": (int, 24),
        "jc_list": (list, [1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 0.1,
                           0.3, 0.6, 1.0, 1.5, 1.9, 2.1, 3.0]),
    },
    paper_overrides={"delta": 10.0, "n_side_m": 160},
)
def _run_triangle(cfg, outdir, seed, stages):
    rows = []
    if cfg["scheme"] == 1:
        nm = cfg["n_side_m"] or 120
        u = 4.0 * np.pi / (med._LENGTH_CONST - 1.0 / cfg["length"])
        p = med.MediatorParams(scheme="I", u=u, t_b=1.0, n_side_m=nm)
        s = int(cfg["base"])
        for d in cfg["heights"]:
            cfgm = med.FermionConfig((
                (0, int(d), 0), (-s // 2, 0, 0), (s - s // 2, 0, 0)))
            sol, pop = stages.run(f"d:{d}", lambda c=cfgm: med.impurity_bound_state(p, c))
            rows.append([int(d), pop.eta, pop.w, sol.energy])
        xlabel = "height_d"
    elif cfg["scheme"] == 3:
        nm = cfg["n_side_m"] or 60
        s = int(cfg["base"])
        d = int(cfg["height"])
        cfgm = med.FermionConfig(((0, d, 0), (-s // 2, 0, 0), (s - s // 2, 0, 0)))
        for jc in cfg["jc_list"]:
            p = med.MediatorParams(scheme="III", u=cfg["u"], j_a=1.0, g=cfg["g"],
                                   delta=cfg["delta"], j_c=float(jc),
                                   n_side_m=nm, n_e=3)
            sol, pop = stages.run(f"jc:{jc}", lambda pp=p: med.impurity_bound_state(pp, cfgm))
            rows.append([float(jc), pop.eta, pop.w, sol.energy])
        xlabel = "j_c"
    else:
        raise ConfigError("triangle-eta: scheme must be 1 or 3")
    write_csv(outdir / "eta.csv",
              [xlabel] + EXPERIMENTS["triangle-eta"]["columns"][1:], rows)
    return {"scheme": cfg["scheme"], "rows": len(rows)}, ["eta.csv"]


@experiment(
    "scheme2-length",
    columns=["u_over_ta", "g", "l_fitted", "l_energy", "l_leading_order"],
    schema={
        "u_list": (list, [2.0, 4.0]),
        "target_length": (float, 5.0),
        "g_list": (list, [0.01, 0.02, 0.04, 0.08, 0.12, 0.16, 0.24, 0.32]),
        "n_side_m": (int, 60),
    },
    paper_overrides={"n_side_m": 100},
)
def _run_scheme2(cfg, outdir, seed, stages):
    rows = []
    l0 = cfg["target_length"]
    for u in cfg["u_list"]:
        delta = 6.0 + l0**-2 - u
        for g in cfg["g_list"]:
            p = med.MediatorParams(scheme="II", u=float(u), t_a=1.0, g=float(g),
                                   delta=delta, n_side_m=cfg["n_side_m"])
            sol = stages.run(f"u{u}:g{g}", lambda pp=p: med.scheme2_bound_length(pp))
            rows.append([float(u), float(g), sol.fitted_length,
                         sol.energy_length, sol.analytic_length])
    write_csv(outdir / "lengths.csv", EXPERIMENTS["scheme2-length"]["columns"], rows)
    g_threshold = 0.4 / l0  # second-order a-population correction at 1%
    return {"g_threshold_1pct": g_threshold, "target_length": l0}, ["lengths.csv"]


@experiment(
    "minimal-1d",
    columns=["t_f", "pop_antisymmetric", "pop_offsite", "pop_symmetric"],
    schema={
        "n_sites": (int, 50),
        "u": (float, 4000.0),
        "j_c": (float, 800.0),
        "v0": (float, 0.25),
        "nuclei_sep": (int, 8),
        "t_f_list": (list, [0.01, 0.02, 0.04, 0.08, 0.16]),
    },
)
def _run_minimal_1d(cfg, outdir, seed, stages):
    p = med.MediatorParams(scheme="III", u=cfg["u"], j_a=1.0, g=1e-12,
                           delta=0.0, j_c=cfg["j_c"], n_side_m=2)
    tab = stages.run("diag", lambda: med.minimal_1d_model(
        p, v0=cfg["v0"], n_sites=cfg["n_sites"], nuclei_sep=cfg["nuclei_sep"],
        t_f_list=[float(t) for t in cfg["t_f_list"]]))
    rows = np.column_stack([tab.t_f, tab.pop_antisymmetric, tab.pop_offsite,
                            tab.pop_symmetric])
    write_csv(outdir / "populations.csv", EXPERIMENTS["minimal-1d"]["columns"], rows)
    mask = tab.pop_antisymmetric > 0
    slope = float(np.polyfit(np.log(tab.t_f[mask]),
                             np.log(tab.pop_antisymmetric[mask]), 1)[0])
    return {
        "antisym_loglog_slope": slope,
        "eps_cav_prediction": tab.eps_cav_prediction,
        "offsite_over_eps_cav": [float(x) for x in
                                 tab.pop_offsite / tab.eps_cav_prediction],
    }, ["populations.csv"]


@experiment(
    "validity-check",
    columns=["condition", "lhs", "threshold", "satisfied"],
    schema={
        "scheme": (str, "III"),
        "u": (float, 2.0),
        "t_b": (float, 1.0),
        "t_a": (float, 1.0),
        "j_a": (float, 1.0),
        "g": (float, 5e-3),
        "delta": (float, 4.5),
        "j_c": (float, 1.0),
        "n_side_m": (int, 60),
        "positions": (list, [[0, 24, 0], [-3, 0, 0], [3, 0, 0]]),
        "t_f": (float, 1e-4),
        "n_side_f": (int, 10),
    },
)
def _run_validity(cfg, outdir, seed, stages):
    kw = dict(scheme=cfg["scheme"], u=cfg["u"], n_side_m=cfg["n_side_m"])
    if cfg["scheme"] == "I":
        kw["t_b"] = cfg["t_b"]
    elif cfg["scheme"] == "II":
        kw.update(t_a=cfg["t_a"], g=cfg["g"], delta=cfg["delta"])
    else:
        kw.update(j_a=cfg["j_a"], g=cfg["g"], delta=cfg["delta"],
                  j_c=cfg["j_c"], n_e=len(cfg["positions"]))
    p = med.MediatorParams(**kw)
    fcfg = med.FermionConfig(tuple(tuple(int(c) for c in pos)
                                   for pos in cfg["positions"]))
    rep = stages.run("evaluate", lambda: med.validity_report(
        p, fcfg, t_f=cfg["t_f"], n_side_f=cfg["n_side_f"]))
    rows = [[e.condition, e.lhs, e.threshold, e.satisfied] for e in rep.entries]
    write_csv(outdir / "validity.csv", EXPERIMENTS["validity-check"]["columns"], rows)
    return {
        "g_config": rep.g_config,
        "all_satisfied": rep.all_satisfied(),
    }, ["validity.csv"]


@experiment(
    "helium",
    columns=["bohr_ratio", "e_para_ry", "e_ortho_ry"],
    schema={
        "n_side": (int, 60),
        "ratios": (list, [2.5, 3.0, 3.5, 4.0, 4.5, 5.0]),
        "n_single": (int, 8),
        "n_mean_field": (int, 8),
        "same_site_scale": (float, 1.0),
        "tol": (float, 1e-8),
    },
    paper_overrides={"n_side": 100, "n_single": 15, "n_mean_field": 15},
)
def _run_helium(cfg, outdir, seed, stages):
    geom = LatticeGeometry(cfg["n_side"])
    nuclei = _centered_nucleus(geom, 2.0)
    rows = []
    for ratio in cfg["ratios"]:
        res = stages.run(f"ratio:{ratio}", lambda r=ratio: chem.two_electron_ground(
            geom, nuclei, r, n_single=cfg["n_single"],
            n_mean_field=cfg["n_mean_field"],
            same_site_scale=cfg["same_site_scale"], tol=cfg["tol"]))
        rows.append([ratio, res.e_para_ry, res.e_ortho_ry])
    write_csv(outdir / "energies.csv", EXPERIMENTS["helium"]["columns"], rows)
    ratios = np.array([r[0] for r in rows])
    summary = {}
    for name, col, ref in (("para", 1, -5.8074), ("ortho", 2, -4.3504)):
        curve = mit.EnergyCurve(ratios, np.array([r[col] for r in rows]))
        try:
            res = mit.extrapolate(curve)
            e_inf = res.e_infinity
            summary[name] = {
                "e_infinity_ry": e_inf,
                "exponent_b": res.exponent_b,
                "reference_ry": ref,
                "relative_error": abs(e_inf - ref) / abs(ref),
            }
        except mit.ExtrapolationError as exc:
            summary[name] = {"error": str(exc)}
    return summary, ["energies.csv"]


@experiment(
    "hehplus-curve",
    columns=["d_over_a0", "energy_ry"],
    schema={
        "n_side": (int, 60),
        "seps_a0": (list, [1.2, 1.45, 1.7, 2.0]),
        "site_seps": (list, [4, 6, 8, 10]),
        "n_single": (int, 8),
        "n_mean_field": (int, 8),
        "same_site_scale": (float, 1.0),
        "tol": (float, 1e-8),
    },
    paper_overrides={"n_side": 100, "n_single": 15, "n_mean_field": 15},
)
def _run_hehplus(cfg, outdir, seed, stages):
    geom = LatticeGeometry(cfg["n_side"])
    curve = stages.run("curve", lambda: chem.molecular_curve(
        1.0, 2.0, [float(x) for x in cfg["seps_a0"]], geom,
        site_seps=[int(x) for x in cfg["site_seps"]],
        n_single=cfg["n_single"], n_mean_field=cfg["n_mean_field"],
        same_site_scale=cfg["same_site_scale"], tol=cfg["tol"]))
    rows = np.column_stack([curve.separations_a0, curve.energies_ry])
    write_csv(outdir / "curve.csv", EXPERIMENTS["hehplus-curve"]["columns"], rows)
    return {
        "minimum_d_over_a0": curve.minimum[0],
        "minimum_energy_ry": curve.minimum[1],
        "reference_minimum_ry": -5.9574,
    }, ["curve.csv"]


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _column_help() -> str:
    lines = ["experiment CSV columns:"]
    for name, info in EXPERIMENTS.items():
        lines.append(f"  {name}: {', '.join(info['columns'])}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latticechem",
        description="Desk-scale experiments for the lattice quantum-chemistry "
                    "simulator toolkit.",
        epilog=_column_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("experiment", choices=sorted(EXPERIMENTS))
    parser.add_argument("--config", type=Path, default=None,
                        help="TOML config; unknown keys are rejected")
    parser.add_argument("--out", type=Path, default=None,
                        help="output directory (default runs/<experiment>)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--paper-scale", action="store_true",
                        help="use the publication-size defaults (long runs)")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    info = EXPERIMENTS[args.experiment]
    raw = {}
    if args.config is not None:
        try:
            raw = tomllib.loads(Path(args.config).read_text())
        except (OSError, tomllib.TOMLDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 2
    if args.paper_scale:
        merged_defaults = dict(info["schema"])
        for k, v in info["paper"].items():
            typ, _ = merged_defaults[k]
            merged_defaults[k] = (typ, v)
        schema = merged_defaults
    else:
        schema = info["schema"]
    try:
        cfg = _validate(raw, schema, args.experiment)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    outdir = args.out or Path("runs") / args.experiment
    outdir.mkdir(parents=True, exist_ok=True)
    stages = Stages()
    full_cfg = dict(cfg, seed=args.seed, paper_scale=args.paper_scale)
    from scipy import fft as _fft

    try:
        with _fft.set_workers(max(1, args.threads)):
            summary, files = info["fn"](cfg, outdir, args.seed, stages)
    except (EigensolverError, med.NoBoundStateError, med.MediatorError,
            mit.ExtrapolationError, ValueError) as exc:
        _emit(outdir, args.experiment, full_cfg, stages,
              {"error": f"{type(exc).__name__}: {exc}"}, [], status="failed")
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    _emit(outdir, args.experiment, full_cfg, stages, summary, files)
    print(json.dumps(summary, indent=2, sort_keys=True, default=float))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

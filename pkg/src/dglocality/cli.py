"""Command-line entry point.

    dglocality <command> --config <path> [--out <dir>] [--workers N] [--seed S]

Commands: simulate, probe, analytic, werner, sweep, noise-floor.

Outputs in ``--out`` (default ``.``):

    report.json   config echo, verdicts with metric and noise floor, health block
    profiles.csv  x1 followed by one column per profile (header row)
    sweep.csv     c3, c1_plus_c4, metric, noise_floor, verdict (sweep only)
    timing.json   wall-clock seconds per stage

report.json and the CSV files depend only on the config and seed; timing is
kept in its own file so that repeated runs produce byte-identical reports.

Exit codes: 0 success (whatever the physics verdict), 2 configuration error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import analytic
from .config import (
    ExperimentConfig,
    build_coefficients,
    build_grid,
    build_kind,
    build_masses,
    build_potential,
    build_regularization,
    load_config,
)
from .errors import ConfigurationError, NumericalError
from .evolution import EvolutionConfig, add_potentials, evolve, norm_drift, stability_dt
from .field import norm_sq, tail_mass
from .gaussian import GaussianState, WernerConfig, werner_noise_floor, werner_test
from .nonlinearity import DG, DGCoefficients
from .probe import ProbeConfig, gisin_probe, marginal_density, noise_floor

log = logging.getLogger("dglocality")

COMMANDS = ("simulate", "probe", "analytic", "werner", "sweep", "noise-floor")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
SWEEP_COLUMNS = ("c3", "c1_plus_c4", "metric", "noise_floor", "verdict")


class StageError(Exception):
    def __init__(self, stage, err):
        super().__init__(f"{stage}: {err}")
        self.stage = stage
        self.err = err


class _Stages:
    """Names the stage around each step so failures say where they happened."""

    def __init__(self):
        self.timing = {}

    def run(self, stage, fn, *args, **kw):
        start = time.perf_counter()
        try:
            return fn(*args, **kw)
        except (ConfigurationError, NumericalError) as err:
            raise StageError(stage, err) from err
        finally:
            self.timing[stage] = self.timing.get(stage, 0.0) + time.perf_counter() - start


# ---------------------------------------------------------------------------
# building blocks


def _gaussian_state(config: ExperimentConfig) -> GaussianState:
    i = config.initial
    return GaussianState(i.a, i.b, i.c, i.d, i.e, i.f)


def _initial_field(config: ExperimentConfig, grid):
    i = config.initial
    if i.type == "gaussian":
        phi = _gaussian_state(config).tabulate(grid)
    else:
        r1 = analytic.GaussianProfile(i.center1, i.width1)
        r2 = analytic.GaussianProfile(i.center2, i.width2)
        amp = analytic.Product(r1, r2) if i.type == "product" else analytic.CorrelatedSeparable(i.sign, r1, r2)
        phi = analytic.InitialSpec(amp, i.phase).field(grid)
    if i.normalize:
        phi = phi.with_values(phi.values / np.sqrt(norm_sq(phi)))
    return phi


def _initial_spec(config: ExperimentConfig, grid) -> analytic.InitialSpec:
    i = config.initial
    if i.type == "gaussian":
        phi = _initial_field(config, grid)
        return analytic.InitialSpec(analytic.Tabulated(grid, np.abs(phi.values)),
                                    analytic.Tabulated(grid, np.angle(phi.values)))
    r1 = analytic.GaussianProfile(i.center1, i.width1)
    r2 = analytic.GaussianProfile(i.center2, i.width2)
    amp = analytic.Product(r1, r2) if i.type == "product" else analytic.CorrelatedSeparable(i.sign, r1, r2)
    return analytic.InitialSpec(amp, i.phase)


def _probe_config(config: ExperimentConfig) -> ProbeConfig:
    p = config.probe
    return ProbeConfig(nu=p.nu, stencil_dt=p.stencil_dt, stencil_halfwidth=p.stencil_halfwidth,
                       perturbation=build_potential(config.perturbation),
                       richardson_levels=p.richardson_levels, substeps=p.substeps,
                       reg=build_regularization(config))


def _werner_config(config: ExperimentConfig, coeffs: DGCoefficients) -> WernerConfig:
    p, w = config.probe, config.werner
    return WernerConfig(masses=build_masses(config), kappa1=w.kappa1, kappa2_pair=tuple(w.kappa2_pair),
                        coeffs=coeffs, nu=p.nu, stencil_dt=p.stencil_dt, stencil_halfwidth=p.stencil_halfwidth,
                        richardson_levels=p.richardson_levels, substeps=w.substeps,
                        x_eval=tuple(np.linspace(w.x_range[0], w.x_range[1], w.x_points)))


def _setup(config):
    grid = build_grid(config)
    return (grid, build_masses(config), build_potential(config.potential1), build_potential(config.potential2))


def _verdict(metric, eta, verdict):
    return {"metric": float(metric), "noise_floor": float(eta), "verdict": verdict}


# ---------------------------------------------------------------------------
# commands; each returns (report_dict, profile_columns or None, sweep_rows or None)


def cmd_simulate(config, stages, workers):
    grid, masses, v1, v2 = stages.run("setup", _setup, config)
    phi = stages.run("initial", _initial_field, config, grid)
    kind = build_kind(config.nonlinearity)
    sim = config.simulate
    dt = sim.dt or 0.5 * stability_dt(grid, masses)
    times = list(np.linspace(0.0, sim.t_final, sim.samples))
    ec = EvolutionConfig(dt, sim.t_final, kind, build_regularization(config))
    traj = stages.run("evolve", evolve, phi, v1, v2, masses, ec, times=times)
    cols = {"x1": grid.axis1.nodes}
    cols["rho1_t0"] = marginal_density(phi).values
    for t, f in zip(traj.times[1:], traj.fields[1:]):
        cols[f"rho1_t{t:.6g}"] = marginal_density(f).values
    health = {"norm_drift": norm_drift(traj), "tail_mass": max(tail_mass(f) for f in traj.fields), "dt": dt}
    return {"health": health}, cols, None


def cmd_probe(config, stages, workers):
    grid, masses, v1, v2 = stages.run("setup", _setup, config)
    phi = stages.run("initial", _initial_field, config, grid)
    pc = stages.run("probe-config", _probe_config, config)
    eta = stages.run("noise-floor", noise_floor, phi, v1, v2, masses, pc)
    rep = stages.run("probe", gisin_probe, phi, v1, v2, masses, build_kind(config.nonlinearity), pc, noise=eta)
    cols = {"x1": grid.axis1.nodes, "baseline": rep.baseline.values, "perturbed": rep.perturbed.values,
            "difference": rep.difference}
    report = _verdict(rep.dependence, rep.noise_floor, rep.verdict)
    report["health"] = {"richardson_errors": [float(e) for e in rep.errors], "tail_mass": tail_mass(phi)}
    return report, cols, None


def cmd_analytic(config, stages, workers):
    grid, masses, v1, v2 = stages.run("setup", _setup, config)
    spec = stages.run("initial", _initial_spec, config, grid)
    reg = build_regularization(config)
    pert = add_potentials(v2, build_potential(config.perturbation))
    an = config.analytic
    cols = {"x1": grid.axis1.nodes}
    report = {"ess_max": {}}
    nodeless = config.initial.type != "correlated"
    if nodeless:
        phi = spec.field(grid)
        for tag in an.tags:
            prof = stages.run(f"ess-{tag}", analytic.ess_t_numeric, phi, tag, v2, pert, reg).profile
            cols[f"ess_{tag}"] = prof
            report["ess_max"][tag] = float(np.max(np.abs(prof)))
    if spec.s == analytic.BILINEAR_PHASE and not isinstance(spec.r, analytic.Tabulated):
        cols["t3_closed"] = stages.run("closed-t3", analytic.ess_t3_closed, spec, an.g, grid)
        cols["t4_closed"] = stages.run("closed-t4", analytic.ess_t4_closed, spec, an.g, grid)
        report["closed_max"] = {k: float(np.max(np.abs(cols[k]))) for k in ("t3_closed", "t4_closed")}
        if config.nonlinearity.kind == "dg":
            comb = analytic.dg_ess_combination(build_coefficients(config.nonlinearity), spec, an.g, grid)
            cols["dg_combination"] = comb
            report["dg_combination_max"] = float(np.max(np.abs(comb)))
    if an.random_specs:
        rows = []
        for k, rs in enumerate(analytic.random_specs(grid, an.random_specs, config.run.seed)):
            phi_r = rs.field(grid)
            rows.append({tag: float(np.max(np.abs(
                stages.run(f"random-{k}-{tag}", analytic.ess_t_numeric, phi_r, tag, v2, pert, reg).profile)))
                for tag in an.tags})
        report["random_specs"] = rows
    return report, cols, None


def cmd_werner(config, stages, workers):
    if config.nonlinearity.kind != "dg":
        raise StageError("werner", ConfigurationError(["nonlinearity.kind: werner needs kind = dg"]))
    wc = stages.run("werner-config", _werner_config, config, build_coefficients(config.nonlinearity))
    state = _gaussian_state(config)
    rep = stages.run("werner", werner_test, wc, state)
    cols = {"x1": rep.x1, "kappa2_a": rep.profiles[0], "kappa2_b": rep.profiles[1],
            "difference": rep.profiles[1] - rep.profiles[0]}
    report = _verdict(rep.dependence, rep.noise_floor, rep.verdict)
    report["health"] = {"richardson_errors": [float(e) for e in rep.errors]}
    return report, cols, None


def _sweep_point(args):
    """One (c3, c1+c4) point; module level so the process pool can pickle it."""
    config, c3, s, eta = args
    sw = config.sweep
    coeffs = DGCoefficients(c1=sw.c1, c2=sw.c2, c3=c3, c4=s - sw.c1, c5=sw.c5)
    if sw.engine == "werner":
        rep = werner_test(_werner_config(config, coeffs), _gaussian_state(config), noise_floor=eta)
    else:
        grid, masses, v1, v2 = _setup(config)
        rep = gisin_probe(_initial_field(config, grid), v1, v2, masses, DG(coeffs), _probe_config(config), noise=eta)
    return {"c3": c3, "c1_plus_c4": s, "metric": rep.dependence, "noise_floor": rep.noise_floor,
            "verdict": rep.verdict}


def _sweep_noise(config):
    if config.sweep.engine == "werner":
        return werner_noise_floor(_werner_config(config, DGCoefficients()), _gaussian_state(config))
    grid, masses, v1, v2 = _setup(config)
    return noise_floor(_initial_field(config, grid), v1, v2, masses, _probe_config(config))


def cmd_sweep(config, stages, workers):
    eta = stages.run("noise-floor", _sweep_noise, config)
    points = [(config, float(c3), float(s), eta) for c3 in config.sweep.c3 for s in config.sweep.c1_plus_c4]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = stages.run("sweep", lambda: list(pool.map(_sweep_point, points)))
    else:
        rows = stages.run("sweep", lambda: [_sweep_point(p) for p in points])
    independent = [(r["c3"], r["c1_plus_c4"]) for r in rows if r["verdict"] == "independent"]
    report = {"noise_floor": eta, "points": len(rows), "independent_points": independent,
              "verdict_counts": {v: sum(r["verdict"] == v for r in rows)
                                 for v in ("independent", "dependent", "inconclusive")}}
    return report, None, rows


def cmd_noise_floor(config, stages, workers):
    eta = stages.run("noise-floor", _sweep_noise, config)
    return {"engine": config.sweep.engine, "noise_floor": eta}, None, None


HANDLERS = {
    "simulate": cmd_simulate,
    "probe": cmd_probe,
    "analytic": cmd_analytic,
    "werner": cmd_werner,
    "sweep": cmd_sweep,
    "noise-floor": cmd_noise_floor,
}

# ---------------------------------------------------------------------------
# output


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if np.isfinite(obj) else repr(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, data):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_profiles(path, cols):
    names = list(cols)
    data = np.column_stack([np.asarray(cols[n], dtype=float) for n in names])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in data:
            w.writerow([repr(float(v)) for v in row])


def write_sweep(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([repr(float(r[c])) if c != "verdict" else r[c] for c in SWEEP_COLUMNS])


def run_command(command: str, config: ExperimentConfig, out_dir: str = ".", workers: int = 1):
    """Run one command, write its outputs, return the report dict."""
    stages = _Stages()
    report, cols, rows = HANDLERS[command](config, stages, workers)
    report = {"command": command, "config": config.echo(), **report}
    os.makedirs(out_dir, exist_ok=True)
    write_json(os.path.join(out_dir, "report.json"), report)
    if cols is not None:
        write_profiles(os.path.join(out_dir, "profiles.csv"), cols)
    if rows is not None:
        write_sweep(os.path.join(out_dir, "sweep.csv"), rows)
    write_json(os.path.join(out_dir, "timing.json"), stages.timing)
    return report


def build_parser():
    p = argparse.ArgumentParser(prog="dglocality",
                                description="Locality probes for nonlinear two-particle Schroedinger equations.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="experiment config (INI)")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--workers", type=int, default=1, help="process pool size for sweep")
    p.add_argument("--seed", type=int, default=None, help="overrides [run] seed")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = load_config(args.config)
    except OSError as err:
        print(f"config: cannot read {args.config}: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigurationError as err:
        for p in err.problems:
            print(f"config: {p}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        config = replace(config, run=replace(config.run, seed=args.seed))
    if args.workers < 1:
        print("config: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_command(args.command, config, args.out, args.workers)
    except StageError as err:
        code = EXIT_CONFIG if isinstance(err.err, ConfigurationError) else EXIT_NUMERICAL
        print(f"{err.stage}: {err.err}", file=sys.stderr)
        return code
    if "verdict" in report:
        log.info("verdict %s (metric %.3e, noise floor %.3e)", report["verdict"], report["metric"],
                 report["noise_floor"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

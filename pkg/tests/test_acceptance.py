"""Acceptance criteria, one test each, at the stated tolerances.

Each test records a PASS/FAIL line (shown in the terminal summary) before
asserting, so a failing criterion still reports its measured numbers.
"""
import csv
import os
import time

import numpy as np
import pytest

from conftest import ENTANGLED, FACTORIZED, normalized
from dglocality import analytic
from dglocality.cli import run_command
from dglocality.config import load_config
from dglocality.evolution import (
    Bump,
    EvolutionConfig,
    Harmonic,
    LinearWindow,
    Masses,
    add_potentials,
    evolve,
    norm_drift,
    realize,
    stability_dt,
    Zero,
)
from dglocality.field import make_grid
from dglocality.gaussian import evolve_gaussian
from dglocality.nonlinearity import BBM, DG, TAGS, DGCoefficients, Linear, Regularization, Single
from dglocality.probe import ProbeConfig, gisin_probe, marginal_density, noise_floor

pytestmark = pytest.mark.slow

CONFIGS = os.path.join(os.path.dirname(__file__), os.pardir, "configs")
M = Masses(1.0, 1.0)
V1, V2 = Harmonic(1.0), Harmonic(0.5)
BUMP = Bump(1.0, 0.5, 3.0)


def profile_scale(phi, base_v2, pert_v2):
    """max rho1 times the rho2-weighted rms of d(delta V2)/dx2; equals g max rho1 for V2 = g x2."""
    ax = phi.grid.axis2
    dv = np.gradient(realize(pert_v2, ax) - realize(base_v2, ax), ax.spacing)
    rho = np.abs(phi.values) ** 2
    rho2 = rho.sum(axis=0)
    return marginal_density(phi).values.max() * np.sqrt(np.sum(rho2 * dv**2) / np.sum(rho2))


@pytest.fixture(scope="module")
def sweep_runs(tmp_path_factory):
    config = load_config(os.path.join(CONFIGS, "werner_sweep.ini"))
    root = tmp_path_factory.mktemp("sweep")
    t0 = time.perf_counter()
    first = run_command("sweep", config, str(root / "a"), workers=1)
    elapsed = time.perf_counter() - t0
    return config, root, first, elapsed


def test_criterion_1_werner_boundary(sweep_runs, record):
    config, root, report, elapsed = sweep_runs
    with open(root / "a" / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    eta = report["noise_floor"]
    bad = []
    for r in rows:
        point = (float(r["c3"]), float(r["c1_plus_c4"]))
        metric = float(r["metric"])
        if point == (0.0, 0.0):
            ok = r["verdict"] == "independent"
        else:
            ok = r["verdict"] == "dependent" and metric > 10 * eta
        if not ok:
            bad.append(point)
    min_other = min(float(r["metric"]) for r in rows if (float(r["c3"]), float(r["c1_plus_c4"])) != (0.0, 0.0))
    ok = len(rows) == 25 and not bad and elapsed < 120
    record(1, ok, f"{len(rows)} points, failures {bad}, noise floor {eta:.2e}, "
                  f"smallest non-covariant metric {min_other:.2e}, {elapsed:.0f} s")
    assert ok


def test_criterion_2_closed_forms(record):
    grid = make_grid(10.0, 256, 10.0, 256)
    g = 1.0
    r1p, r2p = analytic.GaussianProfile(0.3, 0.9), analytic.GaussianProfile(-0.2, 0.8)
    x = grid.axis1.nodes
    r1 = r1p(x)
    dr1 = -(x - r1p.center) / r1p.width**2 * r1
    norm2 = grid.axis2.spacing * np.sum(r2p(grid.axis2.nodes) ** 2)
    stated_err = []
    derived_err = []
    for sign in (1, -1):
        spec = analytic.InitialSpec(analytic.CorrelatedSeparable(sign, r1p, r2p))
        closed = analytic.ess_t4_closed(spec, g, grid)
        stated = -sign * 8 * g * x * r1 * dr1 * norm2
        stated_err.append(np.abs(closed - stated).max() / np.abs(stated).max())
        derived = -sign * 4 * g * r1 * dr1 * norm2
        derived_err.append(np.abs(closed - derived).max() / np.abs(derived).max())
    product = analytic.InitialSpec(analytic.Product(r1p, r2p))
    phi = product.field(grid)
    scale = profile_scale(phi, Zero(), LinearWindow(g, (-7.0, 7.0), 1.5))
    t3 = np.abs(analytic.ess_t3_closed(product, g, grid)).max()
    t4 = np.abs(analytic.ess_t4_closed(product, g, grid)).max()
    ok_stated = max(stated_err) < 1e-8
    ok = ok_stated and t3 > 1e-3 * scale and t4 < 1e-10
    record(2, ok, f"T4 vs stated correlated formula rel err {max(stated_err):.2e} (need < 1e-8); "
                  f"vs derived -+4g r1 r1' int r2^2 {max(derived_err):.1e}; "
                  f"factorized T3/scale {t3 / scale:.2e}, T4 {t4:.1e}")
    assert ok


# The floor rho + eps max(rho) leaks into the phase-Laplacian term at about
# eps^0.7 (2.8e-9 of scale at the default 1e-12) while roundoff in the R5 term
# grows like 1/eps; 1e-14 keeps both below the tolerance.
VANISHING_REG = Regularization(1e-14)


def test_criterion_3_vanishing_set(record):
    t0 = time.perf_counter()
    grid = make_grid(12.0, 256, 12.0, 256)
    specs = analytic.random_specs(grid, 5, seed=2024)
    perturbations = [
        (V2, add_potentials(V2, LinearWindow(1.0, (-7.0, 7.0), 1.5))),
        (V2, add_potentials(V2, BUMP)),
        (V2, Harmonic(1.0)),
    ]
    vanish = ("BBM", "R2", "R5", "R1minus4")
    worst = dict.fromkeys(vanish, 0.0)
    best = {"R3": 0.0, "R4": 0.0}
    default_floor = 0.0
    for spec in specs:
        phi = spec.field(grid)
        for base, pert in perturbations:
            scale = profile_scale(phi, base, pert)
            for tag in vanish + tuple(best):
                prof = analytic.ess_t_numeric(phi, tag, base, pert, VANISHING_REG).profile
                rel = np.abs(prof).max() / scale
                if tag in worst:
                    worst[tag] = max(worst[tag], rel)
                else:
                    best[tag] = max(best[tag], rel)
            prof = analytic.ess_t_numeric(phi, "R1minus4", base, pert).profile
            default_floor = max(default_floor, np.abs(prof).max() / scale)
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) < 1e-9 and min(best.values()) > 1e-3 and elapsed < 60
    record(3, ok, "vanishing " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
           + f" (eps_rel 1e-14; R1minus4 at default floor {default_floor:.1e}); signalling "
           + ", ".join(f"{k} {v:.2f}" for k, v in best.items()) + f"; {elapsed:.0f} s")
    assert ok


def test_criterion_4_probe_matches_semi_analytic(record):
    grid = make_grid(12.0, 256, 12.0, 256)
    phi = normalized(ENTANGLED.tabulate(grid))
    cfg = ProbeConfig(nu=3, perturbation=BUMP)
    kind = Single("R4")
    eta = noise_floor(phi, V1, V2, M, cfg)
    rep = gisin_probe(phi, V1, V2, M, kind, cfg, noise=eta)
    ess = analytic.ess_t_numeric(phi, kind, V2, add_potentials(V2, BUMP)).profile / M.m1
    signal = np.abs(rep.difference)
    mask = signal > 10 * eta
    rel = np.abs(signal[mask] - np.abs(ess[mask])) / np.abs(ess[mask])
    ok = mask.sum() > 0 and rel.max() < 0.2
    record(4, ok, f"{mask.sum()} points above 10x noise floor {eta:.1e}, max rel err {rel.max():.2e}")
    assert ok


def test_criterion_5_trivial_separability(record):
    t0 = time.perf_counter()
    grid = make_grid(12.0, 256, 12.0, 256)
    kinds = [Linear(), BBM(1.0), DG(DGCoefficients(1, 0.3, 0.5, -1, 0.2)), DG(DGCoefficients(1, 0.3, 0, -1, 0.2))]
    kinds += [Single(t) for t in TAGS]
    cases = [("factorized", FACTORIZED, (1, 2, 3)), ("entangled", ENTANGLED, (1, 2))]
    bad = []
    count = 0
    for label, state, orders in cases:
        phi = normalized(state.tabulate(grid))
        for nu in orders:
            cfg = ProbeConfig(nu=nu, perturbation=BUMP)
            eta = noise_floor(phi, V1, V2, M, cfg)
            for kind in kinds:
                rep = gisin_probe(phi, V1, V2, M, kind, cfg, noise=eta)
                count += 1
                if rep.verdict != "independent":
                    bad.append((label, nu, kind, rep.verdict, rep.dependence / eta))
    # the linear kind must also be independent on entangled data at nu = 3
    phi = normalized(ENTANGLED.tabulate(grid))
    cfg = ProbeConfig(nu=3, perturbation=BUMP)
    rep = gisin_probe(phi, V1, V2, M, Linear(), cfg)
    count += 1
    if rep.verdict != "independent":
        bad.append(("entangled", 3, Linear(), rep.verdict, rep.dependence / rep.noise_floor))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 300
    record(5, ok, f"{count} probes, non-independent {bad}, {elapsed:.0f} s")
    assert ok


GAUSS_SETS = [(-1, 0.05, 0, 1, 0.05), (-1, 0.05, 0.5, 1, 0.05), (-1, 0.05, 0, 0.5, 0.05)]


def test_criterion_6_numerical_health(record):
    grid = make_grid(8.0, 128, 8.0, 128)
    phi = ENTANGLED.tabulate(grid)
    dt = 0.5 * stability_dt(grid, M)
    kind = DG(DGCoefficients(-1, 0.05, 0.5, 1, 0.05))
    traj = evolve(phi, V1, V2, M, EvolutionConfig(dt, 0.1, kind), times=list(np.linspace(0.0, 0.1, 11)))
    drift_rate = norm_drift(traj) / 0.1

    h = stability_dt(grid, M)
    finals = [evolve(phi, V1, V2, M, EvolutionConfig(h / 2**k, 0.02, kind)).final.values for k in range(3)]
    ratio = np.abs(finals[0] - finals[1]).max() / np.abs(finals[1] - finals[2]).max()

    gauss_err = []
    times = np.linspace(0.01, 0.1, 10)
    for c in GAUSS_SETS:
        coeffs = DGCoefficients(*c)
        traj = evolve(phi, V1, V2, M, EvolutionConfig(dt, 0.1, DG(coeffs)), times=list(times))
        _, states = evolve_gaussian(ENTANGLED, coeffs, M, 1.0, 0.5, dt / 4, 0.1, times=times)
        assert np.allclose(traj.times, times)
        gauss_err.append(max(np.abs(f.values - s.tabulate(grid).values).max()
                             for f, s in zip(traj.fields, states)))
    ok = drift_rate < 1e-6 and 12 <= ratio <= 20 and max(gauss_err) < 1e-4
    record(6, ok, f"norm drift {drift_rate:.1e}/unit time, dt-halving ratio {ratio:.2f}, "
                  f"Gaussian vs grid max |dPsi| {max(gauss_err):.1e}")
    assert ok


def test_criterion_7_determinism(sweep_runs, record):
    config, root, _, _ = sweep_runs
    run_command("sweep", config, str(root / "b"), workers=2)
    same = {name: (root / "a" / name).read_bytes() == (root / "b" / name).read_bytes()
            for name in ("sweep.csv", "report.json")}
    ok = all(same.values())
    record(7, ok, "byte-identical " + ", ".join(f"{k} {v}" for k, v in same.items()) + " (1 vs 2 workers)")
    assert ok

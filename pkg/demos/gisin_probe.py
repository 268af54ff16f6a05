"""Grid probe: does a bump in V2 change d^3 rho1/dt^3 at t=0?

Runs the full two-particle PDE on a 128x128 grid for a handful of
nonlinearities, on entangled and on product initial data.

    python demos/gisin_probe.py
"""
import numpy as np

from dglocality.evolution import Bump, Harmonic, Masses
from dglocality.field import make_grid, norm_sq
from dglocality.gaussian import GaussianState
from dglocality.nonlinearity import BBM, DG, DGCoefficients, Linear, Single
from dglocality.probe import ProbeConfig, gisin_probe, noise_floor

GRID = make_grid(8.0, 128, 8.0, 128)
STATES = {
    "entangled": GaussianState(0.6 + 0.2j, 0.5 + 0.4j, 0.8 - 0.1j, 0.1 + 0.2j, -0.2 + 0.1j, 0),
    "product": GaussianState(0.6 + 0.2j, 0, 0.8 - 0.1j, 0.1 + 0.2j, -0.2 + 0.1j, 0),
}
KINDS = {
    "linear": Linear(),
    "BBM": BBM(1.0),
    "DG covariant": DG(DGCoefficients(1, 0.3, 0, -1, 0.2)),
    "DG c3 = 0.5": DG(DGCoefficients(1, 0.3, 0.5, -1, 0.2)),
    "R4 alone": Single("R4"),
}


def main():
    masses = Masses(1.0, 1.0)
    v1, v2 = Harmonic(1.0), Harmonic(0.5)
    config = ProbeConfig(nu=3, perturbation=Bump(1.0, 0.5, 3.0))
    for label, state in STATES.items():
        phi = state.tabulate(GRID)
        phi = phi.with_values(phi.values / np.sqrt(norm_sq(phi)))
        eta = noise_floor(phi, v1, v2, masses, config)
        print(f"{label} state, noise floor {eta:.2e}")
        for name, kind in KINDS.items():
            rep = gisin_probe(phi, v1, v2, masses, kind, config, noise=eta)
            print(f"  {name:14s} metric {rep.dependence:.2e}  -> {rep.verdict}")


if __name__ == "__main__":
    main()

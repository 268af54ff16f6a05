"""Where does the third time derivative of rho1 stop depending on kappa2?

Gaussian-ansatz scan of a few DG coefficient sets with harmonic potentials.
Only the sets with c3 = 0 and c1 + c4 = 0 come out independent.

    python demos/werner_boundary.py
"""
from dglocality.gaussian import GaussianState, WernerConfig, werner_noise_floor, werner_test
from dglocality.nonlinearity import DGCoefficients

STATE = GaussianState(0.6 + 0.2j, 0.5 + 0.4j, 0.8 - 0.1j, 0.1 + 0.2j, -0.2 + 0.1j, 0)

SETS = {
    "covariant (1, 0.7, 0, -1, 0.4)": DGCoefficients(1, 0.7, 0, -1, 0.4),
    "density terms only (0, 0.7, 0, 0, 0.4)": DGCoefficients(0, 0.7, 0, 0, 0.4),
    "c3 = 0.5": DGCoefficients(1, 0.7, 0.5, -1, 0.4),
    "c1 + c4 = 0.5": DGCoefficients(1, 0.7, 0, -0.5, 0.4),
}


def main():
    eta = werner_noise_floor(WernerConfig(), STATE)
    print(f"linear-theory noise floor at nu=3: {eta:.2e}")
    for label, coeffs in SETS.items():
        rep = werner_test(WernerConfig(coeffs=coeffs), STATE, noise_floor=eta)
        print(f"{label:40s} metric {rep.dependence:.2e}  -> {rep.verdict}")
    # lower orders never see the nonlinearity's V2 dependence
    for nu in (1, 2):
        rep = werner_test(WernerConfig(coeffs=SETS["c3 = 0.5"], nu=nu), STATE)
        print(f"c3 = 0.5 at nu={nu}: {rep.verdict}")


if __name__ == "__main__":
    main()

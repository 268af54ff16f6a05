"""Locality tests for nonlinear two-particle Schroedinger equations on a grid,
in a Gaussian-ansatz reduction, and by semi-analytic t=0 expansions."""

from .errors import AccuracyError, AnsatzBreakdownError, ConfigurationError, NumericalError, SingularityError
from .field import Axis, MarginalField, PairField, PairGrid, integrate_axis2, make_grid, norm_sq, spectral_partial
from .nonlinearity import (
    BBM,
    DG,
    TAGS,
    DGCoefficients,
    Linear,
    Regularization,
    Single,
    density_and_current,
    evaluate_F,
    evaluate_R,
)
from .evolution import Bump, EvolutionConfig, Harmonic, LinearWindow, Masses, Zero, evolve, select_dt
from .probe import ProbeConfig, ProbeReport, gisin_probe, marginal_density, noise_floor
from .gaussian import GaussianState, WernerConfig, evolve_gaussian, gaussian_marginal, werner_test
from .analytic import (
    CorrelatedSeparable,
    InitialSpec,
    Product,
    Tabulated,
    ess_t3_closed,
    ess_t4_closed,
    ess_t_numeric,
    first_order_data,
    r_dot0,
    t_functional,
)

__version__ = "0.1.0"

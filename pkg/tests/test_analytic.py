import numpy as np
import pytest

from dglocality.analytic import (
    ZERO_PHASE,
    CorrelatedSeparable,
    GaussianProfile,
    InitialSpec,
    Product,
    Tabulated,
    combination_vanishes,
    dg_ess_combination,
    ess_t3_closed,
    ess_t4_closed,
    ess_t4_separable,
    ess_t_numeric,
    first_order_data,
    r_dot0,
    t_functional,
)
from dglocality.errors import ConfigurationError
from dglocality.evolution import Bump, EvolutionConfig, Harmonic, LinearWindow, Masses, Zero, add_potentials, evolve
from dglocality.field import make_grid, partial
from dglocality.gaussian import GaussianState
from dglocality.nonlinearity import BBM, DG, DGCoefficients, Linear, Single

GRID = make_grid(10.0, 256, 10.0, 256)
X1, X2 = GRID.mesh()
R1P, R2P = GaussianProfile(0.3, 0.9), GaussianProfile(-0.2, 0.8)
PRODUCT = InitialSpec(Product(R1P, R2P))
CORRELATED_AMP = np.exp(-(0.6 * X1**2 + 0.5 * X1 * X2 + 0.8 * X2**2) - 0.1 * X1)
CORRELATED = InitialSpec(Tabulated(GRID, CORRELATED_AMP))
M = Masses(1.0, 1.0)
RAMP = LinearWindow(1.0, (-7.0, 7.0), 1.5)
BUMP = Bump(0.8, 0.4, 3.0)


def bulk(phi, frac=1e-6):
    rho = np.abs(phi.values) ** 2
    return rho > frac * rho.max()


def test_spec_fields():
    phi = PRODUCT.field(GRID)
    np.testing.assert_allclose(np.angle(phi.values)[128, 140], X1[128, 140] * X2[128, 140], atol=1e-12)
    assert InitialSpec(Product(R1P, R2P), ZERO_PHASE).field(GRID).values.imag.max() == 0
    with pytest.raises(ConfigurationError):
        InitialSpec(Product(R1P, R2P), "quadratic")
    with pytest.raises(ConfigurationError):
        CorrelatedSeparable(0, R1P, R2P)


def test_stationary_first_order_data():
    phi = GaussianState(np.sqrt(0.5), 0, np.sqrt(0.25)).tabulate(GRID)
    fo = first_order_data(phi, Harmonic(1.0), Harmonic(0.5), M, Linear())
    assert np.abs(fo.rho_dot).max() < 1e-12
    assert max(np.abs(j).max() for j in fo.j_dot) < 1e-10


def test_real_data_has_no_density_change():
    phi = InitialSpec(Product(R1P, R2P), ZERO_PHASE).field(GRID)
    fo = first_order_data(phi, Harmonic(1.0), RAMP, M, Single("R4"))
    assert np.abs(fo.rho_dot).max() < 1e-12


def test_continuity():
    m = Masses(1.3, 0.7)
    phi = CORRELATED.field(GRID)
    fo = first_order_data(phi, Harmonic(1.0), Harmonic(0.5), m, DG(DGCoefficients(1, 0.3, 0.5, -1, 0.2)))
    j1 = np.imag(np.conj(phi.values) * partial(phi.values, GRID, 1))
    j2 = np.imag(np.conj(phi.values) * partial(phi.values, GRID, 2))
    expect = -partial(j1, GRID, 1) / m.m1 - partial(j2, GRID, 2) / m.m2
    assert np.abs(fo.rho_dot - expect).max() < 1e-10


def test_density_rate_matches_short_evolution():
    grid = make_grid(8.0, 128, 8.0, 128)
    x1, x2 = grid.mesh()
    phi = InitialSpec(Tabulated(grid, np.exp(-(0.6 * x1**2 + 0.5 * x1 * x2 + 0.8 * x2**2)))).field(grid)
    kind = DG(DGCoefficients(1, 0.3, 0.5, -1, 0.2))
    fo = first_order_data(phi, Harmonic(1.0), Harmonic(0.5), M, kind)
    d = 1e-4
    ends = [evolve(phi, Harmonic(1.0), Harmonic(0.5), M, EvolutionConfig(d / 4, s * d, kind, dealias=False)).final
            for s in (1, -1)]
    fd = (np.abs(ends[0].values) ** 2 - np.abs(ends[1].values) ** 2) / (2 * d)
    assert np.abs(fd - fo.rho_dot).max() < 1e-6 * np.abs(fo.rho_dot).max()


def _ess_rdot(tag, phi, base, pert, kind=None):
    kind = kind or (BBM(1.0) if tag == "BBM" else Single(tag))
    a = first_order_data(phi, Harmonic(1.0), base, M, kind).psi_dot
    b = first_order_data(phi, Harmonic(1.0), pert, M, kind).psi_dot
    return r_dot0(tag, phi, b) - r_dot0(tag, phi, a)


@pytest.mark.parametrize("tag", ["R2", "R5", "BBM"])
def test_density_only_rates_ignore_v2(tag):
    phi = CORRELATED.field(GRID)
    diff = _ess_rdot(tag, phi, Harmonic(0.5), add_potentials(Harmonic(0.5), BUMP))
    # exact zero up to roundoff divided by the density, so weight by it
    rel = np.abs(phi.values) ** 2 / np.max(np.abs(phi.values) ** 2)
    assert np.abs(diff * rel).max() < 1e-11


def test_r4_rate_for_linear_v2():
    phi = CORRELATED.field(GRID)
    diff = _ess_rdot("R4", phi, Zero(), RAMP)
    r = CORRELATED_AMP
    expect = -2.0 * partial(r, GRID, 2) / r
    b = bulk(phi, 1e-4)
    assert np.abs(diff - expect)[b].max() < 1e-7 * np.abs(expect[b]).max()


def test_phase_laplacian_rate_is_minus_v2_curvature():
    phi = CORRELATED.field(GRID)
    diff = _ess_rdot("R1minus4", phi, Harmonic(0.5), Harmonic(0.8))
    b = bulk(phi, 1e-4)
    assert np.abs(diff + 0.6)[b].max() < 1e-6


def test_t_functional_density_terms_ignore_bump():
    phi = CORRELATED.field(GRID)
    a = t_functional(phi, "R2", Harmonic(1.0), Harmonic(0.5), M)
    b = t_functional(phi, "R2", Harmonic(1.0), add_potentials(Harmonic(0.5), BUMP), M)
    assert np.abs(a - b).max() < 1e-10 * np.abs(a).max()


def test_numeric_difference_matches_increment_route():
    phi = CORRELATED.field(GRID)
    for tag in ("R3", "R4"):
        direct = t_functional(phi, tag, Zero(), RAMP, M) - t_functional(phi, tag, Zero(), Zero(), M)
        inc = ess_t_numeric(phi, tag, Zero(), RAMP).profile
        assert np.abs(direct - inc).max() < 1e-9 * np.abs(inc).max()


def test_zero_strength_gives_zero():
    phi = CORRELATED.field(GRID)
    flat = LinearWindow(0.0, (-7.0, 7.0), 1.5)
    assert np.abs(ess_t_numeric(phi, "R4", Zero(), flat).profile).max() == 0
    assert np.abs(ess_t_numeric(phi, Linear(), Zero(), RAMP).profile).max() == 0
    assert np.abs(ess_t3_closed(PRODUCT, 0.0, GRID)).max() == 0
    assert np.abs(ess_t4_closed(CORRELATED, 0.0, GRID)).max() == 0


def test_numeric_matches_closed_forms():
    phi = CORRELATED.field(GRID)
    t3 = ess_t3_closed(CORRELATED, 1.0, GRID)
    t4 = ess_t4_closed(CORRELATED, 1.0, GRID)
    assert np.abs(ess_t_numeric(phi, "R3", Zero(), RAMP).profile - t3).max() < 1e-6 * np.abs(t3).max()
    assert np.abs(ess_t_numeric(phi, "R4", Zero(), RAMP).profile - t4).max() < 1e-6 * np.abs(t4).max()
    c = DGCoefficients(1.0, 0.3, 0.5, -0.4, 0.2)
    num = ess_t_numeric(phi, DG(c), Zero(), RAMP).profile
    comb = dg_ess_combination(c, CORRELATED, 1.0, GRID)
    assert np.abs(num - comb).max() < 1e-6 * np.abs(comb).max()


def test_phase_laplacian_never_signals():
    phi = CORRELATED.field(GRID)
    for pert in (RAMP, BUMP, add_potentials(RAMP, BUMP)):
        assert np.abs(ess_t_numeric(phi, "R1minus4", Harmonic(0.5), pert).profile).max() < 1e-9


def test_t3_of_product():
    t3 = ess_t3_closed(PRODUCT, 1.0, GRID)
    x = GRID.axis1.nodes
    r1 = R1P(x)
    dr1 = -(x - 0.3) / 0.9**2 * r1
    norm2 = GRID.axis2.spacing * np.sum(R2P(GRID.axis2.nodes) ** 2)
    np.testing.assert_allclose(t3, 4 * r1 * dr1 * norm2, atol=1e-12)
    assert np.abs(t3).max() > 0.1


def test_t3_of_even_profile_vanishes_at_origin():
    spec = InitialSpec(Product(GaussianProfile(0.0, 1.0), R2P))
    t3 = ess_t3_closed(spec, 1.0, GRID)
    assert abs(t3[GRID.axis1.points // 2]) < 1e-14


def test_t4_of_product_vanishes():
    assert np.abs(ess_t4_closed(PRODUCT, 1.0, GRID)).max() < 1e-10


@pytest.mark.parametrize("sign", [1, -1])
def test_t4_of_correlated_amplitudes(sign):
    spec = InitialSpec(CorrelatedSeparable(sign, R1P, R2P))
    t4 = ess_t4_closed(spec, 1.0, GRID)
    reduced = ess_t4_separable(spec, 1.0, GRID)
    assert np.abs(t4 - reduced).max() < 1e-8 * np.abs(reduced).max()
    x = GRID.axis1.nodes
    r1 = R1P(x)
    dr1 = -(x - 0.3) / 0.9**2 * r1
    norm2 = GRID.axis2.spacing * np.sum(R2P(GRID.axis2.nodes) ** 2)
    np.testing.assert_allclose(t4, -4 * sign * r1 * dr1 * norm2, atol=1e-10)


def test_closed_forms_need_bilinear_phase():
    with pytest.raises(ConfigurationError):
        ess_t3_closed(InitialSpec(Product(R1P, R2P), ZERO_PHASE), 1.0, GRID)
    with pytest.raises(ConfigurationError):
        ess_t4_separable(CORRELATED, 1.0, GRID)


def test_combination():
    spec = InitialSpec(CorrelatedSeparable(1, R1P, R2P))
    for s in (PRODUCT, spec, CORRELATED):
        assert np.abs(dg_ess_combination(DGCoefficients(1, 0.3, 0, -1, 0.2), s, 1.0, GRID)).max() < 1e-14
        a = dg_ess_combination(DGCoefficients(c1=1.0), s, 1.0, GRID)
        b = dg_ess_combination(DGCoefficients(c4=1.0), s, 1.0, GRID)
        np.testing.assert_allclose(a, b, atol=1e-12)
    pure = dg_ess_combination(DGCoefficients(c3=1.0), PRODUCT, 1.0, GRID)
    np.testing.assert_allclose(pure, ess_t3_closed(PRODUCT, 1.0, GRID))
    assert np.abs(pure).max() > 0.1


def test_r1_and_r4_signal_alike_numerically():
    phi = CORRELATED.field(GRID)
    a = ess_t_numeric(phi, "R1", Harmonic(0.5), Harmonic(0.8)).profile
    b = ess_t_numeric(phi, "R4", Harmonic(0.5), Harmonic(0.8)).profile
    assert np.abs(a - b).max() < 1e-8 * np.abs(b).max()


@pytest.mark.parametrize("coeffs,expected", [
    ((1, 0.3, 0, -1, 0.2), True),
    ((0, 0.7, 0, 0, 0.4), True),
    ((1, 0.3, 0.5, -1, 0.2), False),
    ((1, 0, 0, -0.5, 0), False),
    ((0, 0, 1e-3, 0, 0), False),
])
def test_witness_pair_decides_covariance(coeffs, expected):
    c = DGCoefficients(*coeffs)
    assert combination_vanishes(c, GRID) is expected
    assert c.galilei_covariant is expected

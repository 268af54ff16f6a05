"""Gaussian ansatz ``psi = exp(-Q)`` with quadratic ``Q`` under harmonic potentials.

Every functional of the family maps a Gaussian to a polynomial of degree <= 2,
so the two-particle equation closes on the six complex coefficients of ``Q``::

    Q = a x1^2 + b x1 x2 + c x2^2 + d x1 + e x2 + f
    dQ/dt = i [ -sum_j ((d_j Q)^2 - d_j^2 Q) / 2m_j + k1 x1^2 + k2 x2^2 + R ]

Polynomials are 2D coefficient arrays ``P[i, j]`` of ``x1^i x2^j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.signal import convolve2d

from .errors import AnsatzBreakdownError, ConfigurationError
from .evolution import Masses
from .field import PairField, PairGrid
from .nonlinearity import BBM, DG, DGCoefficients, Linear, Single
from .stencils import Extrapolation, INDEPENDENT, classify, time_derivative

_SIZE = 5
_SLOTS = ((2, 0), (1, 1), (0, 2), (1, 0), (0, 1), (0, 0))  # a b c d e f


@dataclass(frozen=True)
class GaussianState:
    a: complex
    b: complex
    c: complex
    d: complex = 0j
    e: complex = 0j
    f: complex = 0j

    def __post_init__(self):
        for name in "abcdef":
            object.__setattr__(self, name, complex(getattr(self, name)))

    @classmethod
    def from_array(cls, arr) -> "GaussianState":
        return cls(*[complex(z) for z in arr])

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d, self.e, self.f], dtype=complex)

    def poly(self) -> np.ndarray:
        p = np.zeros((_SIZE, _SIZE), dtype=complex)
        for (i, j), z in zip(_SLOTS, self.as_array()):
            p[i, j] = z
        return p

    @property
    def positive_definite(self) -> bool:
        a, b, c = self.a.real, self.b.real, self.c.real
        return a > 0 and c > 0 and 4 * a * c - b * b > 0

    @property
    def entangled(self) -> bool:
        return self.b != 0

    def tabulate(self, grid: PairGrid) -> PairField:
        x1, x2 = grid.mesh()
        return PairField(grid, np.exp(-npoly.polyval2d(x1, x2, self.poly())))


def _d(p, axis):
    out = np.zeros_like(p)
    der = npoly.polyder(p, axis=axis)
    if axis == 0:
        out[: der.shape[0], :] = der
    else:
        out[:, : der.shape[1]] = der
    return out


def _mul(p, q):
    return convolve2d(p, q)[:_SIZE, :_SIZE]


def _dot_grad(p, q):
    return _mul(_d(p, 0), _d(q, 0)) + _mul(_d(p, 1), _d(q, 1))


def _lap(p):
    return _d(_d(p, 0), 0) + _d(_d(p, 1), 1)


def _functional_poly(tag, re_q, im_q):
    if tag == "R1":
        return 2 * _dot_grad(re_q, im_q) - _lap(im_q)
    if tag == "R2":
        return 4 * _dot_grad(re_q, re_q) - 2 * _lap(re_q)
    if tag == "R3":
        return _dot_grad(im_q, im_q)
    if tag == "R4":
        return 2 * _dot_grad(re_q, im_q)
    if tag == "R5":
        return 4 * _dot_grad(re_q, re_q)
    if tag == "R1minus4":
        return -_lap(im_q)
    if tag == "BBM":
        return 2 * re_q  # -ln rho = 2 Re Q
    raise ValueError(f"unknown functional tag {tag!r}")


def rhs_polynomial(state: GaussianState, kind, masses: Masses, kappa1: float, kappa2: float) -> np.ndarray:
    """Full polynomial ``dQ/dt`` before truncation to degree two."""
    q = state.poly()
    re_q, im_q = q.real.astype(complex), q.imag.astype(complex)
    total = np.zeros_like(q)
    for axis, m in ((0, masses.m1), (1, masses.m2)):
        dq = _d(q, axis)
        total -= (_mul(dq, dq) - _d(dq, axis)) / (2 * m)
    total[2, 0] += kappa1
    total[0, 2] += kappa2
    for tag, w in kind.terms():
        total += w * _functional_poly(tag, re_q, im_q)
    return 1j * total


def closure_residual(dq: np.ndarray) -> float:
    """Largest coefficient of degree >= 3 in ``dq``."""
    i, j = np.indices(dq.shape)
    high = (i + j) >= 3
    return float(np.max(np.abs(dq[high]))) if high.any() else 0.0


def coefficient_rhs(state: GaussianState, kind, masses: Masses, kappa1: float, kappa2: float) -> GaussianState:
    with np.errstate(all="ignore"):
        dq = rhs_polynomial(state, kind, masses, kappa1, kappa2)
    if not np.all(np.isfinite(dq)):
        raise AnsatzBreakdownError("coefficient derivatives are not finite: the Gaussian collapsed or blew up")
    if closure_residual(dq) != 0.0:
        raise AssertionError("Gaussian ansatz closure violated: degree-3 terms in dQ/dt")
    return GaussianState(*[dq[i, j] for i, j in _SLOTS])


def _as_kind(coeffs):
    if coeffs is None:
        return Linear()
    if isinstance(coeffs, DGCoefficients):
        return DG(coeffs)
    if isinstance(coeffs, (Linear, BBM, DG, Single)):
        return coeffs
    raise TypeError(f"expected DGCoefficients or a functional kind, got {coeffs!r}")


def _vector_rhs(kind, masses, kappa1, kappa2):
    def f(y):
        return coefficient_rhs(GaussianState.from_array(y), kind, masses, kappa1, kappa2).as_array()
    return f


def evolve_gaussian(state0: GaussianState, coeffs, masses: Masses, kappa1: float, kappa2: float,
                    dt: float, t_final: float, times=None):
    """RK4 on the six coefficients.  Returns ``(times, states)``.

    ``times`` defaults to every step; negative ``t_final`` integrates backwards.
    """
    if not state0.positive_definite:
        raise AnsatzBreakdownError("initial real quadratic form is not positive definite")
    kind = _as_kind(coeffs)
    f = _vector_rhs(kind, masses, kappa1, kappa2)
    if times is None:
        n = int(np.ceil(abs(t_final) / dt - 1e-9))
        times = np.linspace(0.0, t_final, n + 1)
    times = np.asarray(sorted(times, key=abs), dtype=float)
    y = state0.as_array()
    t = 0.0
    out = []
    for target in times:
        span = target - t
        n = int(np.ceil(abs(span) / dt - 1e-9)) if span != 0 else 0
        h = span / n if n else 0.0
        for _ in range(n):
            k1 = f(y)
            k2 = f(y + 0.5 * h * k1)
            k3 = f(y + 0.5 * h * k2)
            k4 = f(y + h * k3)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not GaussianState.from_array(y).positive_definite:
                raise AnsatzBreakdownError(f"real quadratic form lost positive definiteness near t={t + h:g}")
        t = target
        out.append(GaussianState.from_array(y))
    return times, out


def gaussian_marginal(state: GaussianState):
    """``(alpha, beta, gamma)`` with ``rho1(x1) = exp(-2 (alpha x1^2 + beta x1 + gamma))``."""
    A, B, C = state.a.real, state.b.real, state.c.real
    D, E, F = state.d.real, state.e.real, state.f.real
    if C <= 0:
        raise AnsatzBreakdownError("Re c <= 0: the x2 integral diverges")
    alpha = A - B * B / (4 * C)
    beta = D - B * E / (2 * C)
    gamma = F - E * E / (4 * C) - 0.25 * np.log(np.pi / (2 * C))
    return alpha, beta, gamma


def marginal_values(state: GaussianState, x1) -> np.ndarray:
    alpha, beta, gamma = gaussian_marginal(state)
    x1 = np.asarray(x1, dtype=float)
    return np.exp(-2 * (alpha * x1**2 + beta * x1 + gamma))


@dataclass(frozen=True)
class WernerConfig:
    masses: Masses = field(default_factory=Masses)
    kappa1: float = 1.0
    kappa2_pair: Tuple[float, float] = (0.5, 1.0)
    coeffs: DGCoefficients = field(default_factory=DGCoefficients)
    nu: int = 3
    stencil_dt: float = 2e-3
    stencil_halfwidth: int = 3
    richardson_levels: int = 3
    substeps: int = 4
    x_eval: Tuple[float, ...] = tuple(np.linspace(-5.0, 5.0, 201))

    def __post_init__(self):
        problems = []
        k_a, k_b = self.kappa2_pair
        if self.kappa1 < 0 or k_a < 0 or k_b < 0:
            problems.append("kappa values must be >= 0")
        if k_a == k_b:
            problems.append("kappa2_pair values must differ")
        if self.nu not in (1, 2, 3, 4):
            problems.append(f"nu must be in 1..4, got {self.nu}")
        if self.stencil_halfwidth < self.nu:
            problems.append("stencil_halfwidth must be >= nu")
        if self.richardson_levels < 2:
            problems.append("richardson_levels must be >= 2")
        if not self.stencil_dt > 0 or self.substeps < 1:
            problems.append("stencil_dt must be positive and substeps >= 1")
        if problems:
            raise ConfigurationError(problems)
        object.__setattr__(self, "x_eval", tuple(float(x) for x in self.x_eval))


@dataclass(frozen=True, eq=False)
class WernerReport:
    x1: np.ndarray
    profiles: Tuple[np.ndarray, np.ndarray]  # d^nu rho1 / dt^nu at t=0 for each kappa2
    dependence: float
    noise_floor: float
    verdict: str
    errors: Tuple[float, float]


def marginal_time_derivative(state0: GaussianState, coeffs, masses: Masses, kappa1: float, kappa2: float,
                             x1, nu: int, stencil_dt: float, halfwidth: int, levels: int,
                             substeps: int) -> Extrapolation:
    """Richardson-extrapolated ``d^nu rho1(x1, t) / dt^nu`` at t=0 along the ODE flow."""
    x1 = np.asarray(x1, dtype=float)

    def sample(times):
        h = float(np.max(np.abs(times))) / (len(times) // 2) / substeps
        rows = {}
        for sign in (1.0, -1.0):
            ts = sorted({float(t) for t in times if t * sign > 0}, key=abs)
            if not ts:
                continue
            _, states = evolve_gaussian(state0, coeffs, masses, kappa1, kappa2, h, ts[-1], times=ts)
            rows.update({t: marginal_values(s, x1) for t, s in zip(ts, states)})
        rows[0.0] = marginal_values(state0, x1)
        return np.array([rows[float(t)] for t in times])

    return time_derivative(sample, nu, stencil_dt, halfwidth, levels)


def _pair_dependence(config: WernerConfig, state0, coeffs):
    res = [
        marginal_time_derivative(state0, coeffs, config.masses, config.kappa1, k2, config.x_eval,
                                 config.nu, config.stencil_dt, config.stencil_halfwidth,
                                 config.richardson_levels, config.substeps)
        for k2 in config.kappa2_pair
    ]
    delta = float(np.max(np.abs(res[0].value - res[1].value)))
    return res, delta


def werner_noise_floor(config: WernerConfig, state0: GaussianState) -> float:
    """Observed kappa2-dependence of the linear theory under identical numerics, times three."""
    _, delta = _pair_dependence(config, state0, Linear())
    return 3.0 * delta


def werner_test(config: WernerConfig, state0: GaussianState, noise_floor: float = None) -> WernerReport:
    """Does ``d^nu rho1 / dt^nu`` at t=0 change between the two kappa2 values?"""
    if not state0.entangled:
        raise ConfigurationError("Werner test needs an entangled state (b != 0)")
    res, delta = _pair_dependence(config, state0, config.coeffs)
    eta = werner_noise_floor(config, state0) if noise_floor is None else noise_floor
    return WernerReport(
        x1=np.asarray(config.x_eval),
        profiles=(res[0].value, res[1].value),
        dependence=delta,
        noise_floor=eta,
        verdict=classify(delta, eta),
        errors=(res[0].error, res[1].error),
    )

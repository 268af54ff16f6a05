"""Density, current and the real nonlinear functionals R[psi].

The Doebner-Goldin family is built from five terms over the joint gradient
``(d/dx1, d/dx2)``::

    R1 = div J / rho          R2 = lap rho / rho       R3 = J.J / rho^2
    R4 = J.grad rho / rho^2   R5 = grad rho.grad rho / rho^2

with ``J = Im(conj(psi) grad psi)`` (no mass factor).  ``R1minus4`` is the
Laplacian of the phase, ``Im(conj(psi) lap psi)/rho - 2 Re(conj(psi) grad psi).J/rho^2``.
``BBM`` is ``-ln rho``.  Divisions use the floored density
``rho + eps_rel * max(rho)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, SingularityError
from .field import PairField, PairGrid, gradient_multipliers, partial

TAGS = ("R1", "R2", "R3", "R4", "R5", "R1minus4")
BBM_TAG = "BBM"


@dataclass(frozen=True)
class DGCoefficients:
    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    c4: float = 0.0
    c5: float = 0.0

    def __post_init__(self):
        bad = [f"c{i}" for i, c in enumerate(self.as_tuple(), 1) if not np.isfinite(c)]
        if bad:
            raise ConfigurationError([f"{name} must be finite" for name in bad])

    def as_tuple(self):
        return (self.c1, self.c2, self.c3, self.c4, self.c5)

    @property
    def galilei_covariant(self) -> bool:
        return self.c3 == 0 and self.c1 + self.c4 == 0


@dataclass(frozen=True)
class Linear:
    def terms(self):
        return ()


@dataclass(frozen=True)
class BBM:
    """Logarithmic nonlinearity ``R = -strength * ln rho``."""

    strength: float = 1.0

    def terms(self):
        return ((BBM_TAG, float(self.strength)),)


@dataclass(frozen=True)
class DG:
    coeffs: DGCoefficients

    def terms(self):
        return tuple((f"R{i}", float(c)) for i, c in enumerate(self.coeffs.as_tuple(), 1) if c != 0)


@dataclass(frozen=True)
class Single:
    tag: str
    weight: float = 1.0

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ConfigurationError(f"tag must be one of {TAGS}, got {self.tag!r}")
        if not np.isfinite(self.weight):
            raise ConfigurationError("weight must be finite")

    def terms(self):
        return ((self.tag, float(self.weight)),)


FunctionalKind = Union[Linear, BBM, DG, Single]


def divides_by_density(kind) -> bool:
    return isinstance(kind, (DG, Single)) and bool(kind.terms())


@dataclass(frozen=True)
class Regularization:
    eps_rel: float = 1e-12

    def __post_init__(self):
        if not (0 < self.eps_rel <= 1e-6):
            raise ConfigurationError(f"eps_rel must lie in (0, 1e-6], got {self.eps_rel}")

    def floor(self, rho):
        return rho + self.eps_rel * np.max(rho)


DEFAULT_REG = Regularization()


def _values(psi):
    return psi.values if isinstance(psi, PairField) else np.asarray(psi)


def density_and_current(psi: PairField):
    """Return ``(rho, J1, J2)`` with ``J = Im(conj(psi) grad psi)``."""
    v = psi.values
    grid = psi.grid
    rho = np.abs(v) ** 2
    j1 = np.imag(np.conj(v) * partial(v, grid, 1))
    j2 = np.imag(np.conj(v) * partial(v, grid, 2))
    return rho, j1, j2


class _Derivs:
    """Lazily computed spatial derivatives of one field, shared across terms."""

    def __init__(self, values, grid: PairGrid, reg: Regularization, spectrum=None):
        self.v = values
        self.grid = grid
        self.reg = reg
        self._cache = {} if spectrum is None else {"spectrum": spectrum}

    def get(self, name):
        if name not in self._cache:
            self._cache[name] = getattr(self, "_" + name)()
        return self._cache[name]

    def _rho(self):
        return np.abs(self.v) ** 2

    def _rho_reg(self):
        return self.reg.floor(self.get("rho"))

    # one forward transform of psi serves every derivative
    def _spectrum(self):
        return sfft.fft2(self.v)

    def _dpsi(self):
        m1, m2, _ = gradient_multipliers(self.grid)
        s = self.get("spectrum")
        return sfft.ifft2(m1 * s), sfft.ifft2(m2 * s)

    def _current(self):
        d1, d2 = self.get("dpsi")
        c = np.conj(self.v)
        return np.imag(c * d1), np.imag(c * d2)

    # Density derivatives go through psi by the product rule.  A spectral
    # derivative of rho itself carries roundoff ~ eps * max|rho''| everywhere,
    # which the floor turns into O(1e-4) noise in the tails; the product forms
    # carry roundoff ~ eps * |psi| and stay quiet where psi is small.

    def _grad_rho(self):
        d1, d2 = self.get("dpsi")
        c = np.conj(self.v)
        return 2.0 * np.real(c * d1), 2.0 * np.real(c * d2)

    def _lap_rho(self):
        d1, d2 = self.get("dpsi")
        return 2.0 * np.real(np.conj(self.v) * self.get("lap_psi")) + 2.0 * (np.abs(d1) ** 2 + np.abs(d2) ** 2)

    def _div_current(self):
        return np.imag(np.conj(self.v) * self.get("lap_psi"))

    def _lap_psi(self):
        return sfft.ifft2(gradient_multipliers(self.grid)[2] * self.get("spectrum"))


def _term(tag, d: _Derivs):
    rr = d.get("rho_reg")
    if tag == "R1":
        return d.get("div_current") / rr
    if tag == "R2":
        return d.get("lap_rho") / rr
    if tag == "R3":
        j1, j2 = d.get("current")
        return (j1**2 + j2**2) / rr**2
    if tag == "R4":
        j1, j2 = d.get("current")
        g1, g2 = d.get("grad_rho")
        return (j1 * g1 + j2 * g2) / rr**2
    if tag == "R5":
        g1, g2 = d.get("grad_rho")
        return (g1**2 + g2**2) / rr**2
    if tag == "R1minus4":
        c = np.conj(d.v)
        d1, d2 = d.get("dpsi")
        a1, a2 = c * d1, c * d2
        cross = 2.0 * (a1.real * a1.imag + a2.real * a2.imag)
        return np.imag(c * d.get("lap_psi")) / rr - cross / rr**2
    if tag == BBM_TAG:
        return -np.log(rr)
    raise ValueError(f"unknown functional tag {tag!r}")


def evaluate_R(kind, psi: PairField, reg: Regularization = DEFAULT_REG, spectrum=None) -> np.ndarray:
    """Real functional ``R[psi]`` as an ``(N1, N2)`` array; ``spectrum`` is an optional precomputed ``fft2(psi)``."""
    d = _Derivs(psi.values, psi.grid, reg, spectrum)
    out = np.zeros(psi.grid.shape)
    for tag, weight in kind.terms():
        with np.errstate(divide="ignore", invalid="ignore"):
            term = _term(tag, d)
        if not np.all(np.isfinite(term)):
            raise SingularityError(f"term {tag} is not finite; the density vanishes where it is divided by")
        out += weight * term
    return out


def evaluate_F(kind, psi: PairField, reg: Regularization = DEFAULT_REG) -> PairField:
    """Nonlinear term ``F = R[psi] * psi``."""
    return psi.with_values(evaluate_R(kind, psi, reg) * psi.values)

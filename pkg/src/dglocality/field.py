"""Periodic two-particle grids, spectral derivatives and quadrature.

One spatial dimension per particle: ``values[i, j]`` is the wavefunction at
``(x1[i], x2[j])``.  All derivatives are Fourier-spectral along one axis and
all integrals use the rectangle rule, which is spectrally accurate for smooth
data that is negligible near the periodic wrap.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError

MIN_POINTS = 16


@dataclass(frozen=True)
class Axis:
    half_length: float
    points: int

    def __post_init__(self):
        problems = []
        if not (np.isfinite(self.half_length) and self.half_length > 0):
            problems.append(f"half_length must be positive, got {self.half_length}")
        if int(self.points) != self.points or self.points < MIN_POINTS or self.points % 2:
            problems.append(f"points must be an even integer >= {MIN_POINTS}, got {self.points}")
        if problems:
            raise ConfigurationError(problems)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.points

    @property
    def nodes(self) -> np.ndarray:
        return -self.half_length + self.spacing * np.arange(self.points)

    @property
    def wavenumbers(self) -> np.ndarray:
        return _wavenumbers(self.half_length, self.points)


@lru_cache(maxsize=64)
def _wavenumbers(half_length, points):
    return 2.0 * np.pi * np.fft.fftfreq(points, d=2.0 * half_length / points)


@dataclass(frozen=True)
class PairGrid:
    axis1: Axis
    axis2: Axis

    @property
    def shape(self):
        return (self.axis1.points, self.axis2.points)

    @property
    def cell(self) -> float:
        return self.axis1.spacing * self.axis2.spacing

    def mesh(self):
        """Coordinate arrays ``(X1, X2)`` of shape ``(N1, N2)``."""
        return np.meshgrid(self.axis1.nodes, self.axis2.nodes, indexing="ij")

    def axis(self, which: int) -> Axis:
        if which == 1:
            return self.axis1
        if which == 2:
            return self.axis2
        raise ValueError(f"axis must be 1 or 2, got {which}")


@dataclass(frozen=True, eq=False)
class PairField:
    grid: PairGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("PairField values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def with_values(self, values) -> "PairField":
        return PairField(self.grid, values)


@dataclass(frozen=True, eq=False)
class MarginalField:
    axis: Axis
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.axis.points,):
            raise ValueError(f"values shape {values.shape} does not match axis of {self.axis.points} points")
        if not np.all(np.isfinite(values)):
            raise ValueError("MarginalField values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


def make_grid(L1, N1, L2, N2) -> PairGrid:
    """Uniform periodic grid with nodes ``-L + i*h``, ``h = 2L/N``."""
    problems = []
    axes = []
    for name, (L, N) in (("axis1", (L1, N1)), ("axis2", (L2, N2))):
        try:
            axes.append(Axis(float(L), int(N) if float(N).is_integer() else N))
        except ConfigurationError as err:
            problems.extend(f"{name}.{p}" for p in err.problems)
    if problems:
        raise ConfigurationError(problems)
    return PairGrid(*axes)


def _multiplier(k, order):
    m = (1j * k) ** order
    if order % 2 and len(k) % 2 == 0:
        # odd derivatives of the Nyquist mode are not representable
        m = m.copy()
        m[len(k) // 2] = 0.0
    return m


@lru_cache(maxsize=64)
def _multiplier_cached(half_length, points, order, real):
    h = 2.0 * half_length / points
    if real:
        k = 2.0 * np.pi * np.fft.rfftfreq(points, d=h)
        m = (1j * k) ** order
        if order % 2:
            m[-1] = 0.0
        return m
    return _multiplier(Axis(half_length, points).wavenumbers, order)


def partial(values, grid: PairGrid, axis: int, order: int = 1) -> np.ndarray:
    """Array-level spectral derivative along ``axis`` (1 or 2).

    Real input gives real output.
    """
    values = np.asarray(values)
    a = grid.axis(axis)
    ax = axis - 1
    real = np.isrealobj(values)
    m = _multiplier_cached(a.half_length, a.points, order, real)
    shape = [1, 1]
    shape[ax] = -1
    m = m.reshape(shape)
    if real:
        return sfft.irfft(sfft.rfft(values, axis=ax) * m, n=a.points, axis=ax)
    return sfft.ifft(sfft.fft(values, axis=ax) * m, axis=ax)


@lru_cache(maxsize=16)
def gradient_multipliers(grid: PairGrid):
    """Broadcastable ``(i k1, i k2, -|k|^2)`` for full complex 2D transforms; Nyquist zeroed in the odd ones."""
    a1, a2 = grid.axis1, grid.axis2
    m1 = _multiplier_cached(a1.half_length, a1.points, 1, False)[:, None]
    m2 = _multiplier_cached(a2.half_length, a2.points, 1, False)[None, :]
    lap = -(a1.wavenumbers[:, None] ** 2 + a2.wavenumbers[None, :] ** 2)
    for m in (m1, m2, lap):
        m.flags.writeable = False  # shared through the cache
    return m1, m2, lap


def laplacian(values, grid: PairGrid) -> np.ndarray:
    """Joint Laplacian over both coordinates."""
    values = np.asarray(values)
    k1 = grid.axis1.wavenumbers[:, None]
    if np.isrealobj(values):
        k2 = 2.0 * np.pi * np.fft.rfftfreq(grid.axis2.points, d=grid.axis2.spacing)[None, :]
        return sfft.irfft2(sfft.rfft2(values) * -(k1**2 + k2**2), s=grid.shape)
    k2 = grid.axis2.wavenumbers[None, :]
    return sfft.ifft2(sfft.fft2(values) * -(k1**2 + k2**2))


def spectral_partial(f: PairField, axis: int, order: int = 1) -> PairField:
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    return f.with_values(partial(f.values, f.grid, axis, order))


def integrate_axis2(f) -> np.ndarray:
    """Rectangle rule ``h2 * sum_j f(., x2_j)``; accepts a PairField or ``(grid, array)``."""
    if isinstance(f, PairField):
        return f.grid.axis2.spacing * f.values.sum(axis=1)
    grid, values = f
    return grid.axis2.spacing * np.asarray(values).sum(axis=1)


def norm_sq(f: PairField) -> float:
    return float(f.grid.cell * np.sum(np.abs(f.values) ** 2))


def tail_mass(f: PairField, band: float = 0.1) -> float:
    """Fraction of the norm carried within ``band * L`` of the periodic wrap on either axis."""
    rho = np.abs(f.values) ** 2
    total = rho.sum()
    if total == 0:
        return 0.0
    x1, x2 = f.grid.mesh()
    outer = (np.abs(x1) > (1 - band) * f.grid.axis1.half_length) | (
        np.abs(x2) > (1 - band) * f.grid.axis2.half_length
    )
    return float(rho[outer].sum() / total)


def bump_profile(center: float, width: float):
    """Smooth compactly supported profile ``exp(-1/(1-u^2))``, ``u = (x-center)/width``."""
    if not width > 0:
        raise ConfigurationError(f"width must be positive, got {width}")

    def bump(x):
        u = (np.asarray(x, dtype=float) - center) / width
        out = np.zeros_like(u)
        inside = np.abs(u) < 1
        out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
        return out if out.ndim else float(out)

    return bump

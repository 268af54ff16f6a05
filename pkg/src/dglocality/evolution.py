"""Method-of-lines RK4 integration of the two-particle nonlinear equation

    i d/dt psi = [-(1/2m1) d1^2 - (1/2m2) d2^2 + V1(x1) + V2(x2) + R[psi]] psi

on the periodic pair grid, together with the potentials and the audits
(norm drift, tail mass, nodelessness) that guard every run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np
import scipy.fft as sfft

from .errors import AccuracyError, ConfigurationError, SingularityError
from .field import Axis, PairField, PairGrid, norm_sq, tail_mass
from .nonlinearity import DEFAULT_REG, Linear, Regularization, divides_by_density, evaluate_R


# ---------------------------------------------------------------------------
# potentials


def _smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class Zero:
    def __call__(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def shifted(self, delta):
        return self

    def support(self):
        return None


@dataclass(frozen=True)
class Harmonic:
    """``kappa * (x - center)^2``."""

    kappa: float
    center: float = 0.0

    def __call__(self, x):
        return self.kappa * (np.asarray(x, dtype=float) - self.center) ** 2

    def shifted(self, delta):
        return Harmonic(self.kappa, self.center + delta)

    def support(self):
        return (-np.inf, np.inf)


@dataclass(frozen=True)
class LinearWindow:
    """``g * x`` on ``window``, tapered smoothly to zero over ``taper`` on either side."""

    g: float
    window: Tuple[float, float]
    taper: float = 1.0

    def __post_init__(self):
        a, b = self.window
        problems = []
        if not a < b:
            problems.append(f"window must be nonempty, got {self.window}")
        if not self.taper > 0:
            problems.append(f"taper must be positive, got {self.taper}")
        if problems:
            raise ConfigurationError(problems)
        object.__setattr__(self, "window", (float(a), float(b)))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.window
        envelope = _smooth_step((x - (a - self.taper)) / self.taper) * _smooth_step(
            ((b + self.taper) - x) / self.taper
        )
        return self.g * x * envelope

    def shifted(self, delta):
        raise ValueError("LinearWindow is pinned to the origin and cannot be translated")

    def support(self):
        a, b = self.window
        return (a - self.taper, b + self.taper)


@dataclass(frozen=True)
class Bump:
    """``amplitude * exp(-1/(1-u^2))`` with ``u = (x-center)/width``; peak value ``amplitude/e``."""

    amplitude: float
    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ConfigurationError(f"width must be positive, got {self.width}")

    def __call__(self, x):
        u = (np.asarray(x, dtype=float) - self.center) / self.width
        out = np.zeros_like(u)
        inside = np.abs(u) < 1
        out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
        return self.amplitude * out

    def shifted(self, delta):
        return Bump(self.amplitude, self.center + delta, self.width)

    def support(self):
        return (self.center - self.width, self.center + self.width)


@dataclass(frozen=True)
class Sum:
    terms: Tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def __call__(self, x):
        out = np.zeros_like(np.asarray(x, dtype=float))
        for t in self.terms:
            out = out + t(x)
        return out

    def shifted(self, delta):
        return Sum(tuple(t.shifted(delta) for t in self.terms))

    def support(self):
        sups = [t.support() for t in self.terms]
        sups = [s for s in sups if s is not None]
        if not sups:
            return None
        return (min(s[0] for s in sups), max(s[1] for s in sups))


def add_potentials(base, extra):
    if isinstance(base, Zero):
        return extra
    if isinstance(extra, Zero):
        return base
    return Sum((base, extra))


def realize(potential, axis: Axis) -> np.ndarray:
    """Tabulate ``potential`` on ``axis``; localized potentials must fit inside the periodic cell."""
    sup = potential.support()
    if sup is not None and np.all(np.isfinite(sup)):
        if sup[0] < -axis.half_length or sup[1] > axis.half_length:
            raise ConfigurationError(
                f"potential support {sup} leaves the periodic cell [-{axis.half_length}, {axis.half_length})"
            )
    return potential(axis.nodes)


@dataclass(frozen=True)
class Masses:
    m1: float = 1.0
    m2: float = 1.0

    def __post_init__(self):
        bad = [n for n, m in (("m1", self.m1), ("m2", self.m2)) if not (np.isfinite(m) and m > 0)]
        if bad:
            raise ConfigurationError([f"{n} must be positive and finite" for n in bad])


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    t_final: float
    kind: object = field(default_factory=Linear)
    reg: Regularization = DEFAULT_REG
    norm_tol: float = 1e-8
    tail_tol: float = 1e-12
    dealias: bool = True

    def __post_init__(self):
        problems = []
        if not (np.isfinite(self.dt) and self.dt > 0):
            problems.append(f"dt must be positive, got {self.dt}")
        if not np.isfinite(self.t_final):
            problems.append("t_final must be finite")
        if not self.norm_tol > 0:
            problems.append("norm_tol must be positive")
        if problems:
            raise ConfigurationError(problems)


def stability_dt(grid: PairGrid, masses: Masses) -> float:
    """Heuristic explicit step bound ``h^2 min(m) / pi^2``."""
    h = min(grid.axis1.spacing, grid.axis2.spacing)
    return h**2 * min(masses.m1, masses.m2) / math.pi**2


# ---------------------------------------------------------------------------
# right-hand side


def dealias_mask(grid: PairGrid) -> np.ndarray:
    """Two-thirds rule: keep modes with ``|k| < 2/3 k_max`` on both axes."""
    keep = []
    for ax in (grid.axis1, grid.axis2):
        k = np.abs(ax.wavenumbers)
        keep.append(k < (2.0 / 3.0) * k.max())
    return keep[0][:, None] & keep[1][None, :]


class _System:
    def __init__(self, grid, v1, v2, masses, kind, reg, dealias=True):
        self.grid = grid
        self.kind = kind
        self.reg = reg
        k1 = grid.axis1.wavenumbers[:, None]
        k2 = grid.axis2.wavenumbers[None, :]
        self.kinetic = k1**2 / (2 * masses.m1) + k2**2 / (2 * masses.m2)
        self.potential = realize(v1, grid.axis1)[:, None] + realize(v2, grid.axis2)[None, :]
        self.nonlinear = bool(kind.terms())
        self.mask = dealias_mask(grid) if dealias else None

    def __call__(self, values):
        spec = sfft.fft2(values)
        h_hat = self.kinetic * spec
        h_psi = self.potential * values
        if self.nonlinear:
            f = evaluate_R(self.kind, PairField(self.grid, values), self.reg, spectrum=spec) * values
            if self.mask is not None:
                # the density floor makes R*psi rough in the far tails; without this
                # the grid-scale content it injects is amplified without bound
                h_hat = h_hat + self.mask * sfft.fft2(f)
            else:
                h_psi = h_psi + f
        return -1j * (sfft.ifft2(h_hat) + h_psi)


def rhs(psi: PairField, v1, v2, masses: Masses, kind, reg: Regularization = DEFAULT_REG,
        dealias: bool = True) -> PairField:
    """Time derivative ``-i (H psi + F(psi))``; ``dealias`` low-pass filters ``F``."""
    return psi.with_values(_System(psi.grid, v1, v2, masses, kind, reg, dealias)(psi.values))


def _rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


# ---------------------------------------------------------------------------
# audits


def check_nodeless(phi: PairField, support_frac: float = 1e-10, floor: float = 1e-6) -> None:
    """Raise ``SingularityError`` if ``phi`` has nodes inside its effective support.

    The effective support is the row/column hull of ``|phi|^2 >= support_frac * max``.
    Inside it ``|phi|`` must exceed ``floor * max|phi|`` and the phase may not jump by
    more than pi/2 between neighbouring nodes (a sign change or a vortex).
    """
    v = phi.values
    amp = np.abs(v)
    rho = amp**2
    mask = rho >= support_frac * rho.max()

    def hull(m, axis):
        idx = np.arange(m.shape[axis])
        shape = [1, 1]
        shape[axis] = -1
        idx = idx.reshape(shape)
        big = m.shape[axis]
        first = np.where(m, idx, big).min(axis=axis, keepdims=True)
        last = np.where(m, idx, -1).max(axis=axis, keepdims=True)
        return (idx >= first) & (idx <= last)

    region = hull(mask, 0) & hull(mask, 1)
    if not region.any():
        raise SingularityError("field has no effective support")
    if amp[region].min() <= floor * amp.max():
        raise SingularityError("field has a node inside its effective support")
    for ax in (0, 1):
        jump = np.abs(np.angle(np.roll(v, -1, axis=ax) * np.conj(v)))
        both = region & np.roll(region, -1, axis=ax)
        if both.any() and jump[both].max() > np.pi / 2:
            raise SingularityError("phase jumps by more than pi/2 between neighbours: node or unresolved phase")


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    fields: Tuple[PairField, ...]

    def __len__(self):
        return len(self.fields)

    @property
    def final(self) -> PairField:
        return self.fields[-1]


def norm_drift(trajectory: Trajectory) -> float:
    """``max_t | |psi_t|^2 - |psi_0|^2 | / |psi_0|^2``."""
    if len(trajectory) == 0:
        raise ValueError("trajectory is empty")
    norms = np.array([norm_sq(f) for f in trajectory.fields])
    return float(np.max(np.abs(norms - norms[0])) / norms[0])


# ---------------------------------------------------------------------------
# integration


def evolve(phi: PairField, v1, v2, masses: Masses, config: EvolutionConfig,
           times: Sequence[float] = None, check: bool = True) -> Trajectory:
    """Integrate from ``phi`` at t=0 and sample at ``times`` (default ``[0, t_final]``).

    All sample times must share the sign of ``t_final``; negative times integrate
    backwards.  Between samples the step is the largest value ``<= config.dt`` that
    lands exactly on the next sample.
    """
    if times is None:
        times = [0.0, config.t_final]
    times = np.asarray(sorted(times, key=abs), dtype=float)
    if np.any(times * np.sign(config.t_final) < 0) or np.any(np.abs(times) > abs(config.t_final) * (1 + 1e-12)):
        raise ConfigurationError("sample times must lie between 0 and t_final")
    if check:
        tm = tail_mass(phi)
        if tm > config.tail_tol:
            raise ConfigurationError(f"initial tail mass {tm:.3e} exceeds {config.tail_tol:.1e}; enlarge the domain")
        if divides_by_density(config.kind):
            check_nodeless(phi)

    system = _System(phi.grid, v1, v2, masses, config.kind, config.reg, config.dealias)
    y = np.array(phi.values)
    t = 0.0
    out = []
    for target in times:
        span = target - t
        n = int(math.ceil(abs(span) / config.dt - 1e-9)) if span != 0 else 0
        for _ in range(n):
            y = _rk4_step(system, y, span / n)
        t = target
        if not np.all(np.isfinite(y)):
            raise SingularityError(f"non-finite field at t={t:g}")
        out.append(PairField(phi.grid, y.copy()))
    traj = Trajectory(times, tuple(out))

    if check:
        drift = norm_drift(Trajectory(np.concatenate([[0.0], times]), (phi,) + traj.fields))
        if drift > config.norm_tol:
            raise AccuracyError(f"norm drift {drift:.3e} exceeds {config.norm_tol:.1e}; reduce dt (now {config.dt:g})")
        tm = tail_mass(traj.final)
        if tm > config.tail_tol:
            raise AccuracyError(f"tail mass {tm:.3e} at t={times[-1]:g}: the wavefunction reached the periodic wrap")
    return traj


def select_dt(phi: PairField, v1, v2, masses: Masses, kind, t_final: float,
              reg: Regularization = DEFAULT_REG, norm_tol: float = 1e-8,
              rel_tol: float = 1e-8, max_halvings: int = 12) -> float:
    """Start from the stability heuristic and halve until the norm audit and a
    Richardson self-consistency check (``|psi_dt - psi_dt/2| / 15``) both pass."""
    dt = min(stability_dt(phi.grid, masses), abs(t_final))
    scale = np.abs(phi.values).max()
    for _ in range(max_halvings):
        try:
            a = evolve(phi, v1, v2, masses, EvolutionConfig(dt, t_final, kind, reg, norm_tol)).final
            b = evolve(phi, v1, v2, masses, EvolutionConfig(dt / 2, t_final, kind, reg, norm_tol)).final
        except AccuracyError:
            dt /= 2
            continue
        if np.abs(a.values - b.values).max() / 15 <= rel_tol * scale:
            return dt
        dt /= 2
    raise AccuracyError("no time step passed the norm and Richardson checks")

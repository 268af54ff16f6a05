"""Central finite-difference stencils in time and Richardson extrapolation."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .errors import AccuracyError

INDEPENDENT = "independent"
DEPENDENT = "dependent"
INCONCLUSIVE = "inconclusive"


def central_weights(nu: int, halfwidth: int) -> np.ndarray:
    """Weights ``w_k``, ``k = -K..K``, with ``sum w_k f(k h) / h^nu -> f^(nu)(0)``.

    Solved exactly in rationals from the moment conditions.
    """
    if halfwidth < 1 or 2 * halfwidth + 1 < nu + 1:
        raise ValueError(f"halfwidth {halfwidth} too small for derivative order {nu}")
    ks = list(range(-halfwidth, halfwidth + 1))
    n = len(ks)
    a = [[Fraction(k) ** m for k in ks] for m in range(n)]
    b = [Fraction(factorial(nu)) if m == nu else Fraction(0) for m in range(n)]
    # Gauss-Jordan on the (exactly invertible) Vandermonde system
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        b[col], b[piv] = b[piv], b[col]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                b[r] -= f * b[col]
    return np.array([float(b[i] / a[i][i]) for i in range(n)])


def accuracy_order(nu: int, halfwidth: int) -> int:
    """Leading truncation power of the central stencil."""
    w = central_weights(nu, halfwidth)
    ks = np.arange(-halfwidth, halfwidth + 1, dtype=float)
    m = nu + 1
    while abs(np.dot(w, ks**m)) < 1e-9 * factorial(m):
        m += 1
    return m - nu


@dataclass(frozen=True, eq=False)
class Extrapolation:
    value: np.ndarray
    error: float
    levels: tuple  # raw stencil estimates, coarsest first
    steps: tuple


def richardson(estimates, steps, first_power: int, noise: float = 0.0) -> Extrapolation:
    """Extrapolate ``estimates[l]`` (taken at ``steps[l] = steps[0] / 2**l``) to step zero.

    The error expansion is assumed to hold powers ``first_power, first_power + 2, ...``.
    ``error`` is the size of the last correction.  Raises ``AccuracyError`` if the
    corrections grow and exceed ``noise``.
    """
    estimates = [np.asarray(e, dtype=float) for e in estimates]
    n = len(estimates)
    if n < 2:
        raise ValueError("need at least two levels")
    ratios = [steps[i] / steps[i + 1] for i in range(n - 1)]
    if not np.allclose(ratios, 2.0):
        raise ValueError("steps must halve from level to level")
    table = [[e] for e in estimates]
    for j in range(1, n):
        factor = 2.0 ** (first_power + 2 * (j - 1))
        for row in range(j, n):
            prev, lower = table[row][j - 1], table[row - 1][j - 1]
            table[row].append(prev + (prev - lower) / (factor - 1.0))
    diag = [table[i][i] for i in range(n)]
    corrections = [float(np.max(np.abs(diag[i] - diag[i - 1]))) for i in range(1, n)]
    err = corrections[-1]
    if len(corrections) >= 2 and err > corrections[-2] and err > noise:
        raise AccuracyError(
            f"Richardson sequence is not converging (corrections {corrections}, noise allowance {noise:.2e})"
        )
    return Extrapolation(diag[-1], err, tuple(estimates), tuple(steps))


def roundoff_allowance(scale: float, nu: int, halfwidth: int, step: float) -> float:
    """Size of the derivative estimate produced by relative roundoff in samples of size ``scale``."""
    w = central_weights(nu, halfwidth)
    return 64 * np.finfo(float).eps * scale * float(np.abs(w).sum()) / step**nu


def time_derivative(sample, nu: int, step: float, halfwidth: int, levels: int) -> Extrapolation:
    """nu-th derivative at t=0 of ``sample(times) -> array (len(times), ...)``.

    Symmetric stencils at ``k * h``, ``k = -K..K``, for ``h = step / 2**l``, then
    Richardson extrapolation across the levels.
    """
    w = central_weights(nu, halfwidth)
    p = accuracy_order(nu, halfwidth)
    ks = np.arange(-halfwidth, halfwidth + 1)
    steps = [step / 2**l for l in range(levels)]
    estimates = []
    scale = 0.0
    for h in steps:
        samples = np.asarray(sample(ks * h))
        scale = max(scale, float(np.max(np.abs(samples))))
        estimates.append(np.tensordot(w, samples, axes=(0, 0)) / h**nu)
    noise = roundoff_allowance(scale, nu, halfwidth, steps[-1])
    return richardson(estimates, steps, p, noise)


def classify(delta: float, noise_floor: float) -> str:
    """Three-way verdict: dependent above 10x the floor, independent below 2x."""
    if delta > 10 * noise_floor:
        return DEPENDENT
    if delta < 2 * noise_floor:
        return INDEPENDENT
    return INCONCLUSIVE

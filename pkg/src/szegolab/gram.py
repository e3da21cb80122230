"""Gram coefficients of integrated-increment covariances and their Toeplitz /
circulant matrix views.

For a sampling grid with horizon T, n cells and step h = T/n, the cell
increments of the integrated input have normalized covariances

    gamma_l = (1/h) * integral_0^h integral_{l h}^{(l+1) h} R(v - u) dv du
            = (1/h) * integral R(tau) * (h - |tau - l h|)_+ dtau,

an even sequence (gamma_{-l} = gamma_l) by the symmetry of R.  The n x n
Toeplitz matrix A(i, j) = gamma_{|i-j|} is the Gram matrix of the increments
divided by h; its circulant companion has first row

    gammaHat_0 = gamma_0,   gammaHat_l = gamma_l + gamma_{n-l}   (1 <= l < n),

which satisfies the wrap symmetry gammaHat_l = gammaHat_{n-l} and therefore
has a real spectrum.

Coefficients are computed from closed forms for every built-in model; an
adaptive Gauss-Legendre fallback on the exactly reduced one-dimensional form
is available for cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz as _toeplitz
from scipy.special import erf

from .errors import QuadratureFailure
from .models import ModelKind, SpectralModel

__all__ = [
    "SamplingGrid",
    "GramSequence",
    "gamma_sequence",
    "toeplitz_matrix",
    "circulant_matrix",
]


@dataclass(frozen=True)
class SamplingGrid:
    """Even sampling of [0, T] into n cells; step h = T/n, times t_i = i*h."""

    T: float
    n: int

    def __post_init__(self) -> None:
        T = float(self.T)
        if not math.isfinite(T) or T <= 0.0:
            raise ValueError(f"T must be finite and > 0, got {self.T!r}")
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool) or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return self.T / self.n

    def times(self) -> np.ndarray:
        """Sampling times t_0 = 0, ..., t_n = T (n + 1 points)."""
        return np.arange(self.n + 1) * (self.T / self.n)


def _wrap(gamma: np.ndarray) -> np.ndarray:
    """First row of the circulant companion: gamma_l + gamma_{n-l}."""
    hat = gamma.copy()
    if gamma.size > 1:
        hat[1:] = gamma[1:] + gamma[:0:-1]
    return hat


@dataclass(frozen=True)
class GramSequence:
    """Coefficients gamma_0..gamma_{n-1} and their circulant wrap."""

    grid: SamplingGrid
    gamma: np.ndarray
    gamma_hat: np.ndarray

    def __post_init__(self) -> None:
        gamma = np.asarray(self.gamma, dtype=float)
        hat = np.asarray(self.gamma_hat, dtype=float)
        n = self.grid.n
        if gamma.shape != (n,) or hat.shape != (n,):
            raise ValueError(
                f"coefficient vectors must have shape ({n},), got {gamma.shape} and {hat.shape}"
            )
        if not (np.all(np.isfinite(gamma)) and np.all(np.isfinite(hat))):
            raise ValueError("coefficients must be finite")
        expected = _wrap(gamma)
        if not np.array_equal(hat, expected):
            raise ValueError("gamma_hat does not equal the circulant wrap of gamma")
        for a in (gamma, hat):
            a.flags.writeable = False
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "gamma_hat", hat)


# --------------------------------------------------------------------------
# closed-form coefficient evaluation
# --------------------------------------------------------------------------
def _gamma_exponential(power: float, rate: float, grid: SamplingGrid) -> np.ndarray:
    h, n = grid.h, grid.n
    a = rate * h
    out = np.empty(n)
    # (1/h) * double integral of P*exp(-rate*|u-v|) over the diagonal cell:
    # 2P*(a - 1 + e^{-a}) / (h*rate^2), written with expm1 to avoid
    # cancellation for small a.
    out[0] = 2.0 * power * (a + math.expm1(-a)) / (h * rate * rate)
    if n > 1:
        l = np.arange(1, n)
        factor = power * (4.0 * math.sinh(a / 2.0) ** 2) / (h * rate * rate)
        out[1:] = factor * np.exp(-a * l)
    return out


def _gamma_squared_exponential(power: float, width: float, grid: SamplingGrid) -> np.ndarray:
    h, n = grid.h, grid.n
    s = width
    l = np.arange(n, dtype=float)
    a0 = (l - 1.0) * h
    b0 = (l + 1.0) * h
    m = l * h
    rt2 = s * math.sqrt(2.0)

    def gauss_mass(a, b):
        # integral_a^b exp(-t^2 / (2 s^2)) dt
        return s * math.sqrt(math.pi / 2.0) * (erf(b / rt2) - erf(a / rt2))

    def gauss_moment(a, b):
        # integral_a^b t * exp(-t^2 / (2 s^2)) dt
        return s * s * (np.exp(-(a * a) / (2 * s * s)) - np.exp(-(b * b) / (2 * s * s)))

    # gamma_l = (1/h) * [ int_{a0}^{m} R(t)(t - a0) dt + int_{m}^{b0} R(t)(b0 - t) dt ]
    left = gauss_moment(a0, m) - a0 * gauss_mass(a0, m)
    right = b0 * gauss_mass(m, b0) - gauss_moment(m, b0)
    return power * (left + right) / h


_GL3_NODES, _GL3_WEIGHTS = np.polynomial.legendre.leggauss(3)


def _gamma_triangular(power: float, support: float, grid: SamplingGrid) -> np.ndarray:
    h, n = grid.h, grid.n
    tau0 = support
    out = np.zeros(n)
    for l in range(n):
        a0, m, b0 = (l - 1) * h, l * h, (l + 1) * h
        lo, hi = max(a0, -tau0), min(b0, tau0)
        if lo >= hi:
            continue  # cell entirely outside the autocorrelation support
        cuts = sorted({lo, hi} | {b for b in (-tau0, 0.0, tau0, m) if lo < b < hi})
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            # R and the triangular window are both piecewise linear on this
            # panel, so the product is a quadratic and 3-point Gauss-Legendre
            # integrates it exactly.
            t = 0.5 * (b - a) * (_GL3_NODES + 1.0) + a
            f = (1.0 - np.abs(t) / tau0) * (h - np.abs(t - m))
            total += 0.5 * (b - a) * float(np.dot(_GL3_WEIGHTS, f))
        out[l] = power * total / h
    return out


# --------------------------------------------------------------------------
# adaptive quadrature fallback (exactly reduced one-dimensional form)
# --------------------------------------------------------------------------
_GL16_NODES, _GL16_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _gl16(fun, a: float, b: float) -> float:
    t = 0.5 * (b - a) * (_GL16_NODES + 1.0) + a
    return 0.5 * (b - a) * float(np.dot(_GL16_WEIGHTS, fun(t)))


def _adaptive_panel(fun, a: float, b: float, eps_abs: float, max_panels: int) -> float:
    """Adaptive Gauss-Legendre with interval bisection and a panel budget."""
    stack = [(a, b, _gl16(fun, a, b), eps_abs)]
    total = 0.0
    used = 1
    while stack:
        lo, hi, coarse, eps = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _gl16(fun, lo, mid)
        right = _gl16(fun, mid, hi)
        used += 2
        if abs(left + right - coarse) <= eps or hi - lo <= 1e-15 * max(abs(lo), abs(hi), 1.0):
            total += left + right
            continue
        if used > max_panels:
            raise QuadratureFailure(
                f"cell quadrature budget of {max_panels} panels exhausted on "
                f"[{a:g}, {b:g}] before reaching {eps_abs:.1e} absolute accuracy"
            )
        stack.append((lo, mid, left, eps / 2.0))
        stack.append((mid, hi, right, eps / 2.0))
    return total


def _gamma_quadrature(model: SpectralModel, grid: SamplingGrid, max_panels: int) -> np.ndarray:
    h, n = grid.h, grid.n
    breakpoints = model.acf_breakpoints()
    out = np.empty(n)
    for l in range(n):
        a0, m, b0 = (l - 1) * h, l * h, (l + 1) * h
        cuts = sorted({a0, b0} | {b for b in (*breakpoints, m) if a0 < b < b0})

        def integrand(t):
            return model.acf(t) * (h - np.abs(t - m))

        # The double integral over the cell pair reduces exactly to this
        # one-dimensional overlap-weighted form; target 1e-10 absolute on
        # gamma_l means 1e-10 * h on the unnormalized integral.
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            total += _adaptive_panel(
                integrand, a, b, 1e-10 * h / (len(cuts) - 1), max_panels
            )
        out[l] = total / h
    return out


# --------------------------------------------------------------------------
# public operations
# --------------------------------------------------------------------------
def gamma_sequence(
    model: SpectralModel,
    grid: SamplingGrid,
    method: str = "closed",
    max_panels: int = 4096,
) -> GramSequence:
    """Build the Gram coefficient sequence for a model on a grid.

    ``method="closed"`` evaluates the per-model closed forms; ``"quadrature"``
    uses the adaptive Gauss-Legendre fallback (1e-10 absolute per coefficient,
    raising QuadratureFailure when the panel budget is exhausted).
    """
    if method not in ("closed", "quadrature"):
        raise ValueError(f"method must be 'closed' or 'quadrature', got {method!r}")
    if model.power == 0.0:
        gamma = np.zeros(grid.n)
    elif method == "quadrature":
        gamma = _gamma_quadrature(model, grid, max_panels)
    elif model.kind is ModelKind.ORNSTEIN_UHLENBECK:
        gamma = _gamma_exponential(model.power, model.scale, grid)
    elif model.kind is ModelKind.GAUSSIAN_KERNEL:
        gamma = _gamma_squared_exponential(model.power, model.scale, grid)
    else:
        gamma = _gamma_triangular(model.power, model.scale, grid)
    return GramSequence(grid=grid, gamma=gamma, gamma_hat=_wrap(gamma))


def toeplitz_matrix(gs: GramSequence) -> np.ndarray:
    """Dense symmetric Toeplitz matrix A(i, j) = gamma_{|i-j|}."""
    return _toeplitz(gs.gamma)


def circulant_matrix(gs: GramSequence) -> np.ndarray:
    """First row (gammaHat_0, ..., gammaHat_{n-1}) of the circulant companion."""
    return gs.gamma_hat.copy()

"""Basis-sum synthesis of the sine-/cosine-like solutions and the analytic references.

    chi_reg(r) = (2/sqrt(pi)) kr j_l(kr)      ~  (2/sqrt(pi)) sin(kr - l pi/2)
    chi_irr(r) = (2/sqrt(pi)) kr n_l(kr)      ~ -(2/sqrt(pi)) cos(kr - l pi/2)

``chi_sin = sum s_n phi_n`` reproduces ``chi_reg``.  ``chi_cos = sum c_n phi_n``
is regular at the origin and matches ``COSINE_ASYMPTOTIC_SCALE * chi_irr`` at
large ``r``.  Partial sums converge slowly (roughly like ``1/N`` pointwise),
so every comparison here reports the mismatch rather than assuming it small.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .basis import phi_logprefactor
from .core import (
    Channel,
    CoefficientKind,
    CoefficientVector,
    DomainError,
    EnergyPoint,
    NumericalError,
    UsageError,
)
from .specfun import spherical_bessel_j_orders, spherical_neumann_orders

_NORM = 2.0 / math.sqrt(math.pi)

# both lam r and k r should reach this before the basis tail is negligible
ASYMPTOTIC_ONSET = 5.0


class WaveKind(enum.Enum):
    CHI_SIN = "chi_sin"
    CHI_COS = "chi_cos"
    CHI_REG = "chi_reg"
    CHI_IRR = "chi_irr"


@dataclass(frozen=True, eq=False)
class WaveSamples:
    """A radial function sampled on an increasing grid.

    ``N`` is the truncation for synthesized sums and ``None`` for the
    analytic references.
    """

    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    kind: WaveKind
    channel: Channel
    energy: EnergyPoint
    N: int | None = None

    def __post_init__(self):
        grid = _check_grid(self.grid)
        values = np.array(self.values, dtype=float)
        if values.shape != grid.shape:
            raise DomainError("values and grid differ in length")
        if not np.all(np.isfinite(values)):
            raise NumericalError(f"non-finite {self.kind.value} samples")
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def label(self) -> str:
        return self.kind.value if self.N is None else f"{self.kind.value}(N={self.N})"


@dataclass(frozen=True, eq=False)
class PlusMinusSamples:
    """``chi_+- = chi_cos +- i chi_sin`` on a shared grid."""

    grid: np.ndarray = field(repr=False)
    plus: np.ndarray = field(repr=False)
    minus: np.ndarray = field(repr=False)


def _check_grid(grid):
    grid = np.array(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("grid must be a non-empty 1-d sequence")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise DomainError("grid radii must be finite and non-negative")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing")
    grid.setflags(write=False)
    return grid


def _riccati(kind, r, channel, energy):
    r = np.asarray(r, dtype=float)
    z = energy.k * r
    if kind is WaveKind.CHI_REG:
        if np.any(r < 0):
            raise DomainError("radius must be non-negative")
        return z * spherical_bessel_j_orders(channel.ell, z)[channel.ell]
    if np.any(r <= 0):
        raise DomainError("chi_irr is singular at r = 0")
    return z * spherical_neumann_orders(channel.ell, z)[channel.ell]


def chi_reg(r, channel: Channel, energy: EnergyPoint):
    """Regular reference solution ``(2/sqrt(pi)) kr j_l(kr)``."""
    energy.check_channel(channel)
    val = _NORM * _riccati(WaveKind.CHI_REG, r, channel, energy)
    return float(val) if np.ndim(val) == 0 else val


def chi_irr(r, channel: Channel, energy: EnergyPoint):
    """Irregular reference solution ``(2/sqrt(pi)) kr n_l(kr)``; needs ``r > 0``."""
    energy.check_channel(channel)
    val = _NORM * _riccati(WaveKind.CHI_IRR, r, channel, energy)
    return float(val) if np.ndim(val) == 0 else val


def reference_samples(kind: WaveKind, grid, channel: Channel, energy: EnergyPoint) -> WaveSamples:
    """``chi_reg`` or ``chi_irr`` on ``grid``."""
    grid = _check_grid(grid)
    if kind is WaveKind.CHI_REG:
        values = chi_reg(grid, channel, energy)
    elif kind is WaveKind.CHI_IRR:
        values = chi_irr(grid, channel, energy)
    else:
        raise UsageError(f"{kind.value} is not an analytic reference")
    return WaveSamples(grid, np.atleast_1d(values), kind, channel, energy)


def synthesize(coeffs: CoefficientVector, grid, backend=None) -> WaveSamples:
    """Partial sum ``sum_{n<N} v_n phi_n(r)`` with compensated accumulation."""
    grid = _check_grid(grid)
    channel = coeffs.channel
    x = channel.lam * grid
    values = kernels.laguerre_sum(
        coeffs.values, 2 * channel.ell + 1, x, phi_logprefactor(channel, grid), backend
    )
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.argmax(bad))
        raise NumericalError(f"basis sum overflowed at r={grid[i]!r} (N={len(coeffs)})")
    kind = WaveKind.CHI_SIN if coeffs.kind is CoefficientKind.SINE_LIKE else WaveKind.CHI_COS
    return WaveSamples(grid, values, kind, channel, coeffs.energy, N=len(coeffs))


def asymptotic_mismatch(samples: WaveSamples, reference: WaveKind, window, scale: float = 1.0) -> float:
    """Max ``|samples - scale * reference|`` over grid points inside ``window``.

    ``scale`` lets callers compare against a rescaled reference, for example
    ``COSINE_ASYMPTOTIC_SCALE * chi_irr``.  For the irregular reference the
    window must start where ``lam r >= 5`` (the basis tail has died out).
    """
    r_min, r_max = (float(w) for w in window)
    if not r_min < r_max:
        raise DomainError("window must satisfy r_min < r_max")
    if r_min < samples.grid[0] or r_max > samples.grid[-1]:
        raise DomainError("window extends beyond the sampled grid")
    if reference is WaveKind.CHI_IRR and samples.channel.lam * r_min < ASYMPTOTIC_ONSET:
        raise DomainError(
            f"lam * r_min = {samples.channel.lam * r_min:.3g} is below the asymptotic onset {ASYMPTOTIC_ONSET}"
        )
    inside = (samples.grid >= r_min) & (samples.grid <= r_max)
    if not inside.any():
        raise DomainError("no grid points inside the window")
    ref = reference_samples(reference, samples.grid[inside], samples.channel, samples.energy)
    return float(np.max(np.abs(samples.values[inside] - scale * ref.values)))


def combine_pm(chi_cos_samples: WaveSamples, chi_sin_samples: WaveSamples) -> PlusMinusSamples:
    """Pointwise ``chi_cos +- i chi_sin``; the grids must be identical."""
    if chi_cos_samples.grid.shape != chi_sin_samples.grid.shape or np.any(
        chi_cos_samples.grid != chi_sin_samples.grid
    ):
        raise UsageError("chi_cos and chi_sin samples live on different grids")
    c = chi_cos_samples.values
    s = chi_sin_samples.values
    return PlusMinusSamples(chi_cos_samples.grid, c + 1j * s, c - 1j * s)

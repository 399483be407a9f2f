"""Green's-function construction of the regularized irregular solution.

For a regularizer ``xi(r) = sum_n b_n phi_dual_n(r)`` the bounded solution of
``(H0 - E) chi_bar = source * xi`` that tends to ``chi_irr`` at large ``r`` is

    chi_bar(r) = -(2 beta / W) [chi_irr(r) int_0^r chi_reg xi + chi_reg(r) int_r^inf chi_irr xi],
    beta = -W / (2 sum_n b_n s_n),   W = -k.

``W = -k`` is the Wronskian of the Riccati functions ``kr j_l`` and
``kr n_l``; with the ``2/sqrt(pi)`` normalization of ``chi_reg`` and
``chi_irr`` the source that ``chi_bar`` actually carries is
``beta / COSINE_ASYMPTOTIC_SCALE`` (see :func:`effective_source_strength`).
For ``b_n = delta_n0`` the construction reproduces
``chi_cos / COSINE_ASYMPTOTIC_SCALE``.  This module is an oracle: quadrature
based and meant for desk-scale checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .basis import dual_table
from .core import Channel, DomainError, EnergyPoint, NumericalError
from .jmatrix import COSINE_ASYMPTOTIC_SCALE, sine_coefficients
from .specfun import spherical_bessel_j_orders, spherical_neumann_orders
from .synth import chi_irr, chi_reg

_GL_POINTS = 30


@dataclass(frozen=True, eq=False)
class RegularizerSpec:
    """Finite set of regularization parameters ``b_0 .. b_{M-1}``."""

    b: np.ndarray = field()

    def __post_init__(self):
        b = np.array(self.b, dtype=float)
        if b.ndim != 1 or b.size == 0:
            raise DomainError("regularizer needs a non-empty 1-d parameter list")
        if not np.all(np.isfinite(b)) or not np.any(b != 0):
            raise DomainError("regularizer parameters must be finite with at least one nonzero")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)

    @classmethod
    def classic(cls) -> RegularizerSpec:
        """``b_n = delta_n0``."""
        return cls([1.0])

    def scaled(self, gamma: float) -> RegularizerSpec:
        return RegularizerSpec(gamma * self.b)


def wronskian(channel: Channel, energy: EnergyPoint) -> float:
    """``W = -k``."""
    energy.check_channel(channel)
    return -energy.k


def _riccati_pair(r, channel, energy):
    z = energy.k * np.asarray(r, dtype=float)
    ell = channel.ell
    return z * spherical_bessel_j_orders(ell, z)[ell], z * spherical_neumann_orders(ell, z)[ell]


def _five_point(f, r, h):
    return (f(r - 2 * h) - 8 * f(r - h) + 8 * f(r + h) - f(r + 2 * h)) / (12 * h)


def numerical_wronskian(r, channel: Channel, energy: EnergyPoint) -> float:
    """``u_reg' u_irr - u_reg u_irr'`` for ``u_reg = kr j_l``, ``u_irr = kr n_l``.

    Derivatives use a 5-point central stencil with ``h = 1e-4 / lam``.
    """
    energy.check_channel(channel)
    h = 1e-4 / channel.lam
    reg = lambda x: _riccati_pair(x, channel, energy)[0]
    irr = lambda x: _riccati_pair(x, channel, energy)[1]
    u_reg, u_irr = _riccati_pair(r, channel, energy)
    return float(_five_point(reg, r, h) * u_irr - u_reg * _five_point(irr, r, h))


def regularizer(r, spec: RegularizerSpec, channel: Channel):
    """``xi(r) = sum_n b_n phi_dual_n(r)``."""
    r = np.asarray(r, dtype=float)
    table = dual_table(spec.b.size, channel, r.ravel())
    val = (spec.b @ table).reshape(r.shape)
    return float(val) if r.ndim == 0 else val


def _projection(spec, channel, energy):
    s = sine_coefficients(channel, energy, max(spec.b.size, 2)).values[: spec.b.size]
    terms = spec.b * s
    return math.fsum(terms), math.fsum(np.abs(terms))


def beta_parameter(spec: RegularizerSpec, channel: Channel, energy: EnergyPoint) -> float:
    """``beta = -W / (2 sum_n b_n s_n)``.

    Raises
    ------
    DomainError
        If the regularizer is (numerically) orthogonal to the regular solution.
    """
    total, magnitude = _projection(spec, channel, energy)
    if abs(total) <= 1e-14 * magnitude or total == 0.0:
        raise DomainError("regularizer orthogonal to regular solution: sum b_n s_n vanishes")
    return -wronskian(channel, energy) / (2.0 * total)


def effective_source_strength(spec: RegularizerSpec, channel: Channel, energy: EnergyPoint) -> float:
    """Coefficient of ``xi`` in ``(H0 - E) chi_bar``: ``beta / COSINE_ASYMPTOTIC_SCALE``."""
    return beta_parameter(spec, channel, energy) / COSINE_ASYMPTOTIC_SCALE


def _support_end(spec, channel):
    """Radius beyond which ``|xi|`` stays below 1e-16 of its peak."""
    r_end = 4.0 * (spec.b.size + channel.ell + 2) / channel.lam
    while True:
        head = np.abs(regularizer(np.linspace(0.0, r_end, 800), spec, channel))
        tail = np.abs(regularizer(np.linspace(0.5 * r_end, r_end, 200), spec, channel))
        if tail.max() < 1e-16 * head.max():
            return r_end
        r_end *= 1.5
        if channel.lam * r_end > 5e4:
            raise NumericalError("regularizer does not decay")


def _panel_integrals(func, edges):
    nodes, weights = leggauss(_GL_POINTS)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = mid[:, None] + half[:, None] * nodes[None, :]
    vals = func(x.ravel()).reshape(x.shape)
    return (vals * weights[None, :]).sum(axis=1) * half


def _panel_edges(points, r_end, width):
    base = np.linspace(0.0, r_end, int(math.ceil(r_end / width)) + 1)
    edges = np.union1d(base, points[(points > 0) & (points < r_end)])
    return edges


def beta_by_quadrature(spec: RegularizerSpec, channel: Channel, energy: EnergyPoint) -> float:
    """``beta = -W / (2 int_0^inf chi_reg xi dr)`` with the integral done numerically.

    This is the large-``r`` limit of the Green's-function solution, written so
    that it does not use the closed-form ``s_n``.  Since
    ``<phi_dual_n | chi_reg> = s_n`` it agrees with :func:`beta_parameter`.
    """
    energy.check_channel(channel)
    r_end = _support_end(spec, channel)
    width = 0.5 * min(1.0 / channel.lam, math.pi / energy.k)
    integrand = lambda x: chi_reg(x, channel, energy) * regularizer(x, spec, channel)
    coarse = _panel_integrals(integrand, _panel_edges(np.empty(0), r_end, width))
    fine = _panel_integrals(integrand, _panel_edges(np.empty(0), r_end, 0.5 * width))
    a, b = math.fsum(coarse), math.fsum(fine)
    if abs(a - b) > 1e-11 * math.fsum(np.abs(fine)):
        raise NumericalError(f"projection quadrature not converged: {a!r} vs {b!r}")
    return -wronskian(channel, energy) / (2.0 * b)


def _split_integrals(r, spec, channel, energy, width, r_end):
    """``int_0^r chi_reg xi`` and ``int_r^inf chi_irr xi`` at every point of ``r``."""
    edges = _panel_edges(r, r_end, width)
    inner = np.concatenate(
        [[0.0], np.cumsum(_panel_integrals(lambda x: chi_reg(x, channel, energy) * regularizer(x, spec, channel), edges))]
    )
    outer_panels = _panel_integrals(lambda x: chi_irr(x, channel, energy) * regularizer(x, spec, channel), edges)
    outer = np.concatenate([np.cumsum(outer_panels[::-1])[::-1], [0.0]])
    idx = np.searchsorted(edges, np.minimum(r, r_end))
    return inner[idx], outer[idx]


def chi_bar_irregular(r, spec: RegularizerSpec, channel: Channel, energy: EnergyPoint):
    """Regularized irregular solution from the Green's function.

    Both integrals are cumulative Gauss-Legendre panel sums (30 points per
    panel, panel width at most half of ``1/lam`` and ``pi/k``), truncated
    where ``xi`` has decayed to 1e-16 of its peak.  The result is accepted
    only if halving every panel changes it by less than 1e-9 relative to the
    size of the two terms.
    """
    energy.check_channel(channel)
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r_arr <= 0):
        raise DomainError("chi_bar_irregular is evaluated at r > 0")
    order = np.argsort(r_arr)
    rs = r_arr[order]
    W = wronskian(channel, energy)
    pref = -2.0 * beta_parameter(spec, channel, energy) / W
    r_end = _support_end(spec, channel)
    width = 0.5 * min(1.0 / channel.lam, math.pi / energy.k)
    reg, irr = chi_reg(rs, channel, energy), chi_irr(rs, channel, energy)

    def evaluate(w):
        inner, outer = _split_integrals(rs, spec, channel, energy, w, r_end)
        return irr * inner + reg * outer, np.abs(irr * inner) + np.abs(reg * outer)

    coarse, _ = evaluate(width)
    fine, size = evaluate(0.5 * width)
    err = np.abs(fine - coarse)
    if np.any(err > 1e-9 * np.maximum(size, 1e-300)):
        i = int(np.argmax(err / np.maximum(size, 1e-300)))
        raise NumericalError(f"Green's-function quadrature not converged at r={rs[i]!r}")
    out = np.empty_like(r_arr)
    out[order] = pref * fine
    return float(out[0]) if np.ndim(r) == 0 else out


def greens_kernel(r, rp, channel: Channel, energy: EnergyPoint):
    """Bracketed kernel ``chi_reg(r<) chi_irr(r>)`` (without the ``-2 beta / W`` prefactor)."""
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    lo, hi = np.minimum(r, rp), np.maximum(r, rp)
    return chi_reg(lo, channel, energy) * chi_irr(hi, channel, energy)


def apply_reference_operator(func, r, channel: Channel, energy: EnergyPoint, h: float | None = None):
    """``(H0 - E) f = -f''/2 + l(l+1) f / (2 r^2) - E f`` with a 5-point second difference.

    ``h`` defaults to ``1e-4 / lam``; ``func`` must be vectorized.
    """
    r = np.asarray(r, dtype=float)
    if h is None:
        h = 1e-4 / channel.lam
    f0 = func(r)
    d2 = (-func(r - 2 * h) + 16 * func(r - h) - 30 * f0 + 16 * func(r + h) - func(r + 2 * h)) / (12 * h * h)
    ell = channel.ell
    return -0.5 * d2 + ell * (ell + 1) / (2 * r * r) * f0 - energy.E * f0

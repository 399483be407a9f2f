"""Tridiagonal reference operator and the sine-/cosine-like coefficient families.

In the Laguerre basis with ``nu = 2l+1`` the free wave operator ``H0 - E`` is
tridiagonal,

    J_nm = Gamma(n+2l+2) / (lam n!) (E + lam^2/8)
           [-2(n+l+1) y d_{n,m} + n d_{n,m+1} + (n+2l+2) d_{n,m-1}],

and its null recursion has two solution families.  ``s_n`` (sine-like) solves
it for every row; ``c_n`` (cosine-like) solves every row but the first, where
it leaves a source ``beta`` times the first dual basis function.
"""

from __future__ import annotations

import decimal
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction

import numpy as np
from numpy.polynomial.legendre import leggauss

from .basis import integrate_radial, phi_table
from .core import (
    Channel,
    CoefficientKind,
    CoefficientVector,
    DomainError,
    EnergyPoint,
    KinematicEndpointError,
    NumericalError,
    energy_from_theta,
)
from .specfun import (
    gegenbauer_sequence,
    hyp2f1_terminating,
    log_gamma_ratio,
    spherical_bessel_j,
)

ENDPOINT_GUARD = 1e-6

# chi_cos built with A_l tends to this multiple of chi_irr at large r (see README)
COSINE_ASYMPTOTIC_SCALE = -math.pi / 4.0


@dataclass(frozen=True)
class NormalizationConstant:
    ell: int
    value: float


def normalization_constant(ell: int) -> NormalizationConstant:
    """``A_l = -2^(l-1) Gamma(l + 1/2)``; ``A_0 = -sqrt(pi)/2``."""
    if ell < 0:
        raise DomainError("ell must be non-negative")
    return NormalizationConstant(ell, -(2.0 ** (ell - 1)) * math.gamma(ell + 0.5))


def _check_endpoint(energy: EnergyPoint):
    if energy.theta < ENDPOINT_GUARD or math.pi - energy.theta < ENDPOINT_GUARD:
        raise KinematicEndpointError(
            f"theta={energy.theta:.3e} is within {ENDPOINT_GUARD} of a kinematic endpoint"
        )


def _check_size(N, minimum=2):
    if int(N) != N or N < minimum:
        raise DomainError(f"truncation size must be an integer >= {minimum}, got {N!r}")
    return int(N)


# -- the operator -----------------------------------------------------------


def _row_prefactor(n, channel: Channel):
    """``Gamma(n+2l+2) / (lam n!)`` for an array of row indices."""
    return np.exp(-log_gamma_ratio(n, channel.ell)) / channel.lam


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    """Leading ``N x N`` block of ``J(E)``, optionally plus a potential block."""

    diag: np.ndarray = field(repr=False)
    sub: np.ndarray = field(repr=False)
    sup: np.ndarray = field(repr=False)
    channel: Channel
    energy: EnergyPoint
    potential: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        out = np.diag(self.diag) + np.diag(self.sup, 1) + np.diag(self.sub, -1)
        if self.potential is not None:
            out = out + self.potential
        return out

    def with_potential(self, potential) -> TridiagonalOperator:
        potential = np.asarray(potential, dtype=float)
        if potential.shape != (self.size, self.size):
            raise DomainError(f"potential block must be {self.size}x{self.size}")
        return TridiagonalOperator(self.diag, self.sub, self.sup, self.channel, self.energy, potential)


def j_matrix(channel: Channel, energy: EnergyPoint, N: int) -> TridiagonalOperator:
    """Rows and columns ``0 .. N-1`` of ``J(E)``."""
    energy.check_channel(channel)
    N = _check_size(N, 1)
    n = np.arange(N)
    pref = _row_prefactor(n, channel)
    lam2 = channel.lam ** 2 / 8.0
    diag = -2.0 * (n + channel.ell + 1) * pref * (energy.E - lam2)
    sup = pref[:-1] * (energy.E + lam2) * (n[:-1] + 2 * channel.ell + 2)
    sub = pref[1:] * (energy.E + lam2) * n[1:]
    return TridiagonalOperator(diag, sub, sup, channel, energy)


def j_element(n: int, m: int, channel: Channel, energy: EnergyPoint) -> float:
    """Single element ``J_nm(E)``; zero unless ``|n - m| <= 1``."""
    if n < 0 or m < 0:
        raise DomainError("indices must be non-negative")
    if abs(n - m) > 1:
        return 0.0
    energy.check_channel(channel)
    ell = channel.ell
    pref = float(_row_prefactor(n, channel))
    lam2 = channel.lam ** 2 / 8.0
    if m == n:
        return -2.0 * (n + ell + 1) * pref * (energy.E - lam2)
    if m == n - 1:
        return pref * (energy.E + lam2) * n
    return pref * (energy.E + lam2) * (n + 2 * ell + 2)


def j_element_by_quadrature(n: int, m: int, channel: Channel, energy: EnergyPoint) -> float:
    """``<phi_n | (H0 - E) phi_m>`` from the analytic action of ``H0`` on ``phi_m``.

    For a general Laguerre order ``nu`` the action is

        (H0 - E) phi_m = [m/(2r) (lam + (nu-2l-1)/r) + lam (l+1)/(2r) - lam^2/8 - E] phi_m
                         + (m+nu)/(2 r^2) (2l+1-nu) phi_{m-1}

    and the basis fixes ``nu = 2l+1``.  Integrated with Gauss-Laguerre (weight
    ``x^(2l+1) e^-x``) and checked against a rule of twice the size.
    """
    energy.check_channel(channel)
    ell, lam = channel.ell, channel.lam
    nu = 2 * ell + 1

    def integrand(r):
        table = phi_table(max(n, m) + 1, channel, r)
        coeff = m / (2 * r) * (lam + (nu - 2 * ell - 1) / r) + lam * (ell + 1) / (2 * r)
        out = table[n] * (coeff - lam ** 2 / 8.0 - energy.E) * table[m]
        if m > 0:
            out = out + table[n] * (m + nu) / (2 * r ** 2) * (2 * ell + 1 - nu) * table[m - 1]
        return out

    count = (n + m) // 2 + ell + 8
    coarse = integrate_radial(integrand, channel, 2 * ell + 1, count)
    fine = integrate_radial(integrand, channel, 2 * ell + 1, 2 * count)
    scale = math.sqrt(abs(integrand_norm := _gram_scale(n, m, channel))) or 1.0
    if abs(fine - coarse) > 1e-10 * scale:
        raise NumericalError(
            f"J_({n},{m}) quadrature unstable: {coarse!r} vs {fine!r} (scale {integrand_norm!r})"
        )
    return fine


def _gram_scale(n, m, channel):
    # |<phi_n|phi_n>| |<phi_m|phi_m>| sets the magnitude of any matrix element between them
    return math.exp(-log_gamma_ratio(n, channel.ell) - log_gamma_ratio(m, channel.ell)) * (
        max(channel.lam, 1.0 / channel.lam)
    ) ** 2


def apply_j(channel: Channel, energy: EnergyPoint, values) -> np.ndarray:
    """``(J v)_n`` for ``n = 0 .. len(v)-2`` (the rows that ``v`` fully determines)."""
    v = np.asarray(values, dtype=float)
    J = j_matrix(channel, energy, v.size)
    out = J.diag * v + np.concatenate([J.sup * v[1:], [0.0]])
    out[1:] += J.sub * v[:-1]
    return out[:-1]


# -- coefficient families ---------------------------------------------------


def _sine_closed_form(ell, y, sin_t, N):
    n = np.arange(N)
    log_pref = (ell + 1) * math.log(2.0) - 0.5 * math.log(math.pi) + math.lgamma(ell + 1)
    gamma_part = np.exp(log_pref + log_gamma_ratio(n, ell))
    return gamma_part * sin_t ** (ell + 1) * gegenbauer_sequence(N, ell + 1, y)


def _cosine_closed_form(ell, theta, sin_t, N):
    """``c_n`` from the finite cosine expansion of the terminating 2F1.

    With ``m = n+2l+1`` and ``c = (a+b+1)/2`` the polynomial
    ``2F1(-m, n+1; 1/2-l; sin^2(theta/2))`` is a degenerate Gegenbauer
    polynomial of order ``-l``; its Fourier form keeps only ``2(l+1)`` terms,
    which pair up into

        c_n = A_l (-1)^l l!/(2l)! sin(theta)^-l
              sum_{j=0}^{l} (-1)^j C(l,j) cos((m-2j) theta) / prod_{i=0}^{l} (n+l+1-j+i).

    Every term is bounded, so unlike the power series in ``sin^2(theta/2)``
    there is no cancellation growing with ``n``.
    """
    A = normalization_constant(ell).value
    n = np.arange(N, dtype=float)
    total = np.zeros(N)
    for j in range(ell + 1):
        denom = np.ones(N)
        for i in range(ell + 1):
            denom *= n + ell + 1 - j + i
        total += (-1) ** j * math.comb(ell, j) * np.cos((n + 2 * ell + 1 - 2 * j) * theta) / denom
    front = A * (-1) ** ell * math.factorial(ell) / math.factorial(2 * ell)
    return front * sin_t ** (-ell) * total


def sine_coefficients(channel: Channel, energy: EnergyPoint, N: int) -> CoefficientVector:
    """``s_n = 2^(l+1)/sqrt(pi) n! l!/Gamma(n+2l+2) sin(theta)^(l+1) C_n^(l+1)(cos theta)``."""
    energy.check_channel(channel)
    _check_endpoint(energy)
    N = _check_size(N)
    values = _sine_closed_form(channel.ell, energy.y, energy.sin_theta, N)
    return CoefficientVector(CoefficientKind.SINE_LIKE, values, channel, energy)


def cosine_coefficients(channel: Channel, energy: EnergyPoint, N: int) -> CoefficientVector:
    """Cosine-like ``c_n``; reduces to ``A cos((n+1) theta)/(n+1)`` for ``l = 0``."""
    energy.check_channel(channel)
    _check_endpoint(energy)
    N = _check_size(N)
    values = _cosine_closed_form(channel.ell, energy.theta, energy.sin_theta, N)
    return CoefficientVector(CoefficientKind.COSINE_LIKE, values, channel, energy)


def cosine_coefficients_hypergeometric(channel: Channel, energy: EnergyPoint, N: int) -> np.ndarray:
    """``c_n = A_l n!/Gamma(n+2l+2) sin(theta)^-l 2F1(-n-2l-1, n+1; 1/2-l; sin^2(theta/2))``.

    Direct power-series evaluation; the terms grow roughly like
    ``cosh(2 m asinh(sqrt z))`` so only the first few dozen ``n`` keep full
    precision.  Used to cross-check :func:`cosine_coefficients`.
    """
    energy.check_channel(channel)
    _check_endpoint(energy)
    ell = channel.ell
    A = normalization_constant(ell).value
    z = math.sin(0.5 * energy.theta) ** 2
    out = np.empty(N)
    for n in range(N):
        series = hyp2f1_terminating(-n - 2 * ell - 1, n + 1, 0.5 - ell, z)
        out[n] = A * math.exp(log_gamma_ratio(n, ell)) * energy.sin_theta ** (-ell) * series
    return out


def _hyp2f1_convergent(a, b, c, z, tol=1e-18, max_terms=200_000):
    """Gauss series for ``0 <= z < 1`` with its sign-changing head summed exactly.

    ``a``, ``b``, ``c`` are half-integers and ``z`` is a binary float, so the
    partial sums up to the last sign change of ``(a)_k / (c)_k`` are exact
    rationals.  Past that point every term has the same sign, but for large
    ``n`` the tail and the head can cancel to many digits, so the tail is
    accumulated in 50-digit decimal arithmetic rather than in doubles.
    """
    head = max(math.ceil(-a), math.ceil(-c), 0) + 2
    aq, bq, cq, zq = (Fraction(v) for v in (a, b, c, z))
    t = Fraction(1)
    total = Fraction(1)
    for k in range(head):
        t = t * (aq + k) * (bq + k) / ((cq + k) * (k + 1)) * zq
        total += t
    with decimal.localcontext() as ctx:
        ctx.prec = 50
        ad, bd, cd, zd = (Decimal(v) for v in (a, b, c, z))
        one_m = 1 - zd
        td = Decimal(t.numerator) / Decimal(t.denominator)
        sd = Decimal(total.numerator) / Decimal(total.denominator)
        for k in range(head, max_terms):
            td = td * (ad + k) * (bd + k) / ((cd + k) * (k + 1)) * zd
            sd += td
            # the term ratio tends to z, so the remainder is roughly td z / (1 - z)
            if abs(td) <= Decimal(tol) * abs(sd) * one_m:
                return float(sd)
    raise NumericalError(f"2F1({a}, {b}; {c}; {z}) did not converge in {max_terms} terms")


def cosine_coefficient_nonterminating(channel: Channel, energy: EnergyPoint, n: int) -> float:
    """``c_n`` through the non-terminating representation

        (cos theta/2)^(l+1) (sin theta/2)^-l 2F1(-n-l-1/2, n+l+3/2; 1/2-l; sin^2 theta/2),

    which Euler's transformation turns into ``2^l`` times the terminating
    form; the ``2^-l`` is applied here so both routes give the same ``c_n``.
    """
    energy.check_channel(channel)
    _check_endpoint(energy)
    ell = channel.ell
    half = 0.5 * energy.theta
    z = math.sin(half) ** 2
    series = _hyp2f1_convergent(-n - ell - 0.5, n + ell + 1.5, 0.5 - ell, z)
    shape = math.cos(half) ** (ell + 1) * math.sin(half) ** (-ell) * series
    A = normalization_constant(ell).value
    return A * math.exp(log_gamma_ratio(n, ell)) * 2.0 ** (-ell) * shape


def sine_coefficients_by_quadrature(
    channel: Channel, energy: EnergyPoint, n: int, *, points_per_panel: int = 40
) -> float:
    """``s_n`` from the Bessel-Laguerre integral

        s_n = sqrt(2 mu) n!/Gamma(n+2l+2) int_0^inf x^(l+1/2) e^(-x/2) L_n^(2l+1)(x) J_(l+1/2)(mu x) dx

    on Gauss-Legendre panels no wider than the Bessel half-period or one unit,
    cut where the envelope has decayed by 1e-18, and accepted only when
    halving every panel changes the result by less than 1e-11 of the summed
    panel magnitudes.
    """
    energy.check_channel(channel)
    ell, mu = channel.ell, energy.mu
    unit = Channel(ell, 1.0)
    front = math.sqrt(2.0 * mu) * math.exp(log_gamma_ratio(n, ell))

    def integrand(x):
        # x^(l+1/2) J_(l+1/2)(mu x) = x^(l+1) sqrt(2 mu / pi) j_l(mu x)
        bessel = math.sqrt(2.0 * mu / math.pi) * spherical_bessel_j(ell, mu * x)
        return front * phi_table(n + 1, unit, x)[n] * bessel

    x_max = 2.0 * (n + ell + 2)
    while True:
        tail = np.linspace(0.5 * x_max, x_max, 64)
        head = np.linspace(0.0, x_max, 512)
        if np.max(np.abs(integrand(tail))) < 1e-18 * np.max(np.abs(integrand(head))):
            break
        x_max *= 1.5
        if x_max > 1e5:
            raise NumericalError(f"s_{n} integrand does not decay")

    width = min(math.pi / mu, 1.0)
    nodes, weights = leggauss(points_per_panel)

    def panels(count):
        edges = np.linspace(0.0, x_max, count + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        vals = (integrand(x).reshape(count, -1) * weights[None, :]).sum(axis=1) * half
        return math.fsum(vals), math.fsum(np.abs(vals))

    count = int(math.ceil(x_max / width))
    coarse, _ = panels(count)
    fine, magnitude = panels(2 * count)
    if abs(fine - coarse) > 1e-11 * magnitude:
        raise NumericalError(
            f"s_{n} panel quadrature not converged: {coarse!r} vs {fine!r} (magnitude {magnitude!r})"
        )
    return fine


# -- residuals and the inhomogeneity ----------------------------------------


def recursion_residual(coeffs: CoefficientVector, scale: str = "row") -> np.ndarray:
    """Relative residuals of ``2(n+l+1) y v_n = n v_{n-1} + (n+2l+2) v_{n+1}``, ``n = 1..N-2``.

    With ``scale="row"`` each residual is divided by the largest of its own
    three terms (floor 1e-300).  That measure is ill-conditioned on rows whose
    terms all vanish exactly, e.g. alternate entries at ``y = 0``, where it
    reports rounding noise as O(1); ``scale="vector"`` divides by the largest
    term over all rows instead.
    """
    if scale not in ("row", "vector"):
        raise DomainError(f"scale must be 'row' or 'vector', got {scale!r}")
    v = coeffs.values
    if v.size < 3:
        raise DomainError("need at least three coefficients for a recursion residual")
    ell, y = coeffs.channel.ell, coeffs.energy.y
    n = np.arange(1, v.size - 1)
    t_mid = 2.0 * (n + ell + 1) * y * v[1:-1]
    t_low = n * v[:-2]
    t_high = (n + 2 * ell + 2) * v[2:]
    size = np.maximum.reduce([np.abs(t_mid), np.abs(t_low), np.abs(t_high), np.full(n.size, 1e-300)])
    if scale == "vector":
        size = np.full(n.size, size.max())
    return (t_mid - t_low - t_high) / size


def initial_relation_residual(coeffs: CoefficientVector) -> float:
    """Measured ``2(l+1) y v_0 - 2(l+1) v_1``: zero for ``s_n``, a fixed source for ``c_n``."""
    v = coeffs.values
    ell = coeffs.channel.ell
    return 2.0 * (ell + 1) * (coeffs.energy.y * v[0] - v[1])


def expected_initial_inhomogeneity(channel: Channel, energy: EnergyPoint) -> float:
    """``(2l+1) A_l / [Gamma(2l+2) sin(theta)^l]``, the value the cosine family leaves."""
    ell = channel.ell
    A = normalization_constant(ell).value
    return (2 * ell + 1) * A / (math.gamma(2 * ell + 2) * energy.sin_theta ** ell)


def inhomogeneity_strength(channel: Channel, energy: EnergyPoint) -> float:
    """``beta = -(l + 1/2) A_l k sin(theta)^(-l-1)``, so that ``(J c)_n = beta delta_n0``."""
    energy.check_channel(channel)
    _check_endpoint(energy)
    ell = channel.ell
    A = normalization_constant(ell).value
    return -(ell + 0.5) * A * energy.k * energy.sin_theta ** (-ell - 1)


def s_wave_inhomogeneity(channel: Channel, energy: EnergyPoint) -> float:
    """The S-wave form ``-(lam A/2)(mu^2 + 1/4)`` of the same source."""
    if channel.ell != 0:
        raise DomainError("the (mu^2 + 1/4) form applies to l = 0 only")
    A = normalization_constant(0).value
    return -(channel.lam * A / 2.0) * (energy.mu ** 2 + 0.25)


# -- energy-parameter differential equation ----------------------------------


def coefficient_at_y(kind: CoefficientKind, n: int, ell: int, y: float) -> float:
    """``s_n`` or ``c_n`` as a function of ``y = cos(theta)`` alone."""
    if not -1.0 < y < 1.0:
        raise DomainError("y must lie in (-1, 1)")
    sin_t = math.sqrt((1.0 - y) * (1.0 + y))
    if kind is CoefficientKind.SINE_LIKE:
        return float(_sine_closed_form(ell, y, sin_t, n + 1)[n])
    return float(_cosine_closed_form(ell, math.atan2(sin_t, y), sin_t, n + 1)[n])


def energy_ode_residual(kind: CoefficientKind, n: int, ell: int, y: float, h: float) -> float:
    """Central-difference residual of

        (1 - y^2) f'' - y f' - l(l+1)/(1 - y^2) f + (n+l+1)^2 f = 0

    for ``f = s_n(y)`` or ``c_n(y)``; the truncation error is ``O(h^2)``.
    """
    f = [coefficient_at_y(kind, n, ell, y + d) for d in (-h, 0.0, h)]
    d2 = (f[2] - 2.0 * f[1] + f[0]) / h ** 2
    d1 = (f[2] - f[0]) / (2.0 * h)
    one_m = 1.0 - y * y
    return one_m * d2 - y * d1 - ell * (ell + 1) / one_m * f[1] + (n + ell + 1) ** 2 * f[1]


def energy_at_y(channel: Channel, y: float) -> EnergyPoint:
    """Energy point with ``cos(theta) = y``."""
    return energy_from_theta(math.acos(y), channel)

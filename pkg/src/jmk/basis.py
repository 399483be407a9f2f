"""The Laguerre basis ``phi_n``, its biorthogonal dual and Gauss-Laguerre rules.

    phi_n(r)       = (lam r)^(l+1) exp(-lam r / 2) L_n^(2l+1)(lam r)
    phi_dual_n(r)  = [n! / Gamma(n+2l+2)] lam (lam r)^l exp(-lam r / 2) L_n^(2l+1)(lam r)

so that ``int_0^inf phi_n phi_dual_m dr = delta_nm``.
"""

from __future__ import annotations

import functools
import math

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from . import kernels
from .core import Channel, DomainError, NumericalError
from .specfun import log_gamma_ratio


def _radial_args(r):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be non-negative")
    return r


def _log_power(x, p):
    """``p * ln(x)`` with the convention ``x**0 == 1`` at ``x == 0``."""
    if p == 0:
        return np.zeros_like(x)
    with np.errstate(divide="ignore"):
        return p * np.log(x)


def phi_logprefactor(channel: Channel, r):
    """Log of the non-polynomial factor ``(lam r)^(l+1) exp(-lam r/2)``."""
    x = channel.lam * _radial_args(r)
    return _log_power(x, channel.ell + 1) - 0.5 * x


def dual_logprefactor(channel: Channel, r):
    """Log of ``lam (lam r)^l exp(-lam r/2)``; the per-n gamma ratio is added separately."""
    x = channel.lam * _radial_args(r)
    return math.log(channel.lam) + _log_power(x, channel.ell) - 0.5 * x


def phi_table(nmax, channel: Channel, r, backend=None):
    """``phi_0 .. phi_{nmax-1}`` on the points ``r``; shape ``(nmax,) + r.shape``."""
    r = _radial_args(r)
    x = channel.lam * r
    table = kernels.laguerre_table(
        nmax, 2 * channel.ell + 1, x.ravel(), phi_logprefactor(channel, r).ravel(), backend
    )
    return table.reshape((nmax,) + r.shape)


def dual_table(nmax, channel: Channel, r, backend=None):
    r = _radial_args(r)
    x = channel.lam * r
    table = kernels.laguerre_table(
        nmax, 2 * channel.ell + 1, x.ravel(), dual_logprefactor(channel, r).ravel(), backend
    )
    weights = np.exp(log_gamma_ratio(np.arange(nmax), channel.ell))
    return (weights[:, None] * table).reshape((nmax,) + r.shape)


def phi(n, channel: Channel, r):
    """Basis function ``phi_n(r)``; vanishes like ``r^(l+1)`` at the origin."""
    r = np.asarray(r, dtype=float)
    val = phi_table(n + 1, channel, r)[n]
    return float(val) if r.ndim == 0 else val


def phi_dual(n, channel: Channel, r):
    """Dual basis function with ``<phi_m | phi_dual_n> = delta_mn``."""
    r = np.asarray(r, dtype=float)
    val = dual_table(n + 1, channel, r)[n]
    return float(val) if r.ndim == 0 else val


def overlap(n, m, channel: Channel):
    """Closed-form ``<phi_n | phi_m>``.

    With ``nu = 2l+1`` and ``h_j = Gamma(j+nu+1)/j!`` the extra factor of ``x``
    in the weight couples only neighbouring degrees:
    ``x L_m = -(m+1) L_{m+1} + (2m+nu+1) L_m - (m+nu) L_{m-1}``.
    """
    if n < 0 or m < 0:
        raise DomainError("basis indices must be non-negative")
    nu = 2 * channel.ell + 1
    lo, hi = min(n, m), max(n, m)
    if hi - lo > 1:
        return 0.0
    # Gamma(lo + nu + 1 + (hi - lo)) / lo! covers both the diagonal and off-diagonal cases
    log_h = math.lgamma(hi + nu + 1) - math.lgamma(lo + 1)
    if hi == lo:
        return (2 * n + nu + 1) * math.exp(log_h) / channel.lam
    return -math.exp(log_h) / channel.lam


def _laguerre_scaled(count, alpha, x):
    """``(L_count, L_{count-1}, L_{count+1}, logscale)`` with a shared scale per point."""
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    logscale = np.zeros_like(x)
    for k in range(count + 1):
        p_prev, p = p, ((2 * k + 1 + alpha - x) * p - (k + alpha) * p_prev) / (k + 1)
        if k == count - 1:
            at_count, before = p.copy(), p_prev.copy()
        big = np.abs(p) > 1e150
        if big.any():
            p[big] *= 1e-150
            p_prev[big] *= 1e-150
            logscale[big] += 150 * math.log(10.0)
            if k >= count - 1:
                at_count[big] *= 1e-150
                before[big] *= 1e-150
    return at_count, before, p, logscale


@functools.lru_cache(maxsize=64)
def gauss_laguerre_log(count: int, alpha: float):
    """Nodes and log-weights of the ``count``-point rule for ``x^alpha e^-x`` on [0, inf).

    Golub-Welsch eigenvalues seed a Newton polish on the three-term
    recurrence; weights come from ``Gamma(n+alpha+1) x_i / (n! (n+1)^2 L_{n+1}(x_i)^2)``
    in log form so the tiny weights at the largest nodes do not underflow
    before they are combined with the integrand.  Cached arrays are read-only.
    """
    if count < 1:
        raise DomainError("quadrature needs at least one node")
    if not alpha > -1:
        raise DomainError("Gauss-Laguerre weight exponent must exceed -1")
    i = np.arange(count, dtype=float)
    diag = 2 * i + alpha + 1
    off = np.sqrt(i[1:] * (i[1:] + alpha))
    x = eigvalsh_tridiagonal(diag, off) if count > 1 else diag.copy()
    for _ in range(50):
        p, q, _, _ = _laguerre_scaled(count, alpha, x)
        # x L_n' = n L_n - (n + alpha) L_{n-1}; the common scale cancels in the ratio
        step = x * p / (count * p - (count + alpha) * q)
        x = x - step
        rel = np.abs(step) / np.abs(x)
        if np.all(rel <= 1e-14):
            break
    # rounding can keep the last digit dithering; anything larger is a real failure
    if not np.all(rel <= 1e-10):
        bad = int(np.argmax(rel))
        raise NumericalError(f"Gauss-Laguerre node {bad} of {count} did not converge")
    if np.any(x <= 0) or np.any(np.diff(x) <= 0):
        bad = int(np.argmin(np.diff(x))) if count > 1 else 0
        raise NumericalError(f"Gauss-Laguerre node {bad} of {count} left the admissible ordering")
    _, _, p_next, logscale = _laguerre_scaled(count, alpha, x)
    log_w = (
        math.lgamma(count + alpha + 1)
        - math.lgamma(count + 1)
        + np.log(x)
        - 2.0 * (math.log(count + 1) + np.log(np.abs(p_next)) + logscale)
    )
    x.setflags(write=False)
    log_w.setflags(write=False)
    return x, log_w


def gauss_laguerre_nodes(count: int, alpha: float = 0.0):
    """Nodes and weights exact for polynomials of degree ``<= 2 count - 1``
    against the weight ``x^alpha exp(-x)``."""
    x, log_w = gauss_laguerre_log(int(count), float(alpha))
    return x.copy(), np.exp(log_w)


def integrate_radial(func, channel: Channel, alpha: float, count: int):
    """``int_0^inf func(r) dr`` through ``x = lam r`` and the rule for ``x^alpha e^-x``.

    ``func`` must be vectorized.  Exact when ``func(x/lam)`` equals
    ``x^alpha e^-x`` times a polynomial of degree ``<= 2 count - 1``.
    """
    x, log_w = gauss_laguerre_log(int(count), float(alpha))
    # w_i / (x^alpha e^-x) at the nodes, in log form
    factor = np.exp(log_w + x - alpha * np.log(x))
    return float(np.sum(factor * func(x / channel.lam))) / channel.lam

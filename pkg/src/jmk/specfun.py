"""Special functions evaluated from their recurrences and finite series.

Everything here is implemented in-repo so that the recurrence-residual tests
exercise the same arithmetic the coefficient engines use.  Array arguments are
accepted wherever the natural argument is a real point (``x``, ``y``, ``z``);
degrees and orders are scalars.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import DomainError


class PolyFamily(enum.Enum):
    LAGUERRE = "laguerre"
    GEGENBAUER = "gegenbauer"
    CHEBYSHEV_T = "chebyshev_t"
    CHEBYSHEV_U = "chebyshev_u"


@dataclass(frozen=True)
class PolyFamilyParams:
    """A polynomial family, its order parameter (if any) and a degree."""

    family: PolyFamily
    degree: int
    order: float | None = None

    def __post_init__(self):
        if self.degree < 0:
            raise DomainError("degree must be non-negative")
        if self.family is PolyFamily.LAGUERRE and not (self.order is not None and self.order > -1):
            raise DomainError("Laguerre order must exceed -1")
        if self.family is PolyFamily.GEGENBAUER and not (
            self.order is not None and self.order > -0.5
        ):
            raise DomainError("Gegenbauer order must exceed -1/2")

    def evaluate(self, x):
        if self.family is PolyFamily.LAGUERRE:
            return laguerre_assoc(self.degree, self.order, x)
        if self.family is PolyFamily.GEGENBAUER:
            return gegenbauer(self.degree, self.order, x)
        if self.family is PolyFamily.CHEBYSHEV_T:
            return chebyshev_t(self.degree, x)
        return chebyshev_u(self.degree, x)


def _scalar_or_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _check_interval(y):
    if np.any(np.abs(y) > 1.0):
        raise DomainError("argument must lie in [-1, 1]")


def _check_degree(n):
    if int(n) != n or n < 0:
        raise DomainError(f"degree must be a non-negative integer, got {n!r}")
    return int(n)


def laguerre_assoc(n, nu, x):
    """Associated Laguerre polynomial ``L_n^nu(x)`` by upward recurrence in ``n``."""
    n = _check_degree(n)
    if not nu > -1:
        raise DomainError(f"Laguerre order must exceed -1, got {nu!r}")
    x, scalar = _scalar_or_array(x)
    if np.any(x < 0):
        raise DomainError("Laguerre argument must be non-negative")
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    for k in range(n):
        p_prev, p = p, ((2 * k + 1 + nu - x) * p - (k + nu) * p_prev) / (k + 1)
    return float(p) if scalar else p


def laguerre_sequence(nmax, nu, x):
    """Rows ``L_0^nu(x) .. L_{nmax-1}^nu(x)`` as an array of shape ``(nmax, len(x))``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return kernels.laguerre_table(nmax, nu, x, np.zeros_like(x))


def gegenbauer_sequence(nmax, order, y):
    """``C_0^order(y) .. C_{nmax-1}^order(y)``.

    Upward recurrence ``(n+1) C_{n+1} = 2 (n + order) y C_n - (n + 2 order - 1) C_{n-1}``
    seeded by ``C_0 = 1`` and ``C_1 = 2 order y``.
    """
    if not order > -0.5:
        raise DomainError(f"Gegenbauer order must exceed -1/2, got {order!r}")
    y, _ = _scalar_or_array(y)
    _check_interval(y)
    out = np.empty((nmax,) + y.shape)
    if nmax == 0:
        return out
    out[0] = 1.0
    if nmax > 1:
        out[1] = 2.0 * order * y
    for n in range(1, nmax - 1):
        out[n + 1] = (2.0 * (n + order) * y * out[n] - (n + 2.0 * order - 1.0) * out[n - 1]) / (n + 1)
    return out


def gegenbauer(n, order, y):
    """Gegenbauer polynomial ``C_n^order(y)`` for ``|y| <= 1``."""
    n = _check_degree(n)
    y, scalar = _scalar_or_array(y)
    val = gegenbauer_sequence(n + 1, order, y)[n]
    return float(val) if scalar else val


def _chebyshev(n, y, second_kind):
    n = _check_degree(n)
    y, scalar = _scalar_or_array(y)
    _check_interval(y)
    p_prev = np.ones_like(y)
    p = (2.0 * y) if second_kind else y.copy()
    if n == 0:
        p = p_prev
    for _ in range(1, n):
        p_prev, p = p, 2.0 * y * p - p_prev
    return float(p) if scalar else p


def chebyshev_t(n, y):
    """Chebyshev polynomial of the first kind, ``T_n(cos t) = cos(n t)``."""
    return _chebyshev(n, y, second_kind=False)


def chebyshev_u(n, y):
    """Chebyshev polynomial of the second kind, ``U_n(cos t) = sin((n+1) t) / sin t``."""
    return _chebyshev(n, y, second_kind=True)


def _is_nonpositive_integer(a):
    return float(a) == math.floor(a) and a <= 0


def hyp2f1_terminating(a, b, c, z):
    """Terminating Gauss series ``sum_{k=0}^{-a} (a)_k (b)_k / (c)_k z^k / k!``.

    ``a`` must be a non-positive integer.  The sum is accumulated with
    ``math.fsum``; it is exact up to rounding of the individual terms, but the
    terms themselves can dwarf the result when ``-a`` is large, so callers
    needing high degree should use a recurrence-based form instead.
    """
    if not _is_nonpositive_integer(a):
        raise DomainError(f"series does not terminate: a={a!r} is not a non-positive integer")
    z = float(z)
    degree = int(-a)
    terms = [1.0]
    t = 1.0
    for k in range(degree):
        if c + k == 0:
            raise DomainError(f"(c)_k vanishes at k={k + 1} for c={c!r}")
        t *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        terms.append(t)
    return math.fsum(terms)


def spherical_bessel_j(ell, z):
    """Spherical Bessel ``j_ell(z)`` for ``z >= 0`` (Miller downward recurrence)."""
    z, scalar = _scalar_or_array(z)
    if np.any(z < 0):
        raise DomainError("spherical_bessel_j needs z >= 0")
    val = kernels.spherical_j_table(ell, z.ravel())[ell].reshape(z.shape)
    return float(val) if scalar else val


def spherical_bessel_j_orders(lmax, z):
    """All orders ``j_0 .. j_lmax`` at once, shape ``(lmax + 1,) + z.shape``."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("spherical_bessel_j needs z >= 0")
    return kernels.spherical_j_table(lmax, z.ravel()).reshape((lmax + 1,) + z.shape)


def spherical_neumann_orders(lmax, z):
    """``n_0 .. n_lmax`` by upward recurrence (the stable direction for ``n``)."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise DomainError("spherical_neumann_n needs z > 0")
    out = np.empty((lmax + 1,) + z.shape)
    out[0] = -np.cos(z) / z
    if lmax >= 1:
        out[1] = -np.cos(z) / z ** 2 - np.sin(z) / z
    for k in range(1, lmax):
        out[k + 1] = (2 * k + 1) / z * out[k] - out[k - 1]
    return out


def spherical_neumann_n(ell, z):
    """Spherical Neumann ``n_ell(z)`` for ``z > 0``."""
    z, scalar = _scalar_or_array(z)
    val = spherical_neumann_orders(ell, z)[ell]
    return float(val) if scalar else val


def _derivative_from_orders(orders, ell, z):
    # f_l' = f_{l-1} - (l+1)/z f_l, and f_0' = -f_1, for both j and n
    if ell == 0:
        return -orders[1]
    return orders[ell - 1] - (ell + 1) / z * orders[ell]


def spherical_bessel_j_derivative(ell, z):
    z, scalar = _scalar_or_array(z)
    if np.any(z <= 0):
        raise DomainError("derivative is evaluated for z > 0 only")
    val = _derivative_from_orders(spherical_bessel_j_orders(max(ell, 1), z), ell, z)
    return float(val) if scalar else val


def spherical_neumann_n_derivative(ell, z):
    z, scalar = _scalar_or_array(z)
    val = _derivative_from_orders(spherical_neumann_orders(max(ell, 1), z), ell, z)
    return float(val) if scalar else val


def log_gamma_ratio(n, ell):
    """``ln[Gamma(n+1) / Gamma(n+2 ell+2)]`` as ``-sum_{i=1}^{2 ell+1} ln(n+i)``.

    The ratio is the reciprocal of a product of ``2 ell + 1`` consecutive
    integers, so summing their logarithms avoids both overflow and the
    cancellation between two large ``lgamma`` values.  ``n`` may be an array.
    """
    if ell < 0 or np.any(np.asarray(n) < 0):
        raise DomainError("log_gamma_ratio needs non-negative arguments")
    n_arr = np.asarray(n, dtype=float)
    total = np.zeros_like(n_arr)
    for i in range(1, 2 * int(ell) + 2):
        total -= np.log(n_arr + i)
    return float(total) if total.ndim == 0 else total

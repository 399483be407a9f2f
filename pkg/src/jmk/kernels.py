"""Hot inner loops, each with a numba-compiled and a pure-numpy implementation.

Every public kernel takes a ``backend`` keyword (``"numba"``, ``"numpy"`` or
``None`` for the process default chosen in :mod:`jmk._accel`).  Both backends
implement the same algorithm and agree to rounding; the test suite checks this
and ``benchmarks/bench_kernels.py`` times them against each other.

Laguerre evaluations carry a running log-scale so that products like
``x**(l+1) * exp(-x/2) * L_n(x)`` stay finite for large ``n`` and ``x`` even
when the individual factors would overflow or underflow.
"""

import math

import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA, njit

_RESCALE = 1e150
_LOG_RESCALE = 150.0 * math.log(10.0)
_BESSEL_RESCALE = 1e200
# below this |log scale| exp(scale) is a normal double and p * exp(scale) cannot
# overflow (|p| <= 1e150), so the per-entry log/exp round trip can be skipped
_LOG_DIRECT = 300.0


# -- loop implementations (compiled by numba, also valid plain Python) -------


def _laguerre_table_loop(nmax, nu, x, logpref):
    m = x.shape[0]
    # filled point by point, so keep each point's degrees contiguous
    out = np.zeros((m, nmax))
    for j in range(m):
        lp = logpref[j]
        if math.isinf(lp):
            continue
        xj = x[j]
        p_prev = 0.0
        p = 1.0
        scale = lp
        direct = abs(scale) < _LOG_DIRECT
        fac = math.exp(scale) if direct else 0.0
        for n in range(nmax):
            if direct:
                out[j, n] = p * fac
            elif p != 0.0:
                out[j, n] = math.copysign(math.exp(math.log(abs(p)) + scale), p)
            p_next = ((2.0 * n + 1.0 + nu - xj) * p - (n + nu) * p_prev) / (n + 1.0)
            p_prev = p
            p = p_next
            if abs(p) > _RESCALE:
                p /= _RESCALE
                p_prev /= _RESCALE
                scale += _LOG_RESCALE
                direct = abs(scale) < _LOG_DIRECT
                fac = math.exp(scale) if direct else 0.0
    return out.T


def _laguerre_sum_loop(coef, nu, x, logpref):
    nmax = coef.shape[0]
    m = x.shape[0]
    out = np.zeros(m)
    for j in range(m):
        lp = logpref[j]
        if math.isinf(lp):
            continue
        xj = x[j]
        p_prev = 0.0
        p = 1.0
        scale = lp
        direct = abs(scale) < _LOG_DIRECT
        fac = math.exp(scale) if direct else 0.0
        s = 0.0
        comp = 0.0
        for n in range(nmax):
            if p != 0.0 and coef[n] != 0.0:
                if direct:
                    term = coef[n] * (p * fac)
                else:
                    term = coef[n] * math.copysign(math.exp(math.log(abs(p)) + scale), p)
                t = s + term
                if abs(s) >= abs(term):
                    comp += (s - t) + term
                else:
                    comp += (term - t) + s
                s = t
            p_next = ((2.0 * n + 1.0 + nu - xj) * p - (n + nu) * p_prev) / (n + 1.0)
            p_prev = p
            p = p_next
            if abs(p) > _RESCALE:
                p /= _RESCALE
                p_prev /= _RESCALE
                scale += _LOG_RESCALE
                direct = abs(scale) < _LOG_DIRECT
                fac = math.exp(scale) if direct else 0.0
        out[j] = s + comp
    return out


@njit
def _bessel_start(top, z):
    # start well inside the region k > z where j_k is the minimal solution
    return top + 20 + int(z) + int(8.0 * z ** (1.0 / 3.0))


def _spherical_j_loop(lmax, z):
    m = z.shape[0]
    top = max(lmax, 1)
    out = np.zeros((lmax + 1, m))
    buf = np.zeros(top + 1)
    for j in range(m):
        zj = z[j]
        if zj == 0.0:
            out[0, j] = 1.0
            continue
        j0 = math.sin(zj) / zj
        j1 = (math.sin(zj) / zj - math.cos(zj)) / zj
        if zj > top:
            # past the turning point the upward recurrence is stable
            out[0, j] = j0
            if lmax >= 1:
                out[1, j] = j1
            for k in range(1, lmax):
                out[k + 1, j] = (2.0 * k + 1.0) / zj * out[k, j] - out[k - 1, j]
            continue
        for i in range(top + 1):
            buf[i] = 0.0
        f_next = 0.0
        f = 1e-30
        for k in range(_bessel_start(top, zj), 0, -1):
            f_prev = (2.0 * k + 1.0) / zj * f - f_next
            f_next = f
            f = f_prev
            if k - 1 <= top:
                buf[k - 1] = f
            if abs(f) > _BESSEL_RESCALE:
                f /= _BESSEL_RESCALE
                f_next /= _BESSEL_RESCALE
                for i in range(max(k - 1, 0), top + 1):
                    buf[i] /= _BESSEL_RESCALE
        if abs(j0) >= abs(j1):
            c = j0 / buf[0]
        else:
            c = j1 / buf[1]
        for i in range(lmax + 1):
            out[i, j] = buf[i] * c
    return out


def _rk4_loop(h, u0, up0, w_start, w_mid, w_end):
    u = u0
    v = up0
    half = 0.5 * h
    for i in range(w_start.shape[0]):
        k1u = v
        k1v = w_start[i] * u
        k2u = v + half * k1v
        k2v = w_mid[i] * (u + half * k1u)
        k3u = v + half * k2v
        k3v = w_mid[i] * (u + half * k2u)
        k4u = v + h * k3v
        k4v = w_end[i] * (u + h * k3u)
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if abs(u) > _RESCALE:
            u /= _RESCALE
            v /= _RESCALE
    return u, v


# -- vectorized numpy implementations ---------------------------------------


def _laguerre_table_np(nmax, nu, x, logpref):
    out = np.zeros((nmax, x.size))
    live = np.isfinite(logpref)
    xs = x[live]
    scale = logpref[live].copy()
    p_prev = np.zeros_like(xs)
    p = np.ones_like(xs)
    with np.errstate(divide="ignore"):
        for n in range(nmax):
            out[n, live] = np.sign(p) * np.exp(np.log(np.abs(p)) + scale)
            p_next = ((2.0 * n + 1.0 + nu - xs) * p - (n + nu) * p_prev) / (n + 1.0)
            p_prev, p = p, p_next
            big = np.abs(p) > _RESCALE
            if big.any():
                p[big] /= _RESCALE
                p_prev[big] /= _RESCALE
                scale[big] += _LOG_RESCALE
    return out


def _laguerre_sum_np(coef, nu, x, logpref):
    out = np.zeros(x.size)
    live = np.isfinite(logpref)
    xs = x[live]
    scale = logpref[live].copy()
    p_prev = np.zeros_like(xs)
    p = np.ones_like(xs)
    s = np.zeros_like(xs)
    comp = np.zeros_like(xs)
    with np.errstate(divide="ignore"):
        for n in range(coef.size):
            if coef[n] != 0.0:
                term = coef[n] * np.sign(p) * np.exp(np.log(np.abs(p)) + scale)
                t = s + term
                comp += np.where(np.abs(s) >= np.abs(term), (s - t) + term, (term - t) + s)
                s = t
            p_next = ((2.0 * n + 1.0 + nu - xs) * p - (n + nu) * p_prev) / (n + 1.0)
            p_prev, p = p, p_next
            big = np.abs(p) > _RESCALE
            if big.any():
                p[big] /= _RESCALE
                p_prev[big] /= _RESCALE
                scale[big] += _LOG_RESCALE
    out[live] = s + comp
    return out


def _spherical_j_np(lmax, z):
    top = max(lmax, 1)
    out = np.zeros((lmax + 1, z.size))
    out[0, z == 0.0] = 1.0
    # upward recurrence past the turning point z > top, Miller's method below it
    up = z > top
    zu = z[up]
    if zu.size:
        out[0, up] = np.sin(zu) / zu
        if lmax >= 1:
            out[1, up] = (np.sin(zu) / zu - np.cos(zu)) / zu
        for k in range(1, lmax):
            out[k + 1, up] = (2.0 * k + 1.0) / zu * out[k, up] - out[k - 1, up]
    low = (z > 0.0) & ~up
    zs = z[low]
    if zs.size == 0:
        return out
    buf = np.zeros((top + 1, zs.size))
    f_next = np.zeros_like(zs)
    f = np.full_like(zs, 1e-30)
    for k in range(_bessel_start(top, float(zs.max())), 0, -1):
        f_prev = (2.0 * k + 1.0) / zs * f - f_next
        f_next, f = f, f_prev
        if k - 1 <= top:
            buf[k - 1] = f
        big = np.abs(f) > _BESSEL_RESCALE
        if big.any():
            f[big] /= _BESSEL_RESCALE
            f_next[big] /= _BESSEL_RESCALE
            buf[max(k - 1, 0):, big] /= _BESSEL_RESCALE
    j0 = np.sin(zs) / zs
    j1 = (np.sin(zs) / zs - np.cos(zs)) / zs
    c = np.where(np.abs(j0) >= np.abs(j1), j0 / buf[0], j1 / buf[1])
    out[:, low] = buf[: lmax + 1] * c
    return out


_LOOPS = {
    "laguerre_table": _laguerre_table_loop,
    "laguerre_sum": _laguerre_sum_loop,
    "spherical_j": _spherical_j_loop,
    "rk4_radial": _rk4_loop,
}

NUMPY_KERNELS = {
    "laguerre_table": _laguerre_table_np,
    "laguerre_sum": _laguerre_sum_np,
    "spherical_j": _spherical_j_np,
    # a sequential integrator has no vectorized form; the fallback is the loop itself
    "rk4_radial": _rk4_loop,
}

NUMBA_KERNELS = {name: njit(f) for name, f in _LOOPS.items()} if HAVE_NUMBA else {}

DEFAULT_BACKEND = "numba" if USE_NUMBA else "numpy"


def _impl(name, backend):
    backend = backend or DEFAULT_BACKEND
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not installed")
        return NUMBA_KERNELS[name]
    if backend == "numpy":
        return NUMPY_KERNELS[name]
    raise ValueError(f"unknown backend {backend!r}")


def _as_f64(a):
    return np.ascontiguousarray(a, dtype=np.float64).ravel()


def laguerre_table(nmax, nu, x, logpref, backend=None):
    """Return ``T[n, i] = exp(logpref[i]) * L_n^nu(x[i])`` for ``n < nmax``.

    Points with ``logpref == -inf`` give zero columns.
    """
    x = _as_f64(x)
    logpref = _as_f64(logpref)
    return _impl("laguerre_table", backend)(int(nmax), float(nu), x, logpref)


def laguerre_sum(coef, nu, x, logpref, backend=None):
    """Compensated sum ``sum_n coef[n] * exp(logpref) * L_n^nu(x)`` per point."""
    coef = _as_f64(coef)
    x = _as_f64(x)
    logpref = _as_f64(logpref)
    return _impl("laguerre_sum", backend)(coef, float(nu), x, logpref)


def spherical_j_table(lmax, z, backend=None):
    """Spherical Bessel ``j_0 .. j_lmax`` at ``z >= 0`` by downward recurrence."""
    z = _as_f64(z)
    return _impl("spherical_j", backend)(int(lmax), z)


def rk4_radial(h, u0, up0, w_start, w_mid, w_end, backend=None):
    """Integrate ``u'' = w(r) u`` with fixed-step RK4.

    ``w_start[i]``, ``w_mid[i]`` and ``w_end[i]`` are the coefficient values at
    the start, midpoint and end of step ``i`` (one-sided limits, so a jump in
    ``w`` that sits on a grid node does not spoil the order).  Returns the
    final ``(u, u')``, possibly rescaled by a common positive factor.
    """
    w_start = _as_f64(w_start)
    w_mid = _as_f64(w_mid)
    w_end = _as_f64(w_end)
    return _impl("rk4_radial", backend)(float(h), float(u0), float(up0), w_start, w_mid, w_end)

import os
import subprocess
import sys

import numpy as np
import pytest

from jmk import kernels
from jmk._accel import HAVE_NUMBA

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@pytest.fixture
def laguerre_case():
    rng = np.random.default_rng(3)
    x = np.sort(rng.uniform(0, 600, 300))
    x[0] = 0.0
    with np.errstate(divide="ignore"):
        logpref = 3 * np.log(x) - 0.5 * x
    return x, logpref


@needs_numba
def test_laguerre_backends_agree(laguerre_case):
    x, logpref = laguerre_case
    a = kernels.laguerre_table(300, 5.0, x, logpref, backend="numpy")
    b = kernels.laguerre_table(300, 5.0, x, logpref, backend="numba")
    assert np.max(np.abs(a - b)) <= 1e-13 * np.max(np.abs(a))
    coef = np.random.default_rng(1).standard_normal(300)
    s1 = kernels.laguerre_sum(coef, 5.0, x, logpref, backend="numpy")
    s2 = kernels.laguerre_sum(coef, 5.0, x, logpref, backend="numba")
    assert np.max(np.abs(s1 - s2)) <= 1e-13 * np.max(np.abs(s1))


def test_laguerre_sum_matches_table(laguerre_case):
    x, logpref = laguerre_case
    coef = np.random.default_rng(2).standard_normal(120)
    table = kernels.laguerre_table(120, 5.0, x, logpref, backend="numpy")
    s = kernels.laguerre_sum(coef, 5.0, x, logpref, backend="numpy")
    assert np.max(np.abs(coef @ table - s)) <= 1e-12 * np.max(np.abs(table))
    assert np.all(table[:, 0] == 0.0)


@needs_numba
def test_bessel_and_rk4_backends_agree():
    z = np.linspace(0, 100, 501)
    a = kernels.spherical_j_table(9, z, backend="numpy")
    b = kernels.spherical_j_table(9, z, backend="numba")
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)
    h = 1e-3
    r = h * np.arange(1, 5001)
    w = 2 / r ** 2 - 1.0
    args = (h, h * h, 2 * h, w, 2 / (r + h / 2) ** 2 - 1.0, 2 / (r + h) ** 2 - 1.0)
    u1 = np.array(kernels.rk4_radial(*args, backend="numpy"))
    u2 = np.array(kernels.rk4_radial(*args, backend="numba"))
    np.testing.assert_allclose(u1, u2, rtol=1e-13)


def test_rk4_free_solution():
    # u'' = -u from u(0)=0, u'(0)=1 gives sin; the ratio u/u' is scale free
    h = 1e-3
    steps = 3000
    w = -np.ones(steps)
    u, up = kernels.rk4_radial(h, 0.0, 1.0, w, w, w, backend="numpy")
    assert u / up == pytest.approx(np.tan(steps * h), rel=1e-10)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.spherical_j_table(2, np.array([1.0]), backend="fortran")


def test_disable_flag_selects_numpy():
    env = dict(os.environ, JMK_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from jmk import kernels; print(kernels.DEFAULT_BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"


@pytest.mark.parametrize("backend", ["numpy", "numba"] if HAVE_NUMBA else ["numpy"])
def test_bessel_matches_scipy_across_turning_point(backend):
    from scipy.special import spherical_jn

    z = np.concatenate([np.linspace(0, 30, 601), np.linspace(30, 3000, 400)])
    table = kernels.spherical_j_table(10, z, backend=backend)
    for ell in range(11):
        ref = spherical_jn(ell, z)
        assert np.max(np.abs(table[ell] - ref) * np.maximum(z, 1.0)) <= 1e-13

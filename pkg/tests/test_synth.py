import math

import numpy as np
import pytest

from jmk.core import (
    Channel,
    CoefficientKind,
    CoefficientVector,
    DomainError,
    UsageError,
    make_energy_point,
)
from jmk.jmatrix import COSINE_ASYMPTOTIC_SCALE, cosine_coefficients, sine_coefficients
from jmk.synth import (
    WaveKind,
    WaveSamples,
    asymptotic_mismatch,
    chi_irr,
    chi_reg,
    combine_pm,
    reference_samples,
    synthesize,
)

NORM = 2 / math.sqrt(math.pi)
CH0 = Channel(0, 1.0)
EN0 = make_energy_point(0.125, CH0)


def test_chi_reg_examples():
    for ell in range(4):
        ch = Channel(ell)
        assert chi_reg(0.0, ch, make_energy_point(0.5, ch)) == 0.0
    r = np.linspace(0, 30, 61)
    np.testing.assert_allclose(chi_reg(r, CH0, EN0), NORM * np.sin(EN0.k * r), atol=1e-15)
    ch = Channel(3)
    en = make_energy_point(0.5, ch)
    r = 50 / en.k
    assert abs(chi_reg(r, ch, en) - NORM * math.sin(50 - 1.5 * math.pi)) < 10 / 50


def test_chi_irr_examples():
    r = np.linspace(0.1, 30, 61)
    np.testing.assert_allclose(chi_irr(r, CH0, EN0), -NORM * np.cos(EN0.k * r), atol=1e-15)
    with pytest.raises(DomainError):
        chi_irr(0.0, CH0, EN0)
    ch = Channel(2)
    en = make_energy_point(0.5, ch)
    r = 50 / en.k
    assert abs(chi_irr(r, ch, en) + NORM * math.cos(50 - math.pi)) < 10 / 50
    ch = Channel(1)
    en = make_energy_point(0.5, ch)
    r = np.array([1e-4, 1e-3])
    slope = np.diff(np.log(np.abs(chi_irr(r, ch, en)))) / np.diff(np.log(r))
    assert slope[0] == pytest.approx(-1.0, abs=1e-5)


def test_single_term_synthesis():
    r = np.linspace(0, 12, 25)
    for theta_E in (0.125, 0.9):
        en = make_energy_point(theta_E, CH0)
        s = sine_coefficients(CH0, en, 2)
        one = CoefficientVector(s.kind, [s.values[0], 0.0], CH0, en)
        ref = NORM * en.sin_theta * r * np.exp(-r / 2)
        np.testing.assert_allclose(synthesize(one, r).values, ref, rtol=1e-14, atol=1e-300)


def test_cosine_sum_vanishes_at_origin():
    ch = Channel(1)
    en = make_energy_point(0.5, ch)
    for N in (2, 10, 100):
        assert synthesize(cosine_coefficients(ch, en, N), [0.0, 1.0]).values[0] == 0.0


def test_sine_sum_converges_to_chi_reg():
    grid = np.linspace(1.0, 15.0, 141)
    errors = [asymptotic_mismatch(synthesize(sine_coefficients(CH0, EN0, N), grid), WaveKind.CHI_REG, (1.0, 15.0)) for N in (50, 100, 200, 400)]
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert errors[-1] < 0.05


def test_cosine_matches_scaled_irregular_asymptotically():
    grid = np.linspace(8.0, 20.0, 121)
    errors = []
    for N in (100, 200, 400):
        samples = synthesize(cosine_coefficients(CH0, EN0, N), grid)
        errors.append(asymptotic_mismatch(samples, WaveKind.CHI_IRR, (8.0, 20.0), scale=COSINE_ASYMPTOTIC_SCALE))
    assert errors[-1] < 0.05
    # the unscaled comparison is off by an O(1) factor
    unscaled = asymptotic_mismatch(samples, WaveKind.CHI_IRR, (8.0, 20.0))
    assert unscaled > 10 * errors[-1]


def test_cosine_bounded_where_irregular_blows_up():
    grid = np.array([1e-3, 1.0])
    for ell in (1, 2, 3):
        ch = Channel(ell)
        en = make_energy_point(0.5, ch)
        cos = synthesize(cosine_coefficients(ch, en, 200), grid).values[0]
        assert math.isfinite(cos)
        assert abs(chi_irr(1e-3, ch, en)) >= 1e3 * abs(cos)


def test_synthesis_linear():
    ch = Channel(2, 0.7)
    en = make_energy_point(0.4, ch)
    grid = np.linspace(0.0, 20.0, 57)
    v = sine_coefficients(ch, en, 60)
    w = cosine_coefficients(ch, en, 60)
    combo = CoefficientVector(CoefficientKind.SINE_LIKE, 2.5 * v.values - 0.75 * w.values, ch, en)
    lhs = synthesize(combo, grid).values
    rhs = 2.5 * synthesize(v, grid).values - 0.75 * synthesize(w, grid).values
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12 * np.max(np.abs(rhs)))


def test_grid_and_window_validation():
    s = sine_coefficients(CH0, EN0, 10)
    with pytest.raises(DomainError):
        synthesize(s, [1.0, 1.0])
    with pytest.raises(DomainError):
        synthesize(s, [-1.0, 1.0])
    samples = synthesize(s, np.linspace(0.5, 10, 20))
    with pytest.raises(DomainError):
        asymptotic_mismatch(samples, WaveKind.CHI_IRR, (1.0, 9.0))
    with pytest.raises(DomainError):
        asymptotic_mismatch(samples, WaveKind.CHI_REG, (1.0, 12.0))
    with pytest.raises(UsageError):
        reference_samples(WaveKind.CHI_SIN, [1.0], CH0, EN0)
    assert samples.label == "chi_sin(N=10)"
    with pytest.raises(DomainError):
        WaveSamples([1.0, 2.0], [1.0], WaveKind.CHI_REG, CH0, EN0)


def test_combine_pm():
    grid = np.linspace(0.5, 40, 200)
    cos = synthesize(cosine_coefficients(CH0, EN0, 20), grid)
    zero = synthesize(CoefficientVector(CoefficientKind.SINE_LIKE, np.zeros(4), CH0, EN0), grid)
    pm = combine_pm(cos, zero)
    np.testing.assert_array_equal(pm.plus, pm.minus)
    sin = synthesize(sine_coefficients(CH0, EN0, 20), grid)
    pm = combine_pm(cos, sin)
    np.testing.assert_allclose(np.abs(pm.plus) ** 2, cos.values ** 2 + sin.values ** 2, rtol=1e-14)
    with pytest.raises(UsageError):
        combine_pm(cos, synthesize(sine_coefficients(CH0, EN0, 20), grid + 0.1))


def test_plus_asymptotics_s_wave():
    # with the analytic references chi_irr + i chi_reg = -(2/sqrt(pi)) e^{-ikr} for l = 0
    r = np.array([40.0 / EN0.k])
    irr = reference_samples(WaveKind.CHI_IRR, r, CH0, EN0)
    reg = reference_samples(WaveKind.CHI_REG, r, CH0, EN0)
    pm = combine_pm(irr, reg)
    assert pm.plus[0] == pytest.approx(-NORM * np.exp(-1j * 40.0), abs=1e-14)

import math

import numpy as np
import oracles
import pytest

from jmk.core import (
    Channel,
    DomainError,
    SpectralPoleError,
    UsageError,
    make_energy_point,
)
from jmk.jmatrix import j_matrix
from jmk.scatter import (
    PotentialKind,
    PotentialModel,
    assign_branches,
    n_convergence_sweep,
    phase_shift,
    phase_shift_ode_oracle,
    phase_shift_sweep,
    potential_matrix,
    square_well_s_wave,
)

SQUARE = PotentialModel.parse("squarewell:-2:1")
EXPO = PotentialModel.parse("exponential:-1:1")
GAUSS = PotentialModel.parse("gaussian:-1:1")
ZERO = PotentialModel.zero()


def mod_pi(delta):
    return abs(delta - math.pi * round(delta / math.pi))


def test_parse():
    assert SQUARE.kind is PotentialKind.SQUARE_WELL and SQUARE.V0 == -2.0 and SQUARE.size == 1.0
    assert PotentialModel.parse("zero").is_zero
    assert str(EXPO) == "exponential:-1.0:1.0"
    for bad in ("well:-1:1", "squarewell:-1", "gaussian:a:1", "zero:1"):
        with pytest.raises(UsageError):
            PotentialModel.parse(bad)
    with pytest.raises(DomainError):
        PotentialModel.parse("gaussian:-1:0")


def test_potential_values_and_cutoff():
    assert SQUARE(0.5) == -2.0 and SQUARE(1.5) == 0.0
    assert SQUARE(1.0, -1) == -2.0 and SQUARE(1.0, +1) == 0.0
    for pot in (EXPO, GAUSS):
        rc = pot.cutoff_radius()
        assert abs(pot(rc)) == pytest.approx(1e-12, rel=1e-9)
    assert ZERO.cutoff_radius() == 0.0


def test_potential_matrix():
    ch = Channel(0)
    assert np.all(potential_matrix(ZERO, ch, 6) == 0.0)
    V = potential_matrix(PotentialModel.parse("squarewell:-1:1"), ch, 8)
    assert V[0, 0] == pytest.approx(oracles.V00_SQUARE_WELL, rel=1e-12)
    for pot in (SQUARE, EXPO, GAUSS):
        V = potential_matrix(pot, Channel(1, 1.5), 30)
        np.testing.assert_array_equal(V, V.T)


def test_gaussian_matrix_element_by_direct_quadrature():
    from scipy.integrate import quad

    from jmk.basis import phi

    ch = Channel(1)
    V = potential_matrix(GAUSS, ch, 6)
    ref = quad(lambda r: phi(2, ch, r) * GAUSS(r) * phi(5, ch, r), 0, 12, epsabs=1e-14, epsrel=1e-13)[0]
    assert V[2, 5] == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("ell", [0, 1, 2, 3])
def test_zero_potential_gives_zero(ell):
    ch = Channel(ell)
    for E in (0.05, 0.2, 0.7, 1.5, 4.0):
        en = make_energy_point(E, ch)
        for N in (2, 7, 40):
            assert mod_pi(phase_shift(ZERO, ch, en, N).delta) <= 1e-10


def test_square_well_analytic_oracle():
    assert square_well_s_wave(-2, 1, 0.5) == pytest.approx(oracles.DELTA_SQUARE_WELL_L0_E05, rel=1e-14)


def test_ode_oracle_against_frozen_values():
    ch = Channel(0)
    en = make_energy_point(0.5, ch)
    assert phase_shift_ode_oracle(SQUARE, ch, en) == pytest.approx(oracles.DELTA_SQUARE_WELL_L0_E05, abs=1e-6)
    assert phase_shift_ode_oracle(GAUSS, ch, en) == pytest.approx(oracles.DELTA_GAUSSIAN_L0_E05, abs=1e-7)
    ch = Channel(1)
    en = make_energy_point(0.3, ch)
    assert phase_shift_ode_oracle(EXPO, ch, en) == pytest.approx(oracles.DELTA_EXPONENTIAL_L1_E03, abs=1e-7)
    for ell in (0, 2):
        ch = Channel(ell)
        assert abs(phase_shift_ode_oracle(ZERO, ch, make_energy_point(0.8, ch))) <= 1e-8


def test_ode_oracle_fourth_order():
    ch = Channel(0)
    en = make_energy_point(0.5, ch)
    exact = square_well_s_wave(-2, 1, 0.5)
    errs = [abs(phase_shift_ode_oracle(SQUARE, ch, en, step=h) - exact) for h in (8e-3, 4e-3, 2e-3)]
    for a, b in zip(errs, errs[1:]):
        assert 10.0 < a / b < 24.0


def test_ode_oracle_rejects_short_match():
    ch = Channel(0)
    with pytest.raises(UsageError):
        phase_shift_ode_oracle(SQUARE, ch, make_energy_point(0.5, ch), r_match=0.5)


@pytest.mark.parametrize("pot", [EXPO, GAUSS], ids=["exponential", "gaussian"])
@pytest.mark.parametrize("ell", [0, 1])
@pytest.mark.parametrize("E", [0.2, 0.5, 1.0])
def test_smooth_potentials_match_ode(pot, ell, E):
    ch = Channel(ell)
    en = make_energy_point(E, ch)
    assert abs(phase_shift(pot, ch, en, 50).delta - phase_shift_ode_oracle(pot, ch, en)) <= 1e-3


@pytest.mark.parametrize("ell", [0, 1])
@pytest.mark.parametrize("E", [0.2, 0.5, 1.0])
def test_square_well_matches_ode(ell, E):
    # the discontinuous well converges slowly in N; see README
    ch = Channel(ell)
    en = make_energy_point(E, ch)
    assert abs(phase_shift(SQUARE, ch, en, 50).delta - phase_shift_ode_oracle(SQUARE, ch, en)) <= 1e-3


@pytest.mark.parametrize("pot", [EXPO, GAUSS, SQUARE], ids=["exponential", "gaussian", "squarewell"])
def test_lambda_robustness(pot):
    deltas = []
    for lam in (1.0, 2.0):
        ch = Channel(0, lam)
        deltas.append(phase_shift(pot, ch, make_energy_point(0.5, ch), 50).delta)
    assert abs(deltas[0] - deltas[1]) <= 1e-3


def test_n_convergence_sweep():
    ch = Channel(0)
    en = make_energy_point(0.5, ch)
    res = n_convergence_sweep(SQUARE, ch, en, [10, 20, 40, 80])
    assert abs(res[3].delta - res[2].delta) < abs(res[1].delta - res[0].delta)
    assert res[0].convergence_delta is None
    assert res[3].convergence_delta == pytest.approx(res[3].delta - res[2].delta)
    for r in n_convergence_sweep(ZERO, ch, en, [10, 20, 40]):
        assert mod_pi(r.delta) <= 1e-10
    with pytest.raises(DomainError):
        n_convergence_sweep(ZERO, ch, en, [20, 10])


def test_result_diagnostics():
    ch = Channel(1)
    res = phase_shift(EXPO, ch, make_energy_point(0.3, ch), 50)
    assert -math.pi / 2 < res.delta <= math.pi / 2
    assert res.N == 50
    assert res.convergence_delta is not None
    for key in ("condition", "solve_residual", "tan_delta", "cosine_scale", "coarse_N"):
        assert key in res.diagnostics
    assert math.tan(res.delta) == pytest.approx(res.diagnostics["tan_delta"], rel=1e-12)


def test_branch_tracking():
    ch = Channel(0)
    energies = [make_energy_point(E, ch) for E in np.linspace(0.01, 3.0, 40)]
    deep = PotentialModel.parse("exponential:-6:1")
    results = phase_shift_sweep(deep, ch, energies, 40)
    assert results[0].branch == 0
    unwrapped = np.array([r.unwrapped for r in results])
    assert np.all(np.abs(np.diff(unwrapped)) < math.pi / 2)
    shuffled = assign_branches([phase_shift(deep, ch, e, 40) for e in energies])
    assert [r.branch for r in shuffled] == [r.branch for r in results]


def test_spectral_pole():
    ch = Channel(0)
    N = 10
    en = make_energy_point(0.5, ch)
    V = potential_matrix(EXPO, ch, N)
    # find an energy where det(J + V) changes sign and bisect onto it
    grid = np.linspace(0.05, 3.0, 400)
    dets = [np.linalg.det(j_matrix(ch, make_energy_point(E, ch), N).dense() + V) for E in grid]
    i = next(i for i in range(len(grid) - 1) if dets[i] * dets[i + 1] < 0)
    lo, hi = grid[i], grid[i + 1]
    f = lambda E: np.linalg.det(j_matrix(ch, make_energy_point(E, ch), N).dense() + V)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    en = make_energy_point(lo, ch)
    with pytest.raises(SpectralPoleError, match="nearby energy"):
        phase_shift(EXPO, ch, en, N, convergence_check=False)


def test_invalid_truncation():
    ch = Channel(0)
    with pytest.raises(DomainError):
        phase_shift(ZERO, ch, make_energy_point(0.5, ch), 1)


def test_odd_truncation_pole_at_basis_energy():
    # at E = lam^2/8 the free J has a zero diagonal, so odd truncations are singular
    ch = Channel(0)
    en = make_energy_point(0.125, ch)
    with pytest.raises(SpectralPoleError):
        phase_shift(ZERO, ch, en, 5)
    res = phase_shift(ZERO, ch, en, 10)
    assert res.diagnostics["coarse_N"] == 6
    assert mod_pi(res.delta) <= 1e-10

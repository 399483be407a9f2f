"""Short-range model potentials and J-matrix phase shifts.

The truncated problem keeps ``(J + V)`` on the first ``N`` basis functions and
the free operator ``J`` outside.  With ``g = [(J + V)_N^-1]_{N-1,N-1}``

    tan(delta_N) = kappa (s_{N-1} + g J_{N-1,N} s_N) / (c_{N-1} + g J_{N-1,N} c_N)

where ``kappa = COSINE_ASYMPTOTIC_SCALE`` converts the asymptotic amplitude of
``chi_cos`` to that of ``chi_irr``.  The convention is
``u(r) ~ sin(kr - l pi/2 + delta)``, so an attractive well gives ``delta > 0``
at low energy.  An RK4 radial integrator provides the independent oracle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import kernels
from .basis import gauss_laguerre_log, phi_table
from .core import (
    Channel,
    DomainError,
    EnergyPoint,
    NumericalError,
    SpectralPoleError,
    UsageError,
)
from .jmatrix import (
    COSINE_ASYMPTOTIC_SCALE,
    cosine_coefficients,
    j_element,
    j_matrix,
    sine_coefficients,
)
from .specfun import (
    spherical_bessel_j,
    spherical_bessel_j_derivative,
    spherical_neumann_n,
    spherical_neumann_n_derivative,
)

MATRIX_TOLERANCE = 1e-10
NEGLIGIBLE_POTENTIAL = 1e-12
POLE_CONDITION = 1e13


class PotentialKind(enum.Enum):
    SQUARE_WELL = "squarewell"
    EXPONENTIAL = "exponential"
    GAUSSIAN = "gaussian"
    ZERO = "zero"


@dataclass(frozen=True)
class PotentialModel:
    """``V0`` inside ``r < R`` (square well), ``V0 exp(-r/a)`` or ``V0 exp(-(r/a)^2)``.

    ``size`` is the radius ``R`` or the range ``a``.
    """

    kind: PotentialKind
    V0: float = 0.0
    size: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.V0) and math.isfinite(self.size)):
            raise DomainError("potential parameters must be finite")
        if not self.size > 0:
            raise DomainError("potential range/radius must be positive")

    @classmethod
    def zero(cls) -> PotentialModel:
        return cls(PotentialKind.ZERO)

    @classmethod
    def parse(cls, text: str) -> PotentialModel:
        """Parse ``kind:V0:size`` (e.g. ``squarewell:-2:1``) or ``zero``."""
        parts = text.strip().split(":")
        try:
            kind = PotentialKind(parts[0].lower())
        except ValueError:
            names = ", ".join(k.value for k in PotentialKind)
            raise UsageError(f"unknown potential kind {parts[0]!r} (expected one of {names})") from None
        if kind is PotentialKind.ZERO:
            if len(parts) != 1:
                raise UsageError("'zero' takes no parameters")
            return cls.zero()
        if len(parts) != 3:
            raise UsageError(f"potential spec must be kind:V0:size, got {text!r}")
        try:
            V0, size = float(parts[1]), float(parts[2])
        except ValueError:
            raise UsageError(f"non-numeric potential parameter in {text!r}") from None
        return cls(kind, V0, size)

    def __str__(self):
        if self.kind is PotentialKind.ZERO:
            return "zero"
        return f"{self.kind.value}:{self.V0!r}:{self.size!r}"

    @property
    def is_zero(self) -> bool:
        return self.kind is PotentialKind.ZERO or self.V0 == 0.0

    def __call__(self, r, side: int = 0):
        """``V(r)``.  At the square-well edge ``side < 0`` gives the inside value."""
        r = np.asarray(r, dtype=float)
        if self.is_zero:
            out = np.zeros_like(r)
        elif self.kind is PotentialKind.SQUARE_WELL:
            inside = r <= self.size if side < 0 else r < self.size
            out = np.where(inside, self.V0, 0.0)
        elif self.kind is PotentialKind.EXPONENTIAL:
            out = self.V0 * np.exp(-r / self.size)
        else:
            out = self.V0 * np.exp(-((r / self.size) ** 2))
        return float(out) if out.ndim == 0 else out

    def cutoff_radius(self, tol: float = NEGLIGIBLE_POTENTIAL) -> float:
        """Smallest radius beyond which ``|V| < tol``."""
        if self.is_zero:
            return 0.0
        if self.kind is PotentialKind.SQUARE_WELL:
            return self.size
        ratio = max(abs(self.V0) / tol, 1.0)
        if self.kind is PotentialKind.EXPONENTIAL:
            return self.size * math.log(ratio)
        return self.size * math.sqrt(math.log(ratio))


# -- matrix elements ----------------------------------------------------------


def _matrix_on_rule(r, w, pot, channel, N):
    table = phi_table(N, channel, r)
    weighted = table * (w * pot(r))[None, :]
    V = weighted @ table.T
    return 0.5 * (V + V.T)


def _composite_legendre(a, b, panels, points):
    nodes, weights = leggauss(points)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    r = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return r, w


def _potential_rule(pot, channel, N, level):
    """Quadrature rule at refinement ``level`` (each level doubles the node count)."""
    lam = channel.lam
    if pot.kind is PotentialKind.EXPONENTIAL:
        # phi_n phi_m exp(-r/a) = poly(t) t^(2l+2) e^-t with t = r (lam + 1/a)
        rate = lam + 1.0 / pot.size
        count = (N + channel.ell + 2) * 2 ** level
        alpha = 2 * channel.ell + 2
        t, log_w = gauss_laguerre_log(count, float(alpha))
        # the rule carries t^alpha e^-t; the integrand supplies its own copy
        w = np.exp(log_w + t - alpha * np.log(t)) / rate
        return t / rate, w
    end = pot.size if pot.kind is PotentialKind.SQUARE_WELL else pot.cutoff_radius(1e-17 * max(abs(pot.V0), 1.0))
    panels = max(1, int(math.ceil(lam * end / 4.0))) * 2 ** level
    points = N // 2 + channel.ell + 16
    return _composite_legendre(0.0, end, panels, points)


def potential_matrix(pot: PotentialModel, channel: Channel, N: int) -> np.ndarray:
    """``V_nm = int phi_n V phi_m dr`` for ``n, m < N``.

    The square well is integrated on ``[0, R]`` only, so the discontinuity is
    never inside a panel.  The exponential uses a Gauss-Laguerre rule matched
    to its decay rate (exact in exact arithmetic).  Every rule is refined by
    doubling until no entry moves by more than 1e-10 of the largest entry.
    The result is symmetric to the last bit.
    """
    if int(N) != N or N < 1:
        raise DomainError("N must be a positive integer")
    N = int(N)
    if pot.is_zero:
        return np.zeros((N, N))
    prev = _matrix_on_rule(*_potential_rule(pot, channel, N, 0), pot, channel, N)
    for level in range(1, 5):
        cur = _matrix_on_rule(*_potential_rule(pot, channel, N, level), pot, channel, N)
        scale = np.max(np.abs(cur))
        change = np.max(np.abs(cur - prev))
        if change <= MATRIX_TOLERANCE * scale:
            return cur
        prev = cur
    raise NumericalError(
        f"potential matrix did not converge (last change {change:.2e} of scale {scale:.2e})"
    )


# -- phase shifts ---------------------------------------------------------------


def _wrap(delta):
    """Map an angle onto the principal branch ``(-pi/2, pi/2]``."""
    wrapped = delta - math.pi * math.floor(delta / math.pi + 0.5)
    return math.pi / 2 if wrapped == -math.pi / 2 else wrapped


@dataclass(frozen=True, eq=False)
class PhaseShiftResult:
    """Principal-branch ``delta`` plus an integer ``branch`` count of added ``pi``."""

    energy: EnergyPoint
    delta: float
    N: int
    branch: int = 0
    convergence_delta: float | None = None
    diagnostics: MappingProxyType = field(default_factory=lambda: MappingProxyType({}), repr=False)

    def __post_init__(self):
        if not math.isfinite(self.delta):
            raise NumericalError("phase shift is not finite")
        object.__setattr__(self, "diagnostics", MappingProxyType(dict(self.diagnostics)))

    @property
    def unwrapped(self) -> float:
        return self.delta + self.branch * math.pi


def _phase_at(pot, channel, energy, N, V=None):
    J = j_matrix(channel, energy, N)
    if V is None:
        V = potential_matrix(pot, channel, N)
    M = J.dense() + V
    cond = float(np.linalg.cond(M))
    if not math.isfinite(cond) or cond > POLE_CONDITION:
        raise SpectralPoleError(
            f"truncated (J + V) is singular at E={energy.E!r}, N={N} (condition {cond:.2e}); "
            "try a nearby energy or a different N"
        )
    e_last = np.zeros(N)
    e_last[-1] = 1.0
    x = np.linalg.solve(M, e_last)
    residual = float(np.linalg.norm(M @ x - e_last))
    g = x[-1]
    coupling = j_element(N - 1, N, channel, energy)
    s = sine_coefficients(channel, energy, N + 1).values
    c = cosine_coefficients(channel, energy, N + 1).values
    num = s[N - 1] + g * coupling * s[N]
    den = c[N - 1] + g * coupling * c[N]
    tan_delta = COSINE_ASYMPTOTIC_SCALE * num / den
    diagnostics = {
        "cosine_scale": COSINE_ASYMPTOTIC_SCALE,
        "condition": cond,
        "solve_residual": residual,
        "numerator": num,
        "denominator": den,
        "tan_delta": tan_delta,
    }
    return _wrap(math.atan(tan_delta)), diagnostics


def phase_shift(
    pot: PotentialModel,
    channel: Channel,
    energy: EnergyPoint,
    N: int,
    *,
    convergence_check: bool = True,
) -> PhaseShiftResult:
    """J-matrix phase shift with truncation ``N``.

    ``convergence_delta`` is ``delta_N - delta_{N//2}`` (on the principal
    branch) when ``convergence_check`` is set and ``N >= 4``.  If the coarse
    size itself is a pole, ``N//2 + 1`` is used instead; the size actually
    used is ``diagnostics["coarse_N"]``.

    Raises
    ------
    SpectralPoleError
        If ``E`` sits on an eigenvalue of the truncated ``J + V`` block.
    """
    energy.check_channel(channel)
    if int(N) != N or N < 2:
        raise DomainError("N must be an integer >= 2")
    N = int(N)
    delta, diag = _phase_at(pot, channel, energy, N)
    conv = None
    if convergence_check and N >= 4:
        # a pole at the coarse size says nothing about N itself; step past it
        for coarse_N in (N // 2, N // 2 + 1):
            try:
                coarse, _ = _phase_at(pot, channel, energy, coarse_N)
            except SpectralPoleError:
                continue
            conv = _wrap(delta - coarse)
            diag["coarse_N"] = coarse_N
            break
    return PhaseShiftResult(energy, delta, N, 0, conv, diag)


def assign_branches(results) -> list[PhaseShiftResult]:
    """Attach branch counts to results ordered by energy.

    The branch is chosen so that successive unwrapped values differ by less
    than ``pi/2``; the first point is on branch 0.
    """
    out = []
    previous = None
    for res in results:
        branch = 0 if previous is None else round((previous - res.delta) / math.pi)
        res = PhaseShiftResult(res.energy, res.delta, res.N, branch, res.convergence_delta, res.diagnostics)
        previous = res.unwrapped
        out.append(res)
    return out


def phase_shift_sweep(pot: PotentialModel, channel: Channel, energies, N: int) -> list[PhaseShiftResult]:
    """Phase shifts over an increasing energy list with branch tracking."""
    return assign_branches([phase_shift(pot, channel, energy, N) for energy in energies])


def n_convergence_sweep(pot: PotentialModel, channel: Channel, energy: EnergyPoint, N_list) -> list[PhaseShiftResult]:
    """Phase shifts for each ``N``; ``convergence_delta`` is the change from the previous entry."""
    N_list = [int(n) for n in N_list]
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise DomainError("N_list must be strictly increasing")
    out = []
    previous = None
    for N in N_list:
        res = phase_shift(pot, channel, energy, N, convergence_check=False)
        conv = None if previous is None else _wrap(res.delta - previous)
        out.append(PhaseShiftResult(res.energy, res.delta, N, 0, conv, res.diagnostics))
        previous = res.delta
    return out


# -- oracles ----------------------------------------------------------------------


def square_well_s_wave(V0: float, R: float, E: float) -> float:
    """Analytic S-wave phase shift ``-kR + atan[(k/k') tan(k'R)]``, principal branch."""
    k = math.sqrt(2.0 * E)
    kp = math.sqrt(2.0 * (E - V0))
    return _wrap(-k * R + math.atan(k / kp * math.tan(kp * R)))


def phase_shift_ode_oracle(
    pot: PotentialModel,
    channel: Channel,
    energy: EnergyPoint,
    *,
    r_match: float | None = None,
    step: float | None = None,
) -> float:
    """Phase shift from outward RK4 integration of the radial equation.

    ``u'' = [l(l+1)/r^2 + 2 V(r) - 2E] u`` is started at ``r = h`` from the
    series ``u ~ r^(l+1) (1 + c r^2)`` and matched at ``r_match`` to
    ``kr j_l cos(delta) - kr n_l sin(delta)`` through value and slope.  The
    grid has the square-well radius on a node and uses one-sided potential
    values there, so the scheme stays fourth order.

    Raises
    ------
    UsageError
        If ``r_match`` is given where the potential is not yet negligible.
    """
    energy.check_channel(channel)
    cutoff = pot.cutoff_radius()
    if r_match is None:
        r_match = max(cutoff, 1.0) + 2.0 * math.pi / energy.k
    elif abs(pot(r_match)) >= NEGLIGIBLE_POTENTIAL or r_match < cutoff:
        raise UsageError(f"r_match={r_match!r} is inside the potential range (cutoff {cutoff:.4g})")
    h0 = step if step is not None else 2e-3 / max(1.0, energy.k)
    anchor = pot.size if pot.kind is PotentialKind.SQUARE_WELL and not pot.is_zero else r_match
    h = anchor / math.ceil(anchor / h0)
    steps = int(round(r_match / h))
    r_match = steps * h
    ell = channel.ell
    lead = ell * (ell + 1)

    def w(r, side):
        return lead / (r * r) + 2.0 * pot(r, side) - 2.0 * energy.E

    starts = h * np.arange(1, steps)
    w_start = w(starts, +1)
    w_mid = w(starts + 0.5 * h, 0)
    w_end = w(starts + h, -1)
    r0 = h
    c2 = (2.0 * pot(0.0, +1) - 2.0 * energy.E) / (2.0 * (2 * ell + 3))
    u0 = r0 ** (ell + 1) * (1.0 + c2 * r0 * r0)
    up0 = (ell + 1) * r0 ** ell + (ell + 3) * c2 * r0 ** (ell + 2)
    u, up = kernels.rk4_radial(h, u0, up0, w_start, w_mid, w_end)

    k = energy.k
    z = k * r_match
    jh = z * spherical_bessel_j(ell, z)
    nh = z * spherical_neumann_n(ell, z)
    jh_p = k * (spherical_bessel_j(ell, z) + z * spherical_bessel_j_derivative(ell, z))
    nh_p = k * (spherical_neumann_n(ell, z) + z * spherical_neumann_n_derivative(ell, z))
    return _wrap(math.atan((u * jh_p - up * jh) / (u * nh_p - up * nh)))

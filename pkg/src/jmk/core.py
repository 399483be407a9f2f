"""Domain types and kinematics shared by every other module.

Atomic units throughout (hbar = m = 1).  A scattering energy ``E > 0`` in a
channel with basis scale ``lam`` maps to

    k = sqrt(2 E),  mu = k / lam,  y = (mu^2 - 1/4) / (mu^2 + 1/4) = cos(theta)

with ``theta`` in the open interval (0, pi).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class JMKError(Exception):
    """Base class for all library errors.  ``code`` is a stable short tag."""

    code = "E_JMK"


class DomainError(JMKError, ValueError):
    code = "E_DOMAIN"


class KinematicEndpointError(DomainError):
    """Raised when theta is too close to 0 or pi for the coefficient formulas."""

    code = "E_ENDPOINT"


class NumericalError(JMKError, ArithmeticError):
    code = "E_NUMERICAL"


class SpectralPoleError(NumericalError):
    """The truncated (J + V) block is singular at this energy."""

    code = "E_POLE"


class UsageError(JMKError, ValueError):
    code = "E_USAGE"


@dataclass(frozen=True)
class Channel:
    """Angular momentum ``ell`` and Laguerre basis scale ``lam`` (inverse length)."""

    ell: int
    lam: float = 1.0

    def __post_init__(self):
        if int(self.ell) != self.ell or self.ell < 0:
            raise DomainError(f"ell must be a non-negative integer, got {self.ell!r}")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise DomainError(f"lambda must be positive and finite, got {self.lam!r}")
        object.__setattr__(self, "ell", int(self.ell))
        object.__setattr__(self, "lam", float(self.lam))


@dataclass(frozen=True)
class EnergyPoint:
    """One scattering energy and its derived kinematic parameters.

    ``lam`` records the basis scale used for ``mu`` so that an energy point
    built for one channel is not silently reused with another.
    """

    E: float
    k: float
    mu: float
    y: float
    theta: float
    lam: float

    @property
    def sin_theta(self) -> float:
        return self.mu / (self.mu * self.mu + 0.25)

    def check_channel(self, channel: Channel) -> None:
        if self.lam != channel.lam:
            raise UsageError(
                f"energy point was built for lambda={self.lam}, channel has lambda={channel.lam}"
            )


class CoefficientKind(enum.Enum):
    SINE_LIKE = "sine"
    COSINE_LIKE = "cosine"


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """Finite prefix ``v_0 .. v_{N-1}`` of the sine- or cosine-like coefficients."""

    kind: CoefficientKind
    values: np.ndarray = field(repr=False)
    channel: Channel
    energy: EnergyPoint

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise DomainError("a coefficient vector needs at least two entries")
        if not np.all(np.isfinite(values)):
            raise NumericalError(f"non-finite {self.kind.value}-like coefficients")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    def scaled(self, factor: float) -> CoefficientVector:
        return CoefficientVector(self.kind, factor * self.values, self.channel, self.energy)


def make_energy_point(E: float, channel: Channel) -> EnergyPoint:
    """Build the kinematic parameters for energy ``E`` in ``channel``.

    Raises
    ------
    DomainError
        If ``E`` is not strictly positive (scattering regime only).
    """
    E = float(E)
    if not (math.isfinite(E) and E > 0):
        raise DomainError(f"scattering regime only: energy must be > 0, got {E!r}")
    lam = channel.lam
    k = math.sqrt(2.0 * E)
    mu = k / lam
    # (E - lam^2/8) / (E + lam^2/8) is the same number without forming mu^2
    y = (E - lam * lam / 8.0) / (E + lam * lam / 8.0)
    # atan2 keeps full relative accuracy near both endpoints, unlike arccos(y)
    theta = math.atan2(mu, mu * mu - 0.25)
    return EnergyPoint(E=E, k=k, mu=mu, y=y, theta=theta, lam=lam)


def energy_from_theta(theta: float, channel: Channel) -> EnergyPoint:
    """Inverse of :func:`make_energy_point`: ``E = lam^2/8 * cot^2(theta/2)``."""
    theta = float(theta)
    if not (0.0 < theta < math.pi):
        raise DomainError(f"theta must lie in the open interval (0, pi), got {theta!r}")
    E = channel.lam ** 2 / 8.0 / math.tan(0.5 * theta) ** 2
    return make_energy_point(E, channel)

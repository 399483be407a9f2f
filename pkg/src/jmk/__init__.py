"""Tridiagonal (J-matrix) representation of free radial scattering in a Laguerre basis.

Submodules
----------
core      channel, energy and coefficient types; error hierarchy
specfun   orthogonal polynomials, Bessel functions, hypergeometric series
basis     Laguerre basis, its dual and Gauss-Laguerre rules
jmatrix   the tridiagonal operator and the sine-/cosine-like coefficients
synth     basis-sum synthesis and the analytic reference solutions
greens    Green's-function route to the regularized irregular solution
scatter   model potentials and phase shifts
cli       the ``jmk`` command
"""

__version__ = "0.1.0"

from .core import (
    Channel,
    CoefficientKind,
    CoefficientVector,
    DomainError,
    EnergyPoint,
    JMKError,
    KinematicEndpointError,
    NumericalError,
    SpectralPoleError,
    UsageError,
    energy_from_theta,
    make_energy_point,
)
from .jmatrix import (
    COSINE_ASYMPTOTIC_SCALE,
    cosine_coefficients,
    inhomogeneity_strength,
    j_matrix,
    normalization_constant,
    sine_coefficients,
)
from .scatter import PotentialModel, phase_shift
from .synth import chi_irr, chi_reg, synthesize

__all__ = [
    "COSINE_ASYMPTOTIC_SCALE",
    "Channel",
    "CoefficientKind",
    "CoefficientVector",
    "DomainError",
    "EnergyPoint",
    "JMKError",
    "KinematicEndpointError",
    "NumericalError",
    "PotentialModel",
    "SpectralPoleError",
    "UsageError",
    "__version__",
    "chi_irr",
    "chi_reg",
    "cosine_coefficients",
    "energy_from_theta",
    "inhomogeneity_strength",
    "j_matrix",
    "make_energy_point",
    "normalization_constant",
    "phase_shift",
    "sine_coefficients",
    "synthesize",
]

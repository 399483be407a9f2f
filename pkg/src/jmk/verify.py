"""Executable invariant suites behind ``jmk verify``.

Each suite returns a list of :class:`Check` records (measured value,
threshold, pass flag) so the CLI can report them without interpretation.
Residuals are measured against the largest term over the whole vector, so
energies where some coefficients vanish exactly (``y = 0``) are handled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import dual_table, gauss_laguerre_nodes, phi_table
from .core import Channel, CoefficientKind, UsageError, make_energy_point
from .greens import RegularizerSpec, beta_parameter
from .jmatrix import (
    apply_j,
    cosine_coefficient_nonterminating,
    cosine_coefficients,
    energy_ode_residual,
    expected_initial_inhomogeneity,
    inhomogeneity_strength,
    initial_relation_residual,
    j_element,
    j_element_by_quadrature,
    j_matrix,
    recursion_residual,
    sine_coefficients,
)

DEFAULT_ENERGIES = (0.05, 0.125, 0.5, 1.0, 3.0)


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    threshold: float
    passed: bool

    @classmethod
    def upper(cls, suite, name, value, threshold):
        value = float(value)
        return cls(suite, name, value, threshold, bool(value <= threshold))

    @classmethod
    def lower(cls, suite, name, value, threshold):
        value = float(value)
        return cls(suite, name, value, threshold, bool(value >= threshold))


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def suite_recursion(channel, energies, N):
    out = []
    for en in energies:
        s = sine_coefficients(channel, en, N)
        c = cosine_coefficients(channel, en, N)
        tag = f"E={en.E!r}"
        out.append(Check.upper("recursion", f"sine recursion {tag}", np.max(np.abs(recursion_residual(s, "vector"))), 1e-11))
        out.append(Check.upper("recursion", f"cosine recursion {tag}", np.max(np.abs(recursion_residual(c, "vector"))), 1e-11))
        out.append(Check.upper("recursion", f"sine initial relation {tag}", abs(initial_relation_residual(s)), 1e-12))
        out.append(
            Check.upper(
                "recursion",
                f"cosine initial relation {tag}",
                _rel(initial_relation_residual(c), expected_initial_inhomogeneity(channel, en)),
                1e-10,
            )
        )
    return out


def _row_scale(channel, en, v):
    J = j_matrix(channel, en, v.size)
    scale = np.abs(J.diag * v)
    scale[:-1] += np.abs(J.sup * v[1:])
    scale[1:] += np.abs(J.sub * v[:-1])
    return np.full(v.size - 1, scale[:-1].max())


def suite_operator(channel, energies, N):
    out = []
    for en in energies:
        tag = f"E={en.E!r}"
        J = j_matrix(channel, en, N)
        sym = np.max(np.abs(J.sup - J.sub) / np.maximum(np.abs(J.sup), 1e-300))
        out.append(Check.upper("operator", f"symmetry {tag}", sym, 1e-12))
        s = sine_coefficients(channel, en, N + 1).values
        res = np.abs(apply_j(channel, en, s)) / _row_scale(channel, en, s)
        out.append(Check.upper("operator", f"J s = 0 {tag}", res.max(), 1e-10))
        c = cosine_coefficients(channel, en, N + 1).values
        jc = apply_j(channel, en, c)
        beta = inhomogeneity_strength(channel, en)
        scale = _row_scale(channel, en, c)
        res = np.abs(jc[1:]) / scale[1:]
        out.append(Check.upper("operator", f"J c = 0 for n >= 1 {tag}", res.max(), 1e-10))
        out.append(Check.upper("operator", f"(J c)_0 = beta {tag}", _rel(jc[0], beta), 1e-10))
    en = energies[0]
    worst_val, worst_band = 0.0, 0.0
    # far-band entries are judged against the size of the band entries in the same row
    band = [max(abs(j_element(n, m, channel, en)) for m in range(max(n - 1, 0), n + 2)) for n in range(6)]
    for n in range(6):
        for m in range(6):
            q = j_element_by_quadrature(n, m, channel, en)
            if abs(n - m) <= 1:
                worst_val = max(worst_val, _rel(q, j_element(n, m, channel, en)))
            else:
                worst_band = max(worst_band, abs(q) / band[n])
    out.append(Check.upper("operator", "J by quadrature (n, m < 6)", worst_val, 1e-8))
    out.append(Check.upper("operator", "band structure by quadrature", worst_band, 1e-9))
    return out


def suite_normalization(channel, energies, N):
    out = []
    spec = RegularizerSpec.classic()
    for en in energies:
        tag = f"E={en.E!r}"
        b = beta_parameter(spec, channel, en)
        s0 = sine_coefficients(channel, en, 2).values[0]
        out.append(Check.upper("normalization", f"beta vs inhomogeneity {tag}", _rel(b, inhomogeneity_strength(channel, en)), 1e-10))
        out.append(Check.upper("normalization", f"beta vs k/(2 s_0) {tag}", _rel(b, en.k / (2 * s0)), 1e-10))
    return out


def suite_transform(channel, energies, N):
    out = []
    for en in energies:
        c = cosine_coefficients(channel, en, 11).values
        # individual c_n pass near zero, so measure against the largest entry
        scale = np.max(np.abs(c))
        worst = max(abs(cosine_coefficient_nonterminating(channel, en, n) - c[n]) / scale for n in range(11))
        out.append(Check.upper("transform", f"non-terminating vs closed form E={en.E!r}", worst, 1e-10))
    return out


def suite_ode(channel, energies, N):
    out = []
    for kind in CoefficientKind:
        orders = []
        for n in (0, 3, 10):
            for y in (-0.6, 0.0, 0.6):
                r1 = abs(energy_ode_residual(kind, n, channel.ell, y, 1e-2))
                r2 = abs(energy_ode_residual(kind, n, channel.ell, y, 5e-3))
                if r1 > 1e-9:  # otherwise rounding, not truncation, dominates
                    orders.append(math.log2(r1 / r2))
        value = min(orders) if orders else 2.0
        out.append(Check.lower("ode", f"{kind.value} residual order", value, 1.8))
    return out


def suite_biorthogonality(channel, energies, N):
    size = 16
    x, w = gauss_laguerre_nodes(size + channel.ell + 4, 2 * channel.ell + 1)
    r = x / channel.lam
    # phi_n phi_dual_m carries x^(2l+1) e^-x times a polynomial; divide it out
    weight = w / (x ** (2 * channel.ell + 1) * np.exp(-x)) / channel.lam
    gram = (phi_table(size, channel, r) * weight) @ dual_table(size, channel, r).T
    err = np.max(np.abs(gram - np.eye(size)))
    return [Check.upper("biorthogonality", f"<phi_n|phi_dual_m> n,m < {size}", err, 1e-10)]


SUITES = {
    "recursion": suite_recursion,
    "operator": suite_operator,
    "normalization": suite_normalization,
    "transform": suite_transform,
    "ode": suite_ode,
    "biorthogonality": suite_biorthogonality,
}


def run_suite(name: str, channel: Channel, energies=None, N: int = 50) -> list[Check]:
    """Run one suite (or ``"all"``) over ``energies`` (default: a five-point grid)."""
    if energies is None:
        energies = [make_energy_point(E, channel) for E in DEFAULT_ENERGIES]
    if name != "all" and name not in SUITES:
        raise UsageError(f"unknown suite {name!r} (expected 'all' or one of {', '.join(SUITES)})")
    names = list(SUITES) if name == "all" else [name]
    out = []
    for n in names:
        out.extend(SUITES[n](channel, list(energies), N))
    return out

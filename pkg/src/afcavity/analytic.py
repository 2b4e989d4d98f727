"""Closed-form reflection and efficiency expressions.

Two pictures coexist here.  The *mode* picture describes the cavity by a
single field decay rate ``kappa`` and the ensemble by an absorption rate
``gamma_abs``; it holds at high finesse.  The *mirror* picture keeps the
reflectivities R1, R2 and the comb-averaged single-pass depth d~ and sums
over round trips.  The two meet through ``gamma_abs / kappa = 2 d~ / T1``.

All efficiencies are intensity ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import model
from .errors import ParameterError, UnphysicalGainError, ValidityError


@dataclass(frozen=True)
class SteadyStateResult:
    reflection_amplitude: complex
    reflection_intensity: float
    absorbed_fraction: float


@dataclass(frozen=True)
class EfficiencyBreakdown:
    eta_total: float
    eta_dephasing: float
    eta_cavity: float
    echo_amplitude_ratio: float


def _check_rates(gamma_abs, kappa):
    if not kappa > 0:
        raise ParameterError(f"invalid cavity: kappa must be positive, got {kappa!r}")
    if not gamma_abs >= 0:
        raise ParameterError(f"gamma_abs must be >= 0, got {gamma_abs!r}")


def _check_eta_f(eta_f):
    if not (0.0 <= eta_f <= 1.0):
        raise ParameterError(f"eta_f must lie in [0, 1], got {eta_f!r}")


def reflection_high_finesse(gamma_abs, kappa):
    """Adiabatic reflection (kappa - Gamma) / (kappa + Gamma) of the loaded cavity."""
    _check_rates(gamma_abs, kappa)
    return (kappa - gamma_abs) / (kappa + gamma_abs)


def steady_state_high_finesse(gamma_abs, kappa) -> SteadyStateResult:
    r = reflection_high_finesse(gamma_abs, kappa)
    return SteadyStateResult(complex(r), r * r, 1.0 - r * r)


def echo_amplitude_high_finesse(gamma_abs, kappa, eta_f):
    """Echo amplitude -2 Gamma sqrt(eta_F) / (kappa + Gamma) relative to the input.

    This form assumes the cavity field during absorption already sits at the
    impedance-matched value, so it is exact only at ``gamma_abs == kappa``
    (where it equals ``-sqrt(eta_f)``).  Away from matching use
    :func:`echo_amplitude_mode_model`.
    """
    _check_rates(gamma_abs, kappa)
    _check_eta_f(eta_f)
    return -2.0 * gamma_abs * math.sqrt(eta_f) / (kappa + gamma_abs)


def echo_amplitude_mode_model(gamma_abs, kappa, eta_f):
    """Echo amplitude -4 kappa Gamma sqrt(eta_F) / (kappa + Gamma)^2.

    Product of the absorption amplitude into the ensemble and the emission
    amplitude out of the input mirror; this is what the time-domain solver
    reproduces for any cooperativity, and the high-finesse limit of
    :func:`total_efficiency`.
    """
    _check_rates(gamma_abs, kappa)
    _check_eta_f(eta_f)
    return -4.0 * kappa * gamma_abs * math.sqrt(eta_f) / (kappa + gamma_abs) ** 2


def reflection_exact(r1, r2, d_tilde):
    """On-resonance amplitude reflection of the absorbing asymmetric cavity."""
    a = math.sqrt(r1 * r2) * math.exp(-d_tilde)
    if not a < 1.0:
        raise UnphysicalGainError(
            f"round-trip amplitude sqrt(r1 r2) exp(-d) = {a:g} >= 1 (denominator <= 0)"
        )
    return (-math.sqrt(r1) + math.sqrt(r2) * math.exp(-d_tilde)) / (1.0 - a)


def steady_state_exact(r1, r2, d_tilde) -> SteadyStateResult:
    r = reflection_exact(r1, r2, d_tilde)
    return SteadyStateResult(complex(r), r * r, 1.0 - r * r)


def single_pass_efficiency(d_tilde, eta_f=1.0):
    """Forward readout without a cavity: eta_F d~^2 exp(-d~)."""
    if not d_tilde >= 0:
        raise ParameterError(f"d_tilde must be >= 0, got {d_tilde!r}")
    _check_eta_f(eta_f)
    return eta_f * d_tilde**2 * math.exp(-d_tilde)


def sqrt_efficiency_cavity(r1, r2, d_tilde):
    """Round-trip-summed readout amplitude without the dephasing factor.

    2 d~ e^{-d~} T1 sqrt(R2) / (1 - sqrt(R1 R2) e^{-d~})^2
    """
    a = math.sqrt(r1 * r2) * math.exp(-d_tilde)
    if not a < 1.0:
        raise UnphysicalGainError(f"round-trip amplitude {a:g} >= 1")
    return 2.0 * d_tilde * math.exp(-d_tilde) * (1.0 - r1) * math.sqrt(r2) / (1.0 - a) ** 2


def total_efficiency(r1, r2, d_tilde, finesse_a) -> EfficiencyBreakdown:
    """Storage-and-recall efficiency of the AFC memory in the asymmetric cavity."""
    for name, v in (("r1", r1), ("r2", r2)):
        if not (0.0 <= v <= 1.0):
            raise ParameterError(f"{name} must lie in [0, 1], got {v!r}")
    if not d_tilde >= 0:
        raise ParameterError(f"d_tilde must be >= 0, got {d_tilde!r}")
    if not finesse_a > 1:
        raise ParameterError(f"finesse_a must exceed 1, got {finesse_a!r}")
    eta_dephasing = model.eta_f(finesse_a)
    if d_tilde == 0:
        # nothing is absorbed, so nothing is recalled (also covers the 0/0
        # of a lossless empty cavity)
        return EfficiencyBreakdown(0.0, eta_dephasing, 0.0, -0.0)
    amp_cavity = sqrt_efficiency_cavity(r1, r2, d_tilde)
    root = amp_cavity * math.sqrt(eta_dephasing)
    if root > 1.0 + 1e-12:
        raise ValidityError(
            f"sqrt(eta) = {root:.6g} > 1: round-trip sum outside its validity domain"
        )
    eta_cavity = amp_cavity**2
    return EfficiencyBreakdown(
        eta_total=root * root,
        eta_dephasing=eta_dephasing,
        eta_cavity=eta_cavity,
        echo_amplitude_ratio=-root,
    )


def total_efficiency_limit(epsilon, d_tilde, eta_f=1.0):
    """Small-transmission form (2 d~ sqrt(eta_F) / (eps + d~))^2, sqrt(R1) = 1 - eps.

    Coincides with :func:`total_efficiency` at ``epsilon == d_tilde``
    (R2 = 1, d~ << 1).  Away from that line the high-finesse limit of the
    round-trip sum carries an extra factor (2 eps / (eps + d~))^2, see
    :func:`echo_amplitude_mode_model`.
    """
    if not (epsilon >= 0 and d_tilde >= 0):
        raise ParameterError("epsilon and d_tilde must be >= 0")
    if epsilon == 0 and d_tilde == 0:
        raise ParameterError("degenerate input: epsilon = d_tilde = 0")
    _check_eta_f(eta_f)
    return (2.0 * d_tilde * math.sqrt(eta_f) / (epsilon + d_tilde)) ** 2

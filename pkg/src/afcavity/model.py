"""Parameter types and closed-form relations for the cavity and the comb.

Unit conventions used throughout the package:

* frequencies and rates are angular (rad/s) unless a name ends in ``_hz``;
* times are in seconds, lengths in meters;
* ``kappa`` is the *field* (amplitude) decay rate of the cavity mode, so the
  intensity FWHM linewidth in Hz is ``kappa / pi``.  The conversion lives in
  :func:`kappa_from_linewidth` / :func:`linewidth_from_kappa` and nowhere else.
* optical depths are intensity depths for a single pass through the crystal.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

from .errors import DegenerateCavityError, ParameterError

#: speed of light in vacuum, m/s
C_LIGHT = 299_792_458.0

#: FWHM of a unit-height Gaussian relative to its area, sqrt(pi / (4 ln 2))
GAUSSIAN_AREA_PER_FWHM = math.sqrt(math.pi / (4.0 * math.log(2.0)))


class ToothShape(str, enum.Enum):
    GAUSSIAN = "gaussian"
    SQUARE = "square"


def _check_reflectivity(name, value):
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise ParameterError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class CavityParams:
    """Two-mirror cavity around the memory crystal.

    Parameters
    ----------
    r1 : float
        Intensity reflectivity of the input (coupling) mirror.
    r2 : float
        Intensity reflectivity of the back mirror.
    length : float
        One-way cavity length in meters.
    """

    r1: float
    r2: float
    length: float

    def __post_init__(self):
        _check_reflectivity("r1", self.r1)
        _check_reflectivity("r2", self.r2)
        if not self.length > 0:
            raise ParameterError(f"length must be positive, got {self.length!r}")
        if self.r1 >= self.r2:
            warnings.warn(
                f"r1={self.r1} >= r2={self.r2}: not an asymmetric memory cavity",
                stacklevel=3,
            )

    @property
    def t1(self):
        return 1.0 - self.r1

    @property
    def t2(self):
        return 1.0 - self.r2


@dataclass(frozen=True)
class CombParams:
    """Atomic frequency comb description.

    ``delta`` is the tooth spacing in rad/s and ``finesse_a`` the ratio of
    spacing to tooth FWHM.  ``num_teeth`` must be odd so that one tooth sits
    on the carrier; a single tooth is allowed for kernel checks, anything
    that needs rephasing requires at least three.
    """

    delta: float
    finesse_a: float
    peak_depth: float = 1.0
    tooth_shape: ToothShape = ToothShape.GAUSSIAN
    num_teeth: int = 21
    gamma_h: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "tooth_shape", ToothShape(self.tooth_shape))
        if not self.delta > 0:
            raise ParameterError(f"delta must be positive, got {self.delta!r}")
        if not self.finesse_a > 1:
            raise ParameterError(f"finesse_a must exceed 1, got {self.finesse_a!r}")
        if not self.peak_depth >= 0:
            raise ParameterError(f"peak_depth must be >= 0, got {self.peak_depth!r}")
        if int(self.num_teeth) != self.num_teeth or self.num_teeth < 1 or self.num_teeth % 2 == 0:
            raise ParameterError(f"num_teeth must be a positive odd integer, got {self.num_teeth!r}")
        if not self.gamma_h >= 0:
            raise ParameterError(f"gamma_h must be >= 0, got {self.gamma_h!r}")

    @property
    def tooth_width(self):
        """Tooth FWHM in rad/s."""
        return self.delta / self.finesse_a

    @property
    def echo_time(self):
        """Rephasing time 2*pi/delta in seconds."""
        return 2.0 * math.pi / self.delta

    @property
    def span(self):
        """Total comb width num_teeth * delta (rad/s)."""
        return self.num_teeth * self.delta


@dataclass(frozen=True)
class DerivedCavity:
    free_spectral_range: float  # Hz
    finesse_c: float
    linewidth: float  # Hz, intensity FWHM
    kappa: float  # rad/s, field decay rate
    round_trip_time: float  # s


def kappa_from_linewidth(linewidth_hz):
    """Field decay rate (rad/s) of a mode with intensity FWHM ``linewidth_hz``."""
    return math.pi * linewidth_hz


def linewidth_from_kappa(kappa):
    return kappa / math.pi


def cavity_finesse(r1, r2):
    """Finesse pi (R1 R2)^(1/4) / (1 - sqrt(R1 R2)) of a two-mirror cavity."""
    _check_reflectivity("r1", r1)
    _check_reflectivity("r2", r2)
    rr = math.sqrt(r1 * r2)
    if rr >= 1.0:
        raise DegenerateCavityError("degenerate lossless cavity: r1*r2 = 1, finesse diverges")
    return math.pi * math.sqrt(rr) / (1.0 - rr)


def derive_cavity(cavity: CavityParams) -> DerivedCavity:
    fsr = C_LIGHT / (2.0 * cavity.length)
    finesse = cavity_finesse(cavity.r1, cavity.r2)
    if finesse == 0.0:
        raise DegenerateCavityError("zero finesse: at least one mirror must reflect")
    linewidth = fsr / finesse
    return DerivedCavity(
        free_spectral_range=fsr,
        finesse_c=finesse,
        linewidth=linewidth,
        kappa=kappa_from_linewidth(linewidth),
        round_trip_time=2.0 * cavity.length / C_LIGHT,
    )


def matched_r1(r2, d_tilde):
    """Input-mirror reflectivity that cancels the on-resonance reflection.

    Solves sqrt(R1) = sqrt(R2) exp(-d_tilde) for R1.
    """
    if not (0.0 < r2 <= 1.0):
        raise ParameterError(f"r2 must lie in (0, 1], got {r2!r}")
    if not d_tilde >= 0:
        raise ParameterError(f"d_tilde must be >= 0, got {d_tilde!r}")
    return r2 * math.exp(-2.0 * d_tilde)


def averaged_depth(comb: CombParams):
    """Peak depth averaged over one comb period.

    Square teeth cover a fraction 1/F_A of each period.  Gaussian teeth of
    unit height and FWHM gamma have area gamma * sqrt(pi / (4 ln 2)).
    """
    d = comb.peak_depth / comb.finesse_a
    if comb.tooth_shape is ToothShape.GAUSSIAN:
        d *= GAUSSIAN_AREA_PER_FWHM
    return d


def eta_f(finesse_a):
    """Dephasing factor exp(-7/F_A^2) for Gaussian teeth."""
    if not finesse_a > 0:
        raise ParameterError(f"finesse_a must be positive, got {finesse_a!r}")
    if math.isinf(finesse_a):
        return 1.0
    return min(1.0, max(0.0, math.exp(-7.0 / finesse_a**2)))


def cooperativity(d_tilde, t1):
    """High-finesse cooperativity Gamma/kappa = 2 d_tilde / T1."""
    if not t1 > 0:
        raise ParameterError(f"t1 must be positive, got {t1!r}")
    return 2.0 * d_tilde / t1


def t1_for_cooperativity(d_tilde, c):
    """Inverse of :func:`cooperativity` for the input-mirror transmission."""
    if not c > 0:
        raise ParameterError(f"cooperativity must be positive, got {c!r}")
    return 2.0 * d_tilde / c

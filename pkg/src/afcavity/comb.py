"""Sampled atomic frequency comb and its time-domain kernel."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DiscretizationError, ParameterError
from .model import CombParams, ToothShape

_FOUR_LN2 = 4.0 * math.log(2.0)


@dataclass(frozen=True, eq=False)
class SpectralComb:
    """Comb sampled on a uniform detuning grid.

    ``density`` is expressed in units where the single-pass optical depth at
    detuning ``w`` equals ``density(w)``; one unit of density corresponds to
    one atom per rad/s.  Teeth sit exactly on grid points.
    """

    detunings: np.ndarray
    density: np.ndarray
    params: CombParams
    bin_width: float

    def __post_init__(self):
        self.detunings.setflags(write=False)
        self.density.setflags(write=False)

    @property
    def weights(self):
        return self.density * self.bin_width

    @property
    def total_weight(self):
        """N, the integrated spectral weight."""
        return float(np.sum(self.weights))

    @property
    def bins_per_period(self):
        return int(round(self.params.delta / self.bin_width))

    def mean_depth(self, center=0.0):
        """Depth averaged over the comb period centered on ``center``.

        Bins on the period boundary are counted with weight 1/2.
        """
        half = self.params.delta / 2.0
        x = self.detunings - center
        w = np.where(np.abs(x) < half - 1e-9 * self.bin_width, 1.0, 0.0)
        w = np.where(np.isclose(np.abs(x), half, rtol=0, atol=1e-6 * self.bin_width), 0.5, w)
        return float(np.sum(w * self.density) * self.bin_width / self.params.delta)

    def coarse_density(self, center=0.0):
        """Period-averaged density n-bar at ``center`` (atoms per rad/s)."""
        return self.mean_depth(center)

    def __add__(self, other):
        if not isinstance(other, SpectralComb):
            return NotImplemented
        if self.detunings.shape != other.detunings.shape or not np.allclose(
            self.detunings, other.detunings, rtol=0, atol=1e-9 * self.bin_width
        ):
            raise ParameterError("can only add combs sampled on the same grid")
        return SpectralComb(
            self.detunings.copy(), self.density + other.density, self.params, self.bin_width
        )

    def to_text(self, path):
        """Write two columns: detuning in Hz and single-pass depth."""
        data = np.column_stack([self.detunings / (2.0 * math.pi), self.density])
        np.savetxt(path, data, fmt="%.9g", header="detuning_Hz depth", comments="# ")


@dataclass(frozen=True, eq=False)
class CombKernel:
    times: np.ndarray
    values: np.ndarray

    def peak_times(self):
        """Times of the local maxima of |values| (interior points only)."""
        a = np.abs(self.values)
        idx = np.nonzero((a[1:-1] > a[:-2]) & (a[1:-1] >= a[2:]))[0] + 1
        return self.times[idx]


def _tooth_centers(params):
    k = np.arange(params.num_teeth) - params.num_teeth // 2
    return k * params.delta


def build_comb(params: CombParams, resolution=8) -> SpectralComb:
    """Sample the comb with at least ``resolution`` bins per tooth FWHM.

    The bin width is chosen so that an integer number of bins fits into one
    period, which keeps every tooth centered on a grid point.  Gaussian teeth
    are point-sampled; square teeth are cell-averaged so that the sampled
    coverage of each period is exactly 1/F_A.
    """
    if resolution < 8:
        raise DiscretizationError(f"resolution must be >= 8 bins per tooth FWHM, got {resolution}")
    delta = params.delta
    gamma = params.tooth_width
    per_period = int(math.ceil(params.finesse_a * resolution - 1e-9))
    bin_width = delta / per_period
    half_extent = (params.num_teeth // 2) * delta + 3.5 * gamma
    n_half = int(math.ceil(half_extent / bin_width))
    j = np.arange(-n_half, n_half + 1)
    w = j * bin_width

    centers = _tooth_centers(params)
    if params.peak_depth == 0:
        density = np.zeros_like(w)
    elif params.tooth_shape is ToothShape.GAUSSIAN:
        x = (w[:, None] - centers[None, :]) / gamma
        density = params.peak_depth * np.exp(-_FOUR_LN2 * x * x).sum(axis=1)
    else:
        lo = w[:, None] - bin_width / 2
        hi = w[:, None] + bin_width / 2
        overlap = np.minimum(hi, centers + gamma / 2) - np.maximum(lo, centers - gamma / 2)
        density = params.peak_depth * np.clip(overlap, 0.0, None).sum(axis=1) / bin_width
    return SpectralComb(w, density, params, bin_width)


def max_kernel_step(comb: SpectralComb):
    """Largest time step that does not alias the sampled spectrum."""
    return math.pi / float(np.max(np.abs(comb.detunings)))


def kernel_at(comb: SpectralComb, t):
    """n~(t) = sum_j w_j exp(-i omega_j t) at arbitrary times."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t.shape, dtype=complex)
    weights = comb.weights
    chunk = max(1, 2_000_000 // max(1, comb.detunings.size))
    for start in range(0, t.size, chunk):
        tt = t[start : start + chunk]
        out[start : start + chunk] = np.exp(-1j * np.outer(tt, comb.detunings)) @ weights
    return out


def kernel(comb: SpectralComb, t_max, time_step=None) -> CombKernel:
    """Fourier transform of the comb on a uniform grid from 0 to ``t_max``.

    By default the step divides the rephasing time 2*pi/delta exactly, so
    every echo peak falls on a grid point.
    """
    period = comb.params.echo_time
    if t_max < 2.5 * period:
        raise ParameterError(f"t_max must be >= 2.5 * 2pi/delta = {2.5 * period:g} s")
    limit = max_kernel_step(comb)
    if time_step is None:
        time_step = period / (math.floor(period / limit) + 1)
    if not time_step < limit:
        raise DiscretizationError(
            f"time step {time_step:g} s aliases the comb; must be < pi/max|detuning| = {limit:g} s"
        )
    n = int(math.floor(t_max / time_step + 1e-9)) + 1
    times = np.arange(n) * time_step
    return CombKernel(times, kernel_at(comb, times))


def dephasing_factor(comb: SpectralComb):
    """|n~(2 pi/delta) / n~(0)|^2, the intensity rephasing fidelity of the first echo."""
    if comb.params.num_teeth < 3:
        raise ParameterError("dephasing factor needs at least three teeth")
    n0, n1 = kernel_at(comb, [0.0, comb.params.echo_time])
    if n0 == 0:
        return 0.0
    return float(min(1.0, abs(n1 / n0) ** 2))

"""Time-domain cavity/ensemble solver.

Integrates the mean-field equations of a single cavity mode coupled to an
inhomogeneously broadened ensemble sampled on the comb grid::

    dE/dt       = -kappa E + sqrt(2 kappa_in) E_in + i g sum_j w_j sigma_j
    dsigma_j/dt = -i omega_j sigma_j - gamma_h sigma_j + i g E
    E_out       = -E_in + sqrt(2 kappa_in) E

with ``kappa = kappa_in + kappa_loss``.  The atomic variables are advanced in
the interaction picture ``s_j = sigma_j exp(i omega_j t)`` with a classical
fixed-step RK4 scheme, so the step is set by the cavity and pulse envelopes
rather than by the detuning phases.

Energy bookkeeping uses ``|E|^2 + sum_j w_j |sigma_j|^2``, which the coupling
terms conserve exactly.
"""

from __future__ import annotations

import dataclasses
import math
import struct
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .comb import SpectralComb, kernel_at
from .errors import (
    CalibrationError,
    ConfigurationError,
    IntegratorBlowupError,
    ParameterError,
)
from .model import CavityParams, derive_cavity

_SQRT_8LN2 = math.sqrt(8.0 * math.log(2.0))


class RegimeWarning(UserWarning):
    """Parameters leave the regime where the closed-form picture applies."""


@dataclass(frozen=True)
class InputPulse:
    """Gaussian input pulse of energy ``|amplitude|^2``.

    ``fwhm_duration`` is the FWHM of ``|E_in|^2``; ``carrier_detuning`` is
    the carrier offset from the comb center in rad/s.
    """

    fwhm_duration: float
    arrival_time: float
    carrier_detuning: float = 0.0
    shape: str = "gaussian"
    amplitude: complex = 1.0

    def __post_init__(self):
        if self.shape != "gaussian":
            raise ParameterError(f"unsupported pulse shape {self.shape!r}")
        if not self.fwhm_duration > 0:
            raise ParameterError("fwhm_duration must be positive")

    @property
    def intensity_sigma(self):
        return self.fwhm_duration / _SQRT_8LN2

    @property
    def spectral_fwhm_hz(self):
        """Intensity-spectrum FWHM in Hz (4 ln 2 / (2 pi fwhm_duration))."""
        return 4.0 * math.log(2.0) / (2.0 * math.pi * self.fwhm_duration)

    def field(self, t):
        t = np.asarray(t, dtype=float)
        sig = self.intensity_sigma
        amp = (2.0 * math.pi * sig * sig) ** -0.25
        x = t - self.arrival_time
        env = (amp * self.amplitude) * np.exp(-(x * x) / (4.0 * sig * sig))
        if self.carrier_detuning:
            return env * np.exp(-1j * self.carrier_detuning * x)
        return np.asarray(env, dtype=complex)


@dataclass(frozen=True)
class ModeCavity:
    """Single-mode cavity: total field decay rate and the input-mirror share."""

    kappa: float
    kappa_in: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise ParameterError(f"invalid cavity: kappa must be positive, got {self.kappa!r}")
        if not (0 < self.kappa_in <= self.kappa * (1 + 1e-12)):
            raise ParameterError("kappa_in must lie in (0, kappa]")

    @property
    def kappa_loss(self):
        return max(0.0, self.kappa - self.kappa_in)

    @classmethod
    def lossless(cls, kappa):
        return cls(kappa, kappa)

    @classmethod
    def from_params(cls, cavity: CavityParams):
        """Split the decay rate between the mirrors by their log-reflectivities."""
        derived = derive_cavity(cavity)
        if cavity.r2 >= 1.0:
            return cls(derived.kappa, derived.kappa)
        if cavity.r1 <= 0.0:
            raise ParameterError("r1 = 0 leaves no cavity mode")
        share = math.log(cavity.r1) / math.log(cavity.r1 * cavity.r2)
        return cls(derived.kappa, derived.kappa * share)


CavityLike = Union[ModeCavity, CavityParams, float]


def as_mode_cavity(cavity: CavityLike) -> ModeCavity:
    if isinstance(cavity, ModeCavity):
        return cavity
    if isinstance(cavity, CavityParams):
        return ModeCavity.from_params(cavity)
    return ModeCavity.lossless(float(cavity))


@dataclass(frozen=True)
class SimulationConfig:
    """Discretization controls; ``None`` picks the largest admissible value."""

    time_step: Optional[float] = None
    duration: Optional[float] = None
    resolution: int = 8


@dataclass(eq=False)
class EnsembleState:
    detunings: np.ndarray
    sigma: np.ndarray
    weights: np.ndarray
    coupling: float

    @property
    def energy(self):
        return float(np.dot(self.weights, np.abs(self.sigma) ** 2))


_BINARY_MAGIC = b"AFCF"
_BINARY_HEADER = struct.Struct("<4sIQI")


@dataclass(eq=False)
class FieldRecord:
    """Sampled fields of one run.

    ``atomic_energy`` is ``sum_j w_j |sigma_j|^2`` at each sample.
    """

    times: np.ndarray
    e_in: np.ndarray
    e_cavity: np.ndarray
    e_out: np.ndarray
    atomic_energy: np.ndarray
    config: dict = field(default_factory=dict)
    final_state: Optional[EnsembleState] = None

    COLUMNS = ("t", "re_in", "im_in", "re_cavity", "im_cavity", "re_out", "im_out")

    def columns(self):
        return np.column_stack(
            [
                self.times,
                self.e_in.real,
                self.e_in.imag,
                self.e_cavity.real,
                self.e_cavity.imag,
                self.e_out.real,
                self.e_out.imag,
            ]
        )

    def to_text(self, path):
        np.savetxt(path, self.columns(), fmt="%.9g", header=" ".join(self.COLUMNS), comments="# ")

    def to_binary(self, path):
        """Little-endian dump: magic ``AFCF``, uint32 version, uint64 sample
        count, uint32 column count, then float64 rows of :attr:`COLUMNS`.
        """
        data = np.ascontiguousarray(self.columns(), dtype="<f8")
        with open(path, "wb") as fh:
            fh.write(_BINARY_HEADER.pack(_BINARY_MAGIC, 1, data.shape[0], data.shape[1]))
            fh.write(data.tobytes())

    @staticmethod
    def read_binary(path):
        """Return the (samples, columns) float64 array written by :meth:`to_binary`."""
        with open(path, "rb") as fh:
            raw = fh.read()
        magic, version, n, ncol = _BINARY_HEADER.unpack_from(raw)
        if magic != _BINARY_MAGIC or version != 1:
            raise ValueError("not an afcavity field record")
        body = np.frombuffer(raw, dtype="<f8", offset=_BINARY_HEADER.size)
        return body.reshape(n, ncol)


@dataclass(frozen=True)
class EfficiencyReport:
    """Energy fractions of one run, normalized to the input energy.

    ``echo_time`` is the absolute centroid of the echo window and
    ``echo_delay`` the same measured from the pulse arrival time.
    ``integrator_loss`` is whatever the other terms fail to account for.
    """

    reflected_during_input: float
    echo_efficiency: float
    echo_time: float
    echo_delay: float
    residual: float
    energy_in_atoms_at_end: float
    cavity_energy_at_end: float = 0.0
    mirror_loss: float = 0.0
    homogeneous_loss: float = 0.0
    integrator_loss: float = 0.0

    def as_dict(self):
        return dataclasses.asdict(self)


# ---------------------------------------------------------------------------
# regime checks


def regime_ratios(pulse: InputPulse, comb: SpectralComb, kappa):
    """Ratios that must exceed one for the adiabatic, multi-tooth picture."""
    bw = pulse.spectral_fwhm_hz
    p = comb.params
    return {
        "pulse_bw_over_spacing": bw / (p.delta / (2 * math.pi)),
        "cavity_linewidth_over_5bw": (kappa / math.pi) / (5 * bw),
        "comb_span_over_5bw": (p.span / (2 * math.pi)) / (5 * bw),
    }


def check_regime(pulse, comb, kappa):
    ratios = regime_ratios(pulse, comb, kappa)
    bad = {k: v for k, v in ratios.items() if v <= 1.0}
    if bad:
        detail = ", ".join(f"{k}={v:.3g}" for k, v in bad.items())
        warnings.warn(f"outside adiabatic multi-tooth regime: {detail}", RegimeWarning, stacklevel=3)
    return ratios


# ---------------------------------------------------------------------------
# coupling calibration


def _response_kernel(comb: SpectralComb, detuning=0.0):
    """Polarization response K_j to a constant cavity field held for half a period.

    sigma_j = i g E K_j with K_j = (1 - exp(-(i w_j' + gamma_h) tau)) / (i w_j' + gamma_h),
    w_j' = omega_j - detuning and tau = pi / delta.  Half a period is the
    longest hold before the comb rephases, and for delta-like teeth the
    finite-span ripple of the response vanishes exactly there.
    """
    tau = math.pi / comb.params.delta
    z = 1j * (comb.detunings - detuning) + comb.params.gamma_h
    small = np.abs(z) * tau < 1e-8
    zs = np.where(small, 1.0, z)
    return np.where(small, tau, -np.expm1(-zs * tau) / zs)


def absorption_rate(comb: SpectralComb, coupling, detuning=0.0):
    """Quasi-steady absorption rate Gamma = g^2 sum_j w_j K_j (complex)."""
    return coupling**2 * complex(np.dot(comb.weights, _response_kernel(comb, detuning)))


def steady_state_reflection(comb: SpectralComb, cavity: CavityLike, coupling, detuning=0.0, method="schur"):
    """Reflection E_out/E_in for a monochromatic drive at ``detuning``.

    The cavity field is stationary and each atomic bin responds to it as in
    :func:`_response_kernel`.  ``method="schur"`` eliminates the atoms
    analytically; ``method="dense"`` assembles and solves the full
    (1 + n_bins) linear system.
    """
    cav = as_mode_cavity(cavity)
    a = math.sqrt(2.0 * cav.kappa_in)
    if method == "schur":
        gam = absorption_rate(comb, coupling, detuning)
        e_cav = a / (cav.kappa - 1j * detuning + gam)
    elif method == "dense":
        k = _response_kernel(comb, detuning)
        n = k.size
        m = np.zeros((n + 1, n + 1), dtype=complex)
        m[0, 0] = cav.kappa - 1j * detuning
        m[0, 1:] = -1j * coupling * comb.weights
        m[1:, 0] = -1j * coupling * k
        m[np.arange(1, n + 1), np.arange(1, n + 1)] = 1.0
        rhs = np.zeros(n + 1, dtype=complex)
        rhs[0] = a
        e_cav = np.linalg.solve(m, rhs)[0]
    else:
        raise ValueError(f"unknown method {method!r}")
    return complex(-1.0 + a * e_cav)


def coarse_coupling(comb: SpectralComb, kappa, target_cooperativity):
    """Closed-form seed: Gamma = pi g^2 n-bar(0) = C kappa."""
    nbar = comb.coarse_density(0.0)
    if nbar <= 0:
        raise CalibrationError("comb has no absorption at its center")
    return math.sqrt(target_cooperativity * kappa / (math.pi * nbar))


def calibrate_coupling(comb: SpectralComb, kappa, target_cooperativity, tol=1e-9, max_iter=200):
    """Coupling g giving steady reflection (1 - C) / (1 + C) at the comb center.

    ``kappa`` is the total field decay rate of a lossless mode cavity.
    Bisects on g around the closed-form seed until the steady-state
    reflection matches the target to ``tol``.
    """
    if not target_cooperativity >= 0:
        raise ParameterError("target cooperativity must be >= 0")
    if target_cooperativity == 0:
        return 0.0
    cav = ModeCavity.lossless(kappa)
    target = (1.0 - target_cooperativity) / (1.0 + target_cooperativity)

    def refl(g):
        return steady_state_reflection(comb, cav, g).real

    lo = 0.0
    hi = coarse_coupling(comb, kappa, target_cooperativity)
    for _ in range(60):
        if refl(hi) <= target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise CalibrationError("could not bracket the target reflection")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        r = refl(mid)
        if abs(r - target) < tol:
            return mid
        if r > target:
            lo = mid
        else:
            hi = mid
    raise CalibrationError(
        f"bisection did not converge: reflection {r:.3g} vs target {target:.3g} after {max_iter} steps"
    )


# ---------------------------------------------------------------------------
# time stepping


def max_time_step(cavity: CavityLike, comb: SpectralComb, pulse: InputPulse):
    cav = as_mode_cavity(cavity)
    wmax = float(np.max(np.abs(comb.detunings)))
    return min(1.0 / (20.0 * cav.kappa), 1.0 / (20.0 * wmax), pulse.fwhm_duration / 50.0)


def _resolve_grid(cav, comb, pulse, config):
    limit = max_time_step(cav, comb, pulse)
    period = comb.params.echo_time
    if config.time_step is None:
        # largest step below the limit that divides the echo period
        h = period / math.ceil(period / limit - 1e-12)
    else:
        h = float(config.time_step)
        if not h > 0:
            raise ParameterError("time_step must be positive")
        if h > limit * (1 + 1e-12):
            raise ParameterError(f"time_step {h:g} s exceeds the stability bound {limit:g} s")
    min_duration = pulse.arrival_time + 1.5 * period
    duration = min_duration if config.duration is None else float(config.duration)
    if duration < min_duration * (1 - 1e-12):
        raise ParameterError(
            f"duration {duration:g} s shorter than arrival_time + 1.5 * 2pi/delta = {min_duration:g} s"
        )
    n_steps = int(math.ceil(duration / h - 1e-9))
    return h, n_steps


def simulate(
    cavity: CavityLike,
    comb: SpectralComb,
    pulse: InputPulse,
    config: Optional[SimulationConfig] = None,
    *,
    coupling=None,
    cooperativity=1.0,
    check=True,
) -> FieldRecord:
    """Integrate the driven cavity/ensemble equations.

    Parameters
    ----------
    cavity : ModeCavity, CavityParams or float
        A float is taken as the field decay rate of a lossless mode cavity.
    comb : SpectralComb
    pulse : InputPulse
    config : SimulationConfig, optional
    coupling : float, optional
        Ensemble coupling g.  If omitted it is calibrated to ``cooperativity``
        relative to the total decay rate.
    check : bool
        Emit :class:`RegimeWarning` when the pulse leaves the adiabatic,
        multi-tooth regime.
    """
    config = config or SimulationConfig()
    cav = as_mode_cavity(cavity)
    if coupling is None:
        coupling = calibrate_coupling(comb, cav.kappa, cooperativity)
    if check:
        check_regime(pulse, comb, cav.kappa)
    h, n_steps = _resolve_grid(cav, comb, pulse, config)

    omega = comb.detunings
    w = comb.weights
    gamma_h = comb.params.gamma_h
    kappa = cav.kappa
    a_in = math.sqrt(2.0 * cav.kappa_in)
    ig = 1j * coupling

    times = np.arange(n_steps + 1) * h
    e_in = pulse.field(times)
    e_in_half = pulse.field(times[:-1] + 0.5 * h)
    e_cav = np.empty(n_steps + 1, dtype=complex)
    atomic = np.empty(n_steps + 1)

    # overlaps sum_j w_j exp(-i omega_j d) for the stage offsets d = 0, h/2, h
    k0 = complex(np.sum(w))
    k_half, k_full = kernel_at(comb, [0.5 * h, h])
    kern = {(1, 0): k_half, (2, 0): k_full, (2, 1): k_half, (1, 1): k0}

    half_phase = np.exp(0.5j * omega * h)
    s = np.zeros(omega.size, dtype=complex)
    E = 0j
    e_cav[0] = E
    atomic[0] = 0.0
    bound = 1e3 * float(np.max(np.abs(e_in))) if np.any(e_in) else 1.0
    g_ = gamma_h
    resync = 512

    for n in range(n_steps):
        t = times[n]
        if n % resync == 0:
            p0 = np.exp(1j * omega * t)
        p1 = p0 * half_phase
        p2 = p1 * half_phase
        ws = w * s
        d0 = np.vdot(p0, ws)
        d1 = np.vdot(p1, ws)
        d2 = np.vdot(p2, ws)
        ein0, einh, ein1 = e_in[n], e_in_half[n], e_in[n + 1]

        # stage 1: s1 = s
        E1 = E
        k1E = -kappa * E1 + a_in * ein0 + ig * d0
        b10 = ig * E1  # k1s = -g_ s + b10 p0
        # stage 2: s2 = al2 s + c20 p0
        E2 = E + 0.5 * h * k1E
        al2 = 1.0 - 0.5 * h * g_
        c20 = 0.5 * h * b10
        k2E = -kappa * E2 + a_in * einh + ig * (al2 * d1 + c20 * kern[(1, 0)])
        b21 = ig * E2  # k2s = -g_ s2 + b21 p1
        # stage 3: s3 = s + h/2 k2s
        E3 = E + 0.5 * h * k2E
        al3 = 1.0 - 0.5 * h * g_ * al2
        c30 = -0.5 * h * g_ * c20
        c31 = 0.5 * h * b21
        k3E = -kappa * E3 + a_in * einh + ig * (al3 * d1 + c30 * kern[(1, 0)] + c31 * kern[(1, 1)])
        b31 = ig * E3
        # stage 4: s4 = s + h k3s
        E4 = E + h * k3E
        al4 = 1.0 - h * g_ * al3
        c40 = -h * g_ * c30
        c41 = -h * g_ * c31 + h * b31
        k4E = -kappa * E4 + a_in * ein1 + ig * (al4 * d2 + c40 * kern[(2, 0)] + c41 * kern[(2, 1)])
        b42 = ig * E4

        E = E + h / 6.0 * (k1E + 2.0 * k2E + 2.0 * k3E + k4E)
        # s_new = s + h/6 (k1s + 2 k2s + 2 k3s + k4s), each k_s = -g_ s_k + b p
        alpha = 1.0 - h / 6.0 * g_ * (1.0 + 2.0 * al2 + 2.0 * al3 + al4)
        c0 = h / 6.0 * (b10 - g_ * (2.0 * c20 + 2.0 * c30 + c40))
        c1 = h / 6.0 * (2.0 * b21 + 2.0 * b31 - g_ * (2.0 * c31 + c41))
        c2 = h / 6.0 * b42
        if g_:
            s *= alpha
        s += c0 * p0
        s += c1 * p1
        s += c2 * p2
        p0 = p2

        e_cav[n + 1] = E
        atomic[n + 1] = np.vdot(s, w * s).real
        if n % 256 == 0 and (not math.isfinite(abs(E)) or a_in * abs(E) > bound):
            raise IntegratorBlowupError(
                f"field grew beyond 1e3 x input at t={times[n + 1]:.4g} s "
                f"(|E_out|~{a_in * abs(E):.3g}); reduce time_step (now {h:.3g} s)"
            )

    if not math.isfinite(abs(E)) or a_in * abs(E) > bound:
        raise IntegratorBlowupError(f"field grew beyond 1e3 x input; reduce time_step (now {h:.3g} s)")

    e_out = -e_in + a_in * e_cav
    snapshot = {
        "kappa": kappa,
        "kappa_in": cav.kappa_in,
        "coupling": coupling,
        "time_step": h,
        "duration": float(times[-1]),
        "comb": dataclasses.asdict(comb.params),
        "pulse": dataclasses.asdict(pulse),
        "n_bins": int(omega.size),
    }
    snapshot["comb"]["tooth_shape"] = comb.params.tooth_shape.value
    sigma = s * np.exp(-1j * omega * times[-1])
    state = EnsembleState(omega, sigma, w, coupling)
    return FieldRecord(times, e_in, e_cav, e_out, atomic, snapshot, state)


# ---------------------------------------------------------------------------
# efficiency extraction


def _integrate(y, t, mask=None):
    if mask is not None:
        y, t = y[mask], t[mask]
    if t.size < 2:
        return 0.0
    return float(np.trapezoid(y, t))


def extract_efficiency(record: FieldRecord, delta, pulse: InputPulse) -> EfficiencyReport:
    """Windowed energy fractions of the output field.

    The input window is ``arrival_time +- 3 fwhm`` and the echo window the
    same interval shifted by ``2 pi / delta``.  Fractions are normalized by
    the input energy contained in the record.
    """
    period = 2.0 * math.pi / delta
    half = 3.0 * pulse.fwhm_duration
    if period < 2.0 * half:
        raise ConfigurationError(
            f"input and echo windows overlap: 2pi/delta = {period:g} s < 6 fwhm = {2 * half:g} s"
        )
    t = record.times
    t0 = pulse.arrival_time
    if t[-1] < t0 + period + half * (1 - 1e-9):
        raise ConfigurationError("record ends before the echo window closes")

    p_in = np.abs(record.e_in) ** 2
    p_out = np.abs(record.e_out) ** 2
    e_in_total = _integrate(p_in, t)

    in_win = np.abs(t - t0) <= half
    echo_win = np.abs(t - t0 - period) <= half
    reflected = _integrate(p_out, t, in_win) / e_in_total
    echo_energy = _integrate(p_out, t, echo_win)
    echo = echo_energy / e_in_total
    if echo_energy > 0:
        echo_time = _integrate(t * p_out, t, echo_win) / echo_energy
    else:
        echo_time = float("nan")
    out_total = _integrate(p_out, t) / e_in_total
    residual = out_total - reflected - echo

    cfg = record.config
    kappa = cfg.get("kappa", 0.0)
    kappa_in = cfg.get("kappa_in", kappa)
    p_cav = np.abs(record.e_cavity) ** 2
    mirror_loss = 2.0 * max(0.0, kappa - kappa_in) * _integrate(p_cav, t) / e_in_total
    gamma_h = cfg.get("comb", {}).get("gamma_h", 0.0)
    homog = 2.0 * gamma_h * _integrate(record.atomic_energy, t) / e_in_total
    atoms_end = record.atomic_energy[-1] / e_in_total
    cav_end = p_cav[-1] / e_in_total
    closure = 1.0 - (out_total + atoms_end + cav_end + mirror_loss + homog)
    return EfficiencyReport(
        reflected_during_input=reflected,
        echo_efficiency=echo,
        echo_time=echo_time,
        echo_delay=echo_time - t0,
        residual=residual,
        energy_in_atoms_at_end=float(atoms_end),
        cavity_energy_at_end=float(cav_end),
        mirror_loss=mirror_loss,
        homogeneous_loss=homog,
        integrator_loss=float(closure),
    )

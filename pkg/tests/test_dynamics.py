import math
import warnings

import numpy as np
import pytest

from afcavity import dynamics, model
from afcavity.comb import build_comb
from afcavity.dynamics import (
    FieldRecord,
    InputPulse,
    ModeCavity,
    RegimeWarning,
    SimulationConfig,
    calibrate_coupling,
    extract_efficiency,
    simulate,
    steady_state_reflection,
)
from afcavity.errors import ConfigurationError, IntegratorBlowupError, ParameterError
from conftest import DELTA, default_comb_params, default_kappa, default_pulse, run


@pytest.fixture(scope="module")
def comb():
    return build_comb(default_comb_params())


class TestPulse:
    def test_unit_energy(self):
        p = default_pulse()
        t = np.linspace(0, 1.2e-6, 200001)
        assert np.trapezoid(np.abs(p.field(t)) ** 2, t) == pytest.approx(1.0, rel=1e-9)

    def test_fwhm(self):
        p = default_pulse()
        half = np.abs(p.field(p.arrival_time + p.fwhm_duration / 2)) ** 2
        peak = np.abs(p.field(p.arrival_time)) ** 2
        assert half / peak == pytest.approx(0.5, rel=1e-12)

    def test_amplitude_scales_energy(self):
        p = default_pulse(amplitude=2j)
        assert p.field(p.arrival_time) == pytest.approx(2j * default_pulse().field(p.arrival_time))

    def test_invalid(self):
        with pytest.raises(ParameterError):
            InputPulse(0.0, 1e-6)
        with pytest.raises(ParameterError):
            InputPulse(1e-7, 1e-6, shape="square")


class TestModeCavity:
    def test_invalid(self):
        with pytest.raises(ParameterError, match="invalid cavity"):
            ModeCavity(0.0, 0.0)
        with pytest.raises(ParameterError):
            ModeCavity(1.0, 2.0)

    def test_from_params(self):
        cav = model.CavityParams(0.8, 0.999, 0.01)
        m = ModeCavity.from_params(cav)
        assert m.kappa == pytest.approx(model.derive_cavity(cav).kappa)
        assert 0 < m.kappa_loss < 0.01 * m.kappa
        assert ModeCavity.from_params(model.CavityParams(0.8, 1.0, 0.01)).kappa_loss == 0.0


class TestSteadyState:
    def test_dense_and_schur_agree(self, comb):
        kappa = default_kappa()
        g = calibrate_coupling(comb, kappa, 2.0)
        for det in (0.0, 0.3 * DELTA):
            a = steady_state_reflection(comb, kappa, g, det, method="schur")
            b = steady_state_reflection(comb, kappa, g, det, method="dense")
            assert abs(a - b) < 1e-9

    def test_calibration_matched(self, comb):
        kappa = default_kappa()
        g = calibrate_coupling(comb, kappa, 1.0)
        assert abs(steady_state_reflection(comb, kappa, g, method="dense")) < 1e-4

    def test_calibration_zero(self, comb):
        kappa = default_kappa()
        g = calibrate_coupling(comb, kappa, 0.0)
        assert g == 0.0
        assert steady_state_reflection(comb, kappa, g) == pytest.approx(1.0)

    def test_calibration_overcoupled(self, comb):
        kappa = default_kappa()
        g = calibrate_coupling(comb, kappa, 3.0)
        assert steady_state_reflection(comb, kappa, g, method="dense").real == pytest.approx(-0.5, abs=1e-3)

    def test_calibration_close_to_coarse_grained_rate(self, comb):
        # pi g^2 n-bar(0) = C kappa for a smooth ensemble
        kappa = default_kappa()
        g = calibrate_coupling(comb, kappa, 1.0)
        assert g == pytest.approx(dynamics.coarse_coupling(comb, kappa, 1.0), rel=1e-4)

    def test_rejects_negative(self, comb):
        with pytest.raises(ParameterError):
            calibrate_coupling(comb, 1e8, -1.0)


class TestRegime:
    def test_warns_for_narrowband_pulse(self, comb):
        with pytest.warns(RegimeWarning):
            dynamics.check_regime(InputPulse(5e-6, 1e-5), comb, default_kappa())

    def test_default_is_inside(self, comb):
        ratios = dynamics.regime_ratios(default_pulse(), comb, default_kappa())
        assert all(v > 1 for v in ratios.values())


class TestSimulate:
    def test_step_bound(self, comb):
        with pytest.raises(ParameterError, match="stability bound"):
            simulate(default_kappa(), comb, default_pulse(), SimulationConfig(time_step=1e-9))

    def test_duration_bound(self, comb):
        with pytest.raises(ParameterError, match="duration"):
            simulate(default_kappa(), comb, default_pulse(), SimulationConfig(duration=1e-6))

    def test_blowup_detected(self, comb, monkeypatch):
        monkeypatch.setattr(dynamics, "max_time_step", lambda *a: 1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            with pytest.raises(IntegratorBlowupError, match="time_step"):
                simulate(default_kappa(), comb, default_pulse(), SimulationConfig(time_step=2e-8), coupling=0.0)

    def test_empty_cavity_reflects_everything(self, comb):
        _, rec, rep = run(coupling=0.0)
        total = np.trapezoid(np.abs(rec.e_out) ** 2, rec.times) / np.trapezoid(np.abs(rec.e_in) ** 2, rec.times)
        assert total == pytest.approx(1.0, abs=1e-6)
        assert rep.reflected_during_input == pytest.approx(1.0, abs=1e-6)
        assert rep.echo_efficiency < 1e-9

    def test_input_output_identity(self, matched_run):
        _, rec, _ = matched_run
        a = math.sqrt(2 * rec.config["kappa_in"])
        assert np.array_equal(rec.e_out, -rec.e_in + a * rec.e_cavity)

    def test_matched_echo(self, matched_run):
        _, _, rep = matched_run
        assert rep.echo_efficiency == pytest.approx(model.eta_f(10), abs=0.01)
        assert rep.reflected_during_input < 0.005

    def test_echo_is_pi_out_of_phase(self, matched_run):
        comb, rec, _ = matched_run
        p = default_pulse()
        t = rec.times
        win = np.abs(t - p.arrival_time - comb.params.echo_time) < 3 * p.fwhm_duration
        ref = p.field(t[win] - comb.params.echo_time)
        phase = np.angle(np.vdot(ref, rec.e_out[win]))
        assert abs(abs(phase) - math.pi) < 0.05

    def test_echo_delay_follows_group_delay(self):
        # the echo centroid trails 2 pi / delta by the cavity build-up time
        # 1/kappa and leads it by the finite-span comb dispersion 4/(pi W),
        # W the comb span; both are set by the scenario, not by the step
        for teeth in (21, 41):
            p = default_comb_params(num_teeth=teeth)
            _, rec, rep = run(p)
            predicted = 1.0 / rec.config["kappa"] - 4.0 / (math.pi * p.span)
            assert rep.echo_delay - p.echo_time == pytest.approx(predicted, abs=0.3e-9)

    def test_linearity(self, matched_run):
        _, rec, rep = matched_run
        c = 0.3 - 1.7j
        _, rec2, rep2 = run(pulse=default_pulse(amplitude=c), coupling=rec.config["coupling"])
        scale = np.max(np.abs(rec.e_out))
        assert np.max(np.abs(rec2.e_out - c * rec.e_out)) <= 1e-10 * abs(c) * scale
        for name in ("reflected_during_input", "echo_efficiency", "energy_in_atoms_at_end"):
            assert getattr(rep2, name) == pytest.approx(getattr(rep, name), abs=1e-10)

    def test_step_halving(self, matched_run):
        _, rec, rep = matched_run
        h = rec.config["time_step"]
        _, _, rep2 = run(config=SimulationConfig(time_step=h / 2), coupling=rec.config["coupling"])
        assert abs(rep2.echo_efficiency - rep.echo_efficiency) < 1e-4
        assert abs(rep2.reflected_during_input - rep.reflected_during_input) < 1e-4

    def test_energy_audit_lossless(self, matched_run):
        _, _, rep = matched_run
        assert abs(rep.integrator_loss) < 1e-4
        assert rep.mirror_loss == 0.0 and rep.homogeneous_loss == 0.0

    def test_energy_audit_with_losses(self):
        pulse = default_pulse()
        kappa = default_kappa(pulse)
        p = default_comb_params(gamma_h=DELTA / (2 * math.pi * 100))
        comb = build_comb(p)
        g = calibrate_coupling(comb, kappa, 1.0)
        cav = ModeCavity(kappa, 0.9 * kappa)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            rec = simulate(cav, comb, pulse, coupling=g)
        rep = extract_efficiency(rec, p.delta, pulse)
        assert rep.mirror_loss > 0.01 and rep.homogeneous_loss > 0.001
        assert abs(rep.integrator_loss) < 1e-4

    def test_free_decay_only_through_mirror(self, matched_run):
        # after the drive has passed, d/dt (cavity + atoms) = -|E_out|^2
        _, rec, _ = matched_run
        p = default_pulse()
        t = rec.times
        start = np.searchsorted(t, p.arrival_time + 6 * p.fwhm_duration)
        u = np.abs(rec.e_cavity) ** 2 + rec.atomic_energy
        out = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (np.abs(rec.e_out[1:]) ** 2 + np.abs(rec.e_out[:-1]) ** 2))])
        drift = (u[start:] + out[start:]) - (u[start] + out[start])
        assert np.max(np.abs(drift)) < 1e-4

    def test_homogeneous_decay_factor(self, matched_run):
        _, rec, rep = matched_run
        gh = DELTA / (2 * math.pi * 100)
        _, _, rep2 = run(default_comb_params(gamma_h=gh), coupling=rec.config["coupling"])
        ratio = rep2.echo_efficiency / rep.echo_efficiency
        assert ratio == pytest.approx(math.exp(-2 * gh * 2 * math.pi / DELTA), rel=1e-3)

    def test_cooperativity_dip(self):
        refl = {}
        for c in (0.25, 0.5, 1.0, 2.0, 4.0):
            _, _, rep = run(cooperativity=c)
            refl[c] = rep.reflected_during_input
            assert rep.reflected_during_input == pytest.approx(((1 - c) / (1 + c)) ** 2, abs=0.01)
        assert min(refl, key=refl.get) == 1.0


class TestExtract:
    def test_window_overlap(self, matched_run):
        _, rec, _ = matched_run
        with pytest.raises(ConfigurationError, match="overlap"):
            extract_efficiency(rec, DELTA, default_pulse(fwhm_duration=200e-9))

    def test_record_too_short(self, matched_run):
        _, rec, _ = matched_run
        with pytest.raises(ConfigurationError):
            extract_efficiency(rec, DELTA / 2, default_pulse())

    def test_report_fields_are_floats(self, matched_run):
        _, _, rep = matched_run
        assert all(type(v) is float for v in rep.as_dict().values())


class TestFieldRecordIO:
    def test_text(self, matched_run, tmp_path):
        _, rec, _ = matched_run
        path = tmp_path / "f.txt"
        rec.to_text(path)
        with open(path) as fh:
            assert fh.readline().split()[1:] == list(FieldRecord.COLUMNS)
        data = np.loadtxt(path)
        assert data.shape == (rec.times.size, 7)
        assert np.allclose(data[:, 5], rec.e_out.real, rtol=1e-8, atol=1e-12)

    def test_binary_round_trip(self, matched_run, tmp_path):
        _, rec, _ = matched_run
        path = tmp_path / "f.bin"
        rec.to_binary(path)
        raw = path.read_bytes()
        assert raw[:4] == b"AFCF"
        assert int.from_bytes(raw[4:8], "little") == 1
        assert int.from_bytes(raw[8:16], "little") == rec.times.size
        assert int.from_bytes(raw[16:20], "little") == 7
        assert np.array_equal(FieldRecord.read_binary(path), rec.columns())

    def test_binary_bad_magic(self, tmp_path):
        path = tmp_path / "x.bin"
        path.write_bytes(b"XXXX" + bytes(16))
        with pytest.raises(ValueError):
            FieldRecord.read_binary(path)

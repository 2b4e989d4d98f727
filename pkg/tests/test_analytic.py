import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from afcavity import analytic, model
from afcavity.errors import ParameterError, UnphysicalGainError, ValidityError


class TestHighFinesse:
    def test_reflection_examples(self):
        assert analytic.reflection_high_finesse(1.0, 1.0) == 0.0
        assert analytic.reflection_high_finesse(0.0, 1.0) == 1.0
        assert analytic.reflection_high_finesse(3.0, 1.0) == pytest.approx(-0.5)

    def test_steady_state_energy(self):
        s = analytic.steady_state_high_finesse(0.5, 1.0)
        assert s.reflection_intensity + s.absorbed_fraction == pytest.approx(1.0)

    def test_invalid_rates(self):
        with pytest.raises(ParameterError, match="invalid cavity"):
            analytic.reflection_high_finesse(1.0, 0.0)
        with pytest.raises(ParameterError):
            analytic.reflection_high_finesse(-1.0, 1.0)

    def test_echo_examples(self):
        assert analytic.echo_amplitude_high_finesse(1.0, 1.0, 1.0) == pytest.approx(-1.0)
        assert analytic.echo_amplitude_high_finesse(0.0, 1.0, 1.0) == 0.0
        got = analytic.echo_amplitude_high_finesse(1.0, 1.0, 0.93239)
        assert got == pytest.approx(-float(oracles.mp.sqrt(oracles.mp.mpf("0.93239"))), rel=1e-14)
        assert got == pytest.approx(-0.96560, abs=1e-5)

    def test_echo_forms_agree_at_matching(self):
        for ef in (1.0, 0.9, 0.5):
            assert analytic.echo_amplitude_mode_model(2.0, 2.0, ef) == pytest.approx(
                analytic.echo_amplitude_high_finesse(2.0, 2.0, ef)
            )

    def test_echo_invalid_eta(self):
        with pytest.raises(ParameterError):
            analytic.echo_amplitude_high_finesse(1.0, 1.0, 1.5)

    def test_mode_model_is_high_finesse_limit_of_round_trip_sum(self):
        # r2 = 1, small d and T1: sqrt(eta) from the round-trip sum approaches
        # 4 C / (1 + C)^2 with C = 2 d / T1
        d = 1e-4
        for c in (0.25, 0.5, 1.0, 2.0, 4.0):
            t1 = model.t1_for_cooperativity(d, c)
            exact = analytic.sqrt_efficiency_cavity(1 - t1, 1.0, d)
            mode = -analytic.echo_amplitude_mode_model(c, 1.0, 1.0)
            assert exact == pytest.approx(mode, rel=2e-3)


class TestReflectionExact:
    def test_matched_is_zero(self):
        r1 = model.matched_r1(0.999, 0.1)
        assert abs(analytic.reflection_exact(r1, 0.999, 0.1)) < 1e-12

    def test_symmetric_lossless(self):
        assert analytic.reflection_exact(0.9, 0.9, 0.0) == 0.0

    def test_against_oracle(self):
        got = analytic.reflection_exact(0.9, 0.999, 0.1)
        assert got == pytest.approx(float(oracles.reflection(0.9, 0.999, 0.1)), rel=1e-13)

    def test_zero_reflection_grid(self):
        for r2 in np.linspace(0.5, 1.0, 11):
            for d in np.linspace(0.0, 1.0, 11):
                r1 = model.matched_r1(r2, d)
                if r1 * r2 * math.exp(-2 * d) < 1:
                    assert abs(analytic.reflection_exact(r1, r2, d)) < 1e-12

    def test_gain_rejected(self):
        with pytest.raises(UnphysicalGainError):
            analytic.reflection_exact(1.0, 1.0, 0.0)

    def test_high_finesse_mapping(self):
        # the two pictures differ at first order in d and T1; on the r2 = 1,
        # d <= 0.01, T1 <= 0.02 box the amplitudes agree to 0.01 absolute and
        # the relative deviation shrinks linearly as the box shrinks
        for scale, rel in ((1.0, None), (0.1, 0.01)):
            for d in np.linspace(5e-4, 0.01, 12) * scale:
                for t1 in np.linspace(1e-3, 0.02, 12) * scale:
                    ex = analytic.reflection_exact(1 - t1, 1.0, d)
                    hf = analytic.reflection_high_finesse(model.cooperativity(d, t1), 1.0)
                    assert abs(ex - hf) < 0.01
                    if rel is not None and abs(hf) > 0.1:
                        assert abs(ex - hf) / abs(hf) < rel

    def test_steady_state_exact(self):
        s = analytic.steady_state_exact(0.9, 0.999, 0.1)
        assert s.reflection_intensity == pytest.approx(s.reflection_amplitude.real**2)


class TestSinglePass:
    def test_examples(self):
        assert analytic.single_pass_efficiency(0.1) == pytest.approx(0.00905, abs=5e-5)
        assert analytic.single_pass_efficiency(0.0) == 0.0
        assert analytic.single_pass_efficiency(2.0) == pytest.approx(4 * math.exp(-2), rel=1e-14)

    def test_maximum_at_two(self):
        d = np.linspace(0.01, 6, 6000)
        vals = [analytic.single_pass_efficiency(x) for x in d]
        assert d[int(np.argmax(vals))] == pytest.approx(2.0, abs=2e-3)


class TestTotalEfficiency:
    @pytest.mark.parametrize("fa", [10, 6, 4])
    def test_matched_against_oracle(self, fa):
        r1 = model.matched_r1(0.999, 0.1)
        got = analytic.total_efficiency(r1, 0.999, 0.1, fa)
        assert got.eta_total == pytest.approx(float(oracles.matched_efficiency(0.999, 0.1, fa)), rel=1e-12)

    def test_headline_values(self):
        r1 = 0.999 * math.exp(-0.2)
        assert analytic.total_efficiency(r1, 0.999, 0.1, 10).eta_total == pytest.approx(0.920, abs=0.003)
        assert analytic.total_efficiency(r1, 0.999, 0.1, 6).eta_total == pytest.approx(0.812, abs=0.001)
        assert analytic.total_efficiency(r1, 0.999, 0.1, 4).eta_total == pytest.approx(0.637, abs=0.001)

    def test_no_absorber(self):
        assert analytic.total_efficiency(0.8, 0.999, 0.0, 10).eta_total == 0.0

    def test_breakdown(self):
        b = analytic.total_efficiency(0.8, 0.999, 0.1, 10)
        assert b.eta_total == pytest.approx(b.eta_cavity * b.eta_dephasing)
        assert b.echo_amplitude_ratio < 0
        assert b.echo_amplitude_ratio**2 == pytest.approx(b.eta_total)

    @given(st.floats(0.0, 0.999), st.floats(0.5, 1.0), st.floats(0.0, 3.0), st.floats(1.01, 100))
    def test_bounded(self, r1, r2, d, fa):
        if math.sqrt(r1 * r2) * math.exp(-d) >= 1:
            return
        eta = analytic.total_efficiency(r1, r2, d, fa).eta_total
        assert 0.0 <= eta <= 1.0

    @given(st.floats(0.1, 0.99), st.floats(0.01, 1.0), st.floats(1.5, 50), st.floats(0.1, 10))
    def test_increasing_in_finesse(self, r1, d, fa, step):
        a = analytic.total_efficiency(r1, 0.999, d, fa).eta_total
        b = analytic.total_efficiency(r1, 0.999, d, fa + step).eta_total
        assert b > a

    def test_validity_guard(self, monkeypatch):
        monkeypatch.setattr(analytic, "sqrt_efficiency_cavity", lambda *a: 1.2)
        with pytest.raises(ValidityError):
            analytic.total_efficiency(0.8, 0.999, 0.1, 10)

    def test_invalid(self):
        with pytest.raises(ParameterError):
            analytic.total_efficiency(1.2, 0.999, 0.1, 10)
        with pytest.raises(ParameterError):
            analytic.total_efficiency(0.8, 0.999, 0.1, 1.0)
        with pytest.raises(UnphysicalGainError):
            analytic.sqrt_efficiency_cavity(1.0, 1.0, 0.0)
        assert analytic.total_efficiency(1.0, 1.0, 0.0, 10).eta_total == 0.0

    def test_argmax_is_matching(self):
        for r2, d, fa in [(0.999, 0.1, 10), (0.95, 0.3, 4), (1.0, 0.02, 6)]:
            ref = float(oracles.argmax_r1(r2, d, fa))
            assert model.matched_r1(r2, d) == pytest.approx(ref, abs=1e-12)


class TestLimit:
    def test_examples(self):
        assert analytic.total_efficiency_limit(0.1, 0.1) == pytest.approx(1.0)
        assert analytic.total_efficiency_limit(0.1, 0.0) == 0.0
        assert analytic.total_efficiency_limit(0.3, 0.1) == pytest.approx(0.25)

    def test_degenerate(self):
        with pytest.raises(ParameterError):
            analytic.total_efficiency_limit(0.0, 0.0)

    @pytest.mark.parametrize("d", [0.001, 0.003, 0.01])
    def test_agrees_with_round_trip_sum_on_matching_line(self, d):
        eps = d
        r1 = (1 - eps) ** 2
        for fa in (4, 10, 1e6):
            full = analytic.total_efficiency(r1, 1.0, d, fa).eta_total
            lim = analytic.total_efficiency_limit(eps, d, model.eta_f(fa))
            assert full == pytest.approx(lim, rel=0.01)

    @given(st.floats(1e-4, 0.01), st.floats(1e-4, 0.01))
    def test_round_trip_sum_off_matching(self, eps, d):
        # off the matching line the round-trip sum tends to the limit form
        # times (2 eps / (eps + d))^2
        full = analytic.total_efficiency((1 - eps) ** 2, 1.0, d, 1e9).eta_total
        lim = analytic.total_efficiency_limit(eps, d) * (2 * eps / (eps + d)) ** 2
        assert full == pytest.approx(lim, rel=0.03)

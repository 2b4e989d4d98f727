import math
import os
import sys
import warnings

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from afcavity import model  # noqa: E402
from afcavity.comb import build_comb  # noqa: E402
from afcavity.dynamics import (  # noqa: E402
    InputPulse,
    RegimeWarning,
    calibrate_coupling,
    extract_efficiency,
    simulate,
)

TWO_PI = 2.0 * math.pi
DELTA = TWO_PI * 1e6


def default_comb_params(**kw):
    base = dict(delta=DELTA, finesse_a=10.0, num_teeth=21)
    base.update(kw)
    return model.CombParams(**base)


def default_pulse(**kw):
    base = dict(fwhm_duration=150e-9, arrival_time=600e-9)
    base.update(kw)
    return InputPulse(**base)


def default_kappa(pulse=None):
    pulse = pulse or default_pulse()
    return model.kappa_from_linewidth(50.0 * pulse.spectral_fwhm_hz)


def run(comb_params=None, pulse=None, kappa=None, cooperativity=1.0, config=None, coupling=None):
    """One time-domain run of the default scenario (or a variant)."""
    comb_params = comb_params or default_comb_params()
    pulse = pulse or default_pulse()
    kappa = kappa or default_kappa(pulse)
    comb = build_comb(comb_params)
    if coupling is None:
        coupling = calibrate_coupling(comb, kappa, cooperativity)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        rec = simulate(kappa, comb, pulse, config, coupling=coupling)
    return comb, rec, extract_efficiency(rec, comb_params.delta, pulse)


@pytest.fixture(scope="session")
def matched_run():
    return run()

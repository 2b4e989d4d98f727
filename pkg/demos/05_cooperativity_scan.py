"""
Under- and over-coupling in the time domain
===========================================

Scan the cooperativity of the loaded cavity with the full solver and compare
the reflected and recalled energy to the adiabatic mode picture:
reflection ((1 - C) / (1 + C))^2, echo (4 C / (1 + C)^2)^2 times the
dephasing factor.
"""

import math

from afcavity import model
from afcavity.comb import build_comb, dephasing_factor
from afcavity.dynamics import InputPulse
from afcavity.sweep import SweepSpec, TimeDomainScenario, run_sweep

params = model.CombParams(2 * math.pi * 1e6, 10.0, num_teeth=21)
pulse = InputPulse(150e-9, 600e-9)
kappa = model.kappa_from_linewidth(50 * pulse.spectral_fwhm_hz)
eta_f = dephasing_factor(build_comb(params))

scenario = TimeDomainScenario(params, pulse, kappa)
res = run_sweep(SweepSpec("cooperativity", 0.25, 4.0, 16, engine="time_domain", scenario=scenario))

print("   C    reflected (mode)      echo (mode)")
for p in res.points:
    c = p.value
    r_mode = ((1 - c) / (1 + c)) ** 2
    e_mode = (4 * c / (1 + c) ** 2) ** 2 * eta_f
    print(f"{c:5.2f}   {p.reflection_intensity:.4f} ({r_mode:.4f})   {p.eta_total:.4f} ({e_mode:.4f})")
print(f"best recall at C = {res.argmax:g}")

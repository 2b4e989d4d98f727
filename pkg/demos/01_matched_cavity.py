"""
Impedance-matched memory cavity
===============================

A comb with averaged depth 0.1 absorbs about a tenth of a single pass, so
without a cavity the forward echo is stuck near one percent.  Put it between
a near-perfect back mirror and an input mirror whose reflectivity equals the
round-trip survival, and the reflection vanishes on resonance.
"""

import math

from afcavity import analytic, model
from afcavity.sweep import find_matched_point, loss_sensitivity

r2, d_tilde, finesse_a = 0.999, 0.1, 10.0

# no cavity: forward recall of a thin comb
print(f"single pass        eta = {analytic.single_pass_efficiency(d_tilde, model.eta_f(finesse_a)):.4f}")
print(f"best thick comb    eta = {analytic.single_pass_efficiency(2.0):.4f}  (d = 2)")

# the matched input mirror, its efficiency and what the cavity looks like
m = find_matched_point(r2, d_tilde, finesse_a)
cav = model.derive_cavity(model.CavityParams(m.r1, r2, 0.01))
print(f"matched r1         = {m.r1:.5f}  (golden-section: {m.r1_numeric:.5f})")
print(f"efficiency         = {m.eta:.4f}")
print(f"cavity finesse     = {cav.finesse_c:.2f}")
print(f"linewidth, 1 cm    = {cav.linewidth / 1e6:.0f} MHz")
print(f"reflection         = {analytic.reflection_exact(m.r1, r2, d_tilde):.1e}")

# a leakier back mirror costs efficiency even after re-matching r1
print("\nr2       rematched  r1 held")
for row in loss_sensitivity([0.999, 0.995, 0.99, 0.98, 0.95], d_tilde, finesse_a, rematch=None):
    print(f"{row.r2:.3f}    {row.eta_rematched:.4f}     {row.eta_fixed:.4f}")

# for a lossless back mirror and delta-like teeth the round-trip sum gives
# sqrt(eta) = d / sinh(d), a little short of one
print(f"\nr2 = 1, F_A -> inf: eta = {analytic.total_efficiency(math.exp(-0.2), 1.0, 0.1, math.inf).eta_total:.5f}")

"""
How well does a finite-width comb rephase?
==========================================

Sample the comb, Fourier transform it by brute force and compare the first
rephasing peak to the Gaussian-tooth estimate exp(-7 / F_A^2).
"""

import math

import numpy as np

from afcavity import model
from afcavity.comb import build_comb, dephasing_factor, kernel

delta = 2 * math.pi * 1e6

print("F_A   kernel   exp(-7/F_A^2)")
for fa in (3, 4, 6, 8, 10, 15, 20):
    comb = build_comb(model.CombParams(delta, fa, num_teeth=21))
    print(f"{fa:>3d}   {dephasing_factor(comb):.4f}   {model.eta_f(fa):.4f}")

# the kernel itself: echoes at multiples of the comb period, each one
# weaker than the last
comb = build_comb(model.CombParams(delta, 10.0, num_teeth=21))
k = kernel(comb, 3.2e-6)
a = np.abs(k.values) / abs(k.values[0])
for t in k.peak_times():
    i = np.searchsorted(k.times, t)
    if a[i] > 0.05:
        print(f"peak at {t * 1e6:.3f} us, |n(t)/n(0)| = {a[i]:.4f}")

# square teeth approach perfect rephasing as they get narrow
sq = build_comb(model.CombParams(delta, 100.0, 1.0, "square", 21))
print(f"square teeth, F_A = 100: {dephasing_factor(sq):.5f}")

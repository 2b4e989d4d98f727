"""
Efficiency against the input-mirror reflectivity
================================================

Three comb finesses, the same cavity.  Every curve peaks at the matched
reflectivity, where the reflection of the loaded cavity dips to zero; the
comb finesse only scales the peak through the dephasing factor.

Writes the curves as CSV next to this script (``figure2_*.csv``).
"""

import os

import numpy as np

from afcavity import sweep

here = os.path.dirname(os.path.abspath(__file__))
curves = sweep.figure2_curves()

for fa, res in curves.items():
    with open(os.path.join(here, f"figure2_FA{fa:g}.csv"), "w", newline="\n") as fh:
        fh.write(res.to_csv())
    eta = res.column("eta_total")
    print(f"F_A = {fa:>4g}: max eta = {eta.max():.4f} at r1 = {res.argmax:.4f}")

refl = curves[10.0].column("reflection_intensity")
r1 = curves[10.0].column("value")
print(f"reflection minimum {refl.min():.1e} at r1 = {r1[np.argmin(refl)]:.4f}")

# a coarse text rendering of the F_A = 10 curve
for x, e, r in list(zip(r1, curves[10.0].column("eta_total"), refl))[::25]:
    print(f"{x:.3f} {'#' * int(60 * e):<60s} |r|^2={r:.3f}")

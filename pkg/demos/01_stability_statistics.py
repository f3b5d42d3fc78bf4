"""
Time deviation and MTIE of a synthetic phase record
===================================================

Builds a phase-error series from a flicker-PM process plus a little white PM
and evaluates TDEV, MTIE and ADEV on an octave grid.
"""

import numpy as np

from wrsim import NoiseComponent, NoiseSpec, Statistic, stability_curve, synthesize
from wrsim.stability import loglog_slope, mtie, tdev

# 20 000 one-second samples: 4 ps of flicker PM and 2 ps of white PM
spec = NoiseSpec((NoiseComponent("flicker_pm", 4e-12), NoiseComponent("white_pm", 2e-12)), seed=7,
                 n_samples=20_000)
x = synthesize(spec)
print(f"{len(x)} samples, peak-to-peak {np.ptp(x.samples_ps)} ps")

# single points first
print(f"TDEV(100 s) = {tdev(x, 100) * 1e12:.2f} ps")
print(f"MTIE(100 s) = {mtie(x, 100) * 1e12:.1f} ps")

# then whole curves
for stat in (Statistic.TDEV, Statistic.MTIE, Statistic.ADEV):
    curve = stability_curve(x, stat)
    print(f"\n{stat.value}")
    for p in curve.points:
        unit = 1e12 if stat is not Statistic.ADEV else 1.0
        print(f"  tau {p.tau:7.0f} s   {p.value * unit:10.4g}")

# flicker PM gives a flat TDEV: the fitted slope should sit near zero
slope = loglog_slope(stability_curve(x, "tdev"), 20, 1000)
print(f"\nTDEV log-log slope between 20 s and 1000 s: {slope:+.3f}")

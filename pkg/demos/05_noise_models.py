"""
Power-law noise synthesis and mixture fitting
=============================================

Each noise type has its own TDEV slope. A non-negative fit on a measured
curve recovers the component amplitudes.
"""

from wrsim import NoiseComponent, NoiseSpec, stability_curve, synthesize
from wrsim.noise import NOISE_TYPES, TDEV_SLOPE, fit_noise_mixture
from wrsim.stability import loglog_slope

for kind in NOISE_TYPES:
    x = synthesize(NoiseSpec((NoiseComponent(kind, 1e-9),), seed=1, n_samples=100_000))
    slope = loglog_slope(stability_curve(x, "tdev"), 10, 1000)
    print(f"{kind:15s} TDEV slope {slope:+.3f} (expected {TDEV_SLOPE[kind]:+.1f})")

mixture = NoiseSpec((NoiseComponent("white_pm", 20e-12), NoiseComponent("flicker_pm", 4e-12)), seed=5,
                    n_samples=100_000)
curve = stability_curve(synthesize(mixture), "tdev", dense=True)
fit = fit_noise_mixture(curve, ["white_pm", "flicker_pm", "white_fm"])
print("\nfitted amplitudes (TDEV at 1 s):")
for kind, amp in fit.amplitudes.items():
    print(f"  {kind:12s} {amp * 1e12:7.2f} ps")
print(f"relative residual {fit.residual:.3f}")

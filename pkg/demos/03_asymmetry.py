"""
Delay asymmetry, its fixed-point encoding and the resulting skew
================================================================

The 300 km forward and 100 km return fibres of the long-haul test give an
asymmetry far outside what the 32-bit register can hold.
"""

from wrsim import AsymmetryConfig, alpha_range, alpha_to_alpha_n
from wrsim.asymmetry import alpha_n_to_alpha, calibration_report, predicted_skew, quantization_step
from wrsim.errors import OutOfRange
from wrsim.optical import DEFAULT_GROUP_DELAY_US_PER_KM

us_per_km = DEFAULT_GROUP_DELAY_US_PER_KM
print(f"group delay {us_per_km:.4f} us/km")

long_haul = AsymmetryConfig(300 * us_per_km * 1e-6, 100 * us_per_km * 1e-6)
print(f"alpha = {long_haul.alpha:.6f}")
try:
    long_haul.alpha_n("conventional")
except OutOfRange as exc:
    print(f"cannot encode: {exc}")

for mode in ("paper", "conventional"):
    lo, hi = alpha_range(mode)
    print(f"{mode:12s} encodable alpha range [{lo:+.4e}, {hi:+.4e}]")

# with nothing applied the follower lags by half the latency difference
print(f"skew with alpha = 0 applied: {predicted_skew(long_haul, 0.0) * 1e6:.2f} us")
print(f"skew with true alpha applied: {predicted_skew(long_haul, long_haul.alpha):.3e} s")

# a small in-range value survives the round trip to within a step
alpha = 2.6e-4
n = alpha_to_alpha_n(alpha)
print(f"\nalpha {alpha} -> alpha_n {n} -> {alpha_n_to_alpha(n):.9e} (step {quantization_step(alpha):.2e})")
print(calibration_report(AsymmetryConfig(1.00026e-3, 1e-3)))

"""
Optical budget of the 300 km amplified chain
=============================================

SFP, booster EDFA, six 50 km spools, preamp EDFA and a 100 GHz bandpass
filter. Taking parts out shows which of them the link depends on.
"""

from wrsim import link_budget
from wrsim.optical import ChannelProfile, SfpModel
from wrsim.scenarios import amplified_300km_chain

full = link_budget(amplified_300km_chain(), "forward")
print(full.table())

print("\nwithout the bandpass filter")
no_filter = link_budget(amplified_300km_chain(with_filter=False), "forward")
print(f"  OSNR {no_filter.osnr_db:.1f} dB -> {no_filter.verdict}")

print("\nwithout either amplifier")
bare = link_budget(amplified_300km_chain(with_edfas=False), "forward")
print(f"  span loss {bare.span_loss_db:.2f} dB against a {bare.loss_budget_db:.0f} dB budget -> {bare.verdict}")

# 150 km unamplified at 0.17 dB/km misses by less than half a dB
sfp = SfpModel(2.07, 5.0, -23.0)
marginal = link_budget([sfp, ChannelProfile.uniform(150, 0.17, 3)])
print(f"\n150 km unamplified: margin {marginal.margin_db:+.2f} dB, marginal={marginal.marginal}")

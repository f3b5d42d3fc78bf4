"""
Pairing PPS timestamps and counting dropouts
============================================

A synthetic 20 hour two-channel TDC log in which the follower loses lock six
times. Each outage suppresses 17 pulses, so 18 s pass between surviving ones.
"""

import numpy as np

from wrsim import TimestampLog, detect_dropouts, longest_clean_segment, pair_pps
from wrsim.pps import uptime_percent

T = 10**12  # picoseconds per second
rng = np.random.default_rng(3)

leader = np.arange(20 * 3600, dtype=np.int64) * T
follower = leader + 50 + rng.normal(0, 3, leader.size).round().astype(np.int64)
keep = np.ones(leader.size, bool)
for start in (4000, 16000, 29000, 41000, 55000, 66000):
    keep[start:start + 17] = False

log = TimestampLog(leader, follower[keep])
paired = pair_pps(log)
print(f"paired {len(paired.series)} epochs, {len(paired.gaps)} gaps")
print(f"mean leader-minus-follower time error {paired.samples_ps.mean():.1f} ps")

report = detect_dropouts(log)
for d in report.dropouts:
    print(f"  lost lock at {d.start:8.0f} s for {d.duration:.0f} s ({d.missing_pulses} pulses)")
print(f"uptime {uptime_percent(report):.2f} %")

# stability statistics are computed on the longest gap-free stretch only
segment = longest_clean_segment(paired)
print(f"longest clean segment: {len(segment)} samples starting at {segment.origin_time:.0f} s")

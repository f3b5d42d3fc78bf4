"""Discrete-event simulation of a WR leader/follower pair over one fibre link.

The WR core is a black box here: each two-way exchange yields an offset
estimate that uses the configured asymmetry split. The first estimate after
(re)lock steps the follower clock by the full amount, as PTP servos do;
after that a first-order servo steers it. DDMTD phase detection is folded into a
white timestamp jitter on each estimate.

Sign conventions: ``follower_offset`` is follower time minus leader time,
which is also what PPS pairing reports (``t_a - t_b``). A follower that lags
the leader by ``s`` therefore has offset ``-s``.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .asymmetry import alpha_n_to_alpha, alpha_to_alpha_n, split_forward
from .errors import InvalidScenario, LinkFails, OutOfRange
from .noise import NoiseSpec, synthesize_seconds
from .optical import BandpassFilter, ChannelProfile, EdfaModel, LinkBudgetReport, SfpModel, link_budget
from .pps import TimestampLog
from .stability import PS, TimeErrorSeries

# independent random streams, keyed so adding one never shifts another
_STREAM_LEADER, _STREAM_FOLLOWER, _STREAM_LINK, _STREAM_JITTER, _STREAM_TDC, _STREAM_DROPOUT = range(6)


@dataclass(frozen=True)
class DropoutProcess:
    """Loss-of-lock events as a Poisson process; recovery ~ U(0, recovery_max]."""

    rate_per_hour: float = 0.0
    recovery_max: float = 18.0


@dataclass(frozen=True)
class SimScenario:
    name: str
    profile: ChannelProfile
    sfp: SfpModel
    booster: EdfaModel | None = None
    preamp: EdfaModel | None = None
    bandpass: BandpassFilter | None = None
    applied_alpha: float = 0.0
    quantize_alpha: bool = False
    alpha_mode: str = "paper"
    leader_noise: NoiseSpec = field(default_factory=NoiseSpec)
    follower_noise: NoiseSpec = field(default_factory=NoiseSpec)
    link_noise: NoiseSpec = field(default_factory=NoiseSpec)
    timestamp_jitter_rms: float = 3e-12
    tdc_jitter_rms: float = 0.0
    exchange_interval: float = 1.0
    pps_interval: float = 1.0
    duration: float = 3600.0
    servo_bandwidth: float = 0.05
    step_on_lock: bool = True
    initial_offset: float = 0.0
    dropout: DropoutProcess = field(default_factory=DropoutProcess)
    osnr_threshold_db: float = 10.0
    seed: int = 0
    description: str = ""

    def validate(self) -> None:
        if not self.duration > 0:
            raise InvalidScenario("duration must be positive")
        if not (self.exchange_interval > 0 and self.pps_interval > 0):
            raise InvalidScenario("exchange and PPS intervals must be positive")
        if self.duration < self.pps_interval:
            raise InvalidScenario("duration shorter than one PPS interval")
        if self.dropout.recovery_max < 0 or self.dropout.rate_per_hour < 0:
            raise InvalidScenario("dropout rate and recovery must be non-negative")
        if self.servo_bandwidth < 0:
            raise InvalidScenario("servo bandwidth cannot be negative")
        if min(self.timestamp_jitter_rms, self.tdc_jitter_rms) < 0:
            raise InvalidScenario("jitter must be non-negative")
        if self.applied_alpha <= -1:
            raise InvalidScenario("applied alpha must exceed -1")

    def chain(self, with_filter=True) -> list:
        parts = [self.sfp, self.booster, self.profile, self.preamp,
                 self.bandpass if with_filter else None]
        return [p for p in parts if p is not None]

    def budgets(self) -> dict[str, LinkBudgetReport]:
        return {d: link_budget(self.chain(), d, self.osnr_threshold_db) for d in ("forward", "return")}

    def effective_alpha(self) -> float:
        """Asymmetry the WR core actually applies, after fixed-point encoding if enabled."""
        if not self.quantize_alpha:
            return self.applied_alpha
        try:
            return alpha_n_to_alpha(alpha_to_alpha_n(self.applied_alpha, self.alpha_mode), self.alpha_mode)
        except OutOfRange as exc:
            raise InvalidScenario(f"applied alpha cannot be encoded: {exc}") from None

    def with_seed(self, seed: int) -> "SimScenario":
        return replace(self, seed=seed)


@dataclass(frozen=True, eq=False)
class SimOutput:
    scenario: SimScenario
    log: TimestampLog
    true_offset_series: TimeErrorSeries      # x = t_a - t_b at every PPS epoch, ps
    follower_offset: np.ndarray              # same quantity unrounded, seconds
    events: tuple[dict, ...]
    dropout_windows: tuple[tuple[int, int], ...]   # (loss, relock) in ps

    @property
    def follower_lag(self) -> np.ndarray:
        return -self.follower_offset


class EventQueue:
    """Min-heap keyed by (time_ps, sequence) so equal times pop in push order."""

    def __init__(self):
        self._heap = []
        self._seq = itertools.count()

    def push(self, time_ps: int, kind: str, payload=None):
        heapq.heappush(self._heap, (int(time_ps), next(self._seq), kind, payload))

    def pop(self):
        time_ps, _, kind, payload = heapq.heappop(self._heap)
        return time_ps, kind, payload

    def __bool__(self):
        return bool(self._heap)


def _rng(seed, stream):
    return np.random.default_rng(np.random.SeedSequence([int(seed), stream]))


def _noise(spec: NoiseSpec, n, step, seed, stream):
    if spec.is_silent:
        return np.zeros(n)
    child = int(np.random.SeedSequence([int(seed), stream]).generate_state(1, np.uint64)[0])
    return synthesize_seconds(NoiseSpec(spec.components, child, n, step))


class _Sampler:
    """Linear interpolation of a uniformly gridded series at integer-ps times."""

    def __init__(self, values, step_ps):
        self.values = values
        self.step_ps = step_ps
        self.silent = not np.any(values)

    def __call__(self, t_ps):
        if self.silent:
            return 0.0
        i, rem = divmod(t_ps, self.step_ps)
        if rem == 0 or i + 1 >= self.values.size:
            return float(self.values[min(i, self.values.size - 1)])
        w = rem / self.step_ps
        return float(self.values[i] * (1.0 - w) + self.values[i + 1] * w)


def run(scenario: SimScenario, check_budget: bool = True) -> SimOutput:
    """Simulate ``scenario`` and return the PPS log plus ground truth.

    Raises:
        LinkFails: either direction's optical budget does not close.
        InvalidScenario: inconsistent parameters.
    """
    scenario.validate()
    if check_budget:
        for report in scenario.budgets().values():
            if not report.closes:
                raise LinkFails(f"{scenario.name}: {report.direction} budget fails "
                                f"(margin {report.margin_db:+.2f} dB, OSNR {report.osnr_db:.1f} dB)",
                                report)
    alpha = scenario.effective_alpha()
    d_ms0 = scenario.profile.latency("forward")
    d_sm0 = scenario.profile.latency("return")

    pps_ps = int(round(scenario.pps_interval / PS))
    ex_ps = int(round(scenario.exchange_interval / PS))
    step_ps = math.gcd(pps_ps, ex_ps)
    step = step_ps * PS
    duration_ps = int(round(scenario.duration / PS))
    n_grid = duration_ps // step_ps + 2
    seed = scenario.seed
    leader = _Sampler(_noise(scenario.leader_noise, n_grid, step, seed, _STREAM_LEADER), step_ps)
    follower = _Sampler(_noise(scenario.follower_noise, n_grid, step, seed, _STREAM_FOLLOWER), step_ps)
    link = _Sampler(_noise(scenario.link_noise, n_grid, step, seed, _STREAM_LINK), step_ps)

    n_epochs = duration_ps // pps_ps
    n_exchanges = -(-duration_ps // ex_ps)
    jitter = _rng(seed, _STREAM_JITTER).standard_normal(n_exchanges) * scenario.timestamp_jitter_rms
    tdc = _rng(seed, _STREAM_TDC).standard_normal((n_epochs, 2)) * scenario.tdc_jitter_rms
    tdc_ps = np.rint(tdc / PS).astype(np.int64)

    queue = EventQueue()
    queue.push(0, "exchange", 0)
    queue.push(0, "pps", 0)
    drop_rng = _rng(seed, _STREAM_DROPOUT)
    rate = scenario.dropout.rate_per_hour / 3600.0
    if rate > 0:
        t = drop_rng.exponential(1.0 / rate)
        while t < scenario.duration:
            recovery = scenario.dropout.recovery_max * (1.0 - drop_rng.random())
            queue.push(int(round(t / PS)), "dropout", recovery)
            t += drop_rng.exponential(1.0 / rate)

    gain = 1.0 - math.exp(-2.0 * math.pi * scenario.servo_bandwidth * scenario.exchange_interval)
    correction = 0.0
    locked = True
    fresh_lock = scenario.step_on_lock
    lost_at = None
    windows = []
    events = []
    truth = np.zeros(n_epochs)
    ta = np.zeros(n_epochs, dtype=np.int64)
    tb = np.full(n_epochs, -1, dtype=np.int64)
    emitted = np.zeros(n_epochs, dtype=bool)

    def offset(t_ps):
        return follower(t_ps) - leader(t_ps) - correction + scenario.initial_offset

    while queue:
        t_ps, kind, payload = queue.pop()
        if kind == "exchange":
            j = payload
            if locked:
                n = link(t_ps)
                d_ms, d_sm = d_ms0 + n, d_sm0 - n
                measured = offset(t_ps) + (d_ms - split_forward(d_ms + d_sm, alpha)) + jitter[j]
                correction += measured if fresh_lock else gain * measured
                fresh_lock = False
                events.append({"t_ps": t_ps, "kind": "exchange", "measured_offset_s": measured})
            if j + 1 < n_exchanges:
                queue.push((j + 1) * ex_ps, "exchange", j + 1)
        elif kind == "pps":
            k = payload
            x = offset(t_ps)
            truth[k] = x
            ta[k] = t_ps + int(round(-leader(t_ps) / PS))
            if locked:
                emitted[k] = True
                tb[k] = ta[k] - int(round(x / PS))
            if k + 1 < n_epochs:
                queue.push((k + 1) * pps_ps, "pps", k + 1)
        elif kind == "dropout":
            if locked:
                locked = False
                lost_at = t_ps
                relock = t_ps + max(1, int(round(payload / PS)))
                queue.push(relock, "relock", None)
                events.append({"t_ps": t_ps, "kind": "dropout", "recovery_s": payload})
        elif kind == "relock":
            locked = True
            fresh_lock = scenario.step_on_lock
            windows.append((lost_at, t_ps))
            events.append({"t_ps": t_ps, "kind": "relock"})
    if not locked:
        windows.append((lost_at, duration_ps))

    truth_ps = np.rint(truth / PS).astype(np.int64)
    log = TimestampLog(ta + tdc_ps[:, 0], (tb + tdc_ps[:, 1])[emitted],
                       scenario.pps_interval, scenario.tdc_jitter_rms)
    return SimOutput(scenario, log, TimeErrorSeries(truth_ps, scenario.pps_interval, 0.0),
                     truth, tuple(events), tuple(windows))

"""PPS timestamp logs: pairing into a time-error series, dropouts, uptime."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import AmbiguousPairing, ConfigError, EmptyInput, InvalidArgument, NoOverlap
from .stability import PS, TimeErrorSeries, _read_text, _write_text

DROPOUT_THRESHOLD = 1.5


def _as_channel(values, name):
    v = np.asarray(values)
    if v.size and not np.issubdtype(v.dtype, np.integer):
        raise InvalidArgument(f"channel {name} timestamps must be integer picoseconds")
    v = v.astype(np.int64).ravel()
    if v.size > 1 and np.any(np.diff(v) <= 0):
        raise InvalidArgument(f"channel {name} timestamps must be strictly increasing")
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class TimestampLog:
    """Raw PPS event times from a two-channel TDC.

    Channel A is the leader device, channel B the follower. Timestamps are
    absolute integer picoseconds; ``tdc_jitter_rms`` is metadata only.
    """

    channel_a: np.ndarray
    channel_b: np.ndarray
    nominal_interval: float = 1.0
    tdc_jitter_rms: float = 3e-12

    def __post_init__(self):
        object.__setattr__(self, "channel_a", _as_channel(self.channel_a, "A"))
        object.__setattr__(self, "channel_b", _as_channel(self.channel_b, "B"))
        if not self.nominal_interval > 0:
            raise InvalidArgument("nominal_interval must be positive")

    @property
    def interval_ps(self) -> int:
        return int(round(self.nominal_interval / PS))

    def __eq__(self, other):
        if not isinstance(other, TimestampLog):
            return NotImplemented
        return (np.array_equal(self.channel_a, other.channel_a)
                and np.array_equal(self.channel_b, other.channel_b)
                and self.nominal_interval == other.nominal_interval)


class Gap(NamedTuple):
    position: int       # index of the first retained sample after the gap
    missing: int        # number of epochs removed


@dataclass(frozen=True, eq=False)
class PairedSeries:
    """Time error per retained epoch, with the removed epochs recorded as gaps."""

    samples_ps: np.ndarray
    epochs: np.ndarray
    tau0: float
    origin_time: float
    gaps: tuple[Gap, ...]

    def __len__(self):
        return self.samples_ps.size

    @property
    def series(self) -> TimeErrorSeries:
        """All retained samples back to back, gap epochs dropped."""
        return TimeErrorSeries(self.samples_ps, self.tau0, self.epoch_time(self.epochs[0]))

    def epoch_time(self, epoch) -> float:
        return self.origin_time + float(epoch) * self.tau0

    def segment_bounds(self) -> list[tuple[int, int]]:
        cuts = [0] + [g.position for g in self.gaps] + [len(self)]
        return list(zip(cuts[:-1], cuts[1:]))

    def segments(self) -> list[TimeErrorSeries]:
        return [TimeErrorSeries(self.samples_ps[lo:hi], self.tau0, self.epoch_time(self.epochs[lo]))
                for lo, hi in self.segment_bounds()]


def _epoch_index(t, ref, period):
    return (t - ref + period // 2) // period


def pair_pps(log: TimestampLog, skew_offset: float = 0.0) -> PairedSeries:
    """Pair leader and follower pulses by epoch; ``x_i = t_a(i) - t_b(i)``.

    Each pulse is assigned to the nearest nominal epoch counted from the
    first leader pulse. ``skew_offset`` (seconds, follower minus leader) is
    removed before the assignment only, so values keep the full skew.
    Epochs without a pulse on both channels are dropped and recorded in
    :attr:`PairedSeries.gaps`.

    Raises:
        EmptyInput: a channel has no pulses.
        AmbiguousPairing: two pulses fall in one epoch or a pair is more than
            half an interval apart after the skew offset.
        NoOverlap: the channels share no epoch.
    """
    a, b = log.channel_a, log.channel_b
    if a.size == 0 or b.size == 0:
        raise EmptyInput("both PPS channels need at least one pulse")
    period = log.interval_ps
    skew_ps = int(round(skew_offset / PS))
    ref = int(a[0])
    ea = _epoch_index(a, ref, period)
    eb = _epoch_index(b - skew_ps, ref, period)
    for name, e in (("A", ea), ("B", eb)):
        if e.size > 1 and np.any(np.diff(e) == 0):
            raise AmbiguousPairing(f"two channel {name} pulses fall in one epoch")
    common, ia, ib = np.intersect1d(ea, eb, assume_unique=True, return_indices=True)
    if common.size == 0:
        raise NoOverlap("channels share no PPS epoch")
    x = a[ia] - b[ib]
    if np.any(np.abs(x + skew_ps) * 2 >= period):
        raise AmbiguousPairing("pulse pair more than half an interval apart; supply skew_offset")
    steps = np.diff(common)
    where = np.nonzero(steps > 1)[0]
    gaps = tuple(Gap(int(i) + 1, int(steps[i]) - 1) for i in where)
    return PairedSeries(x, common, log.nominal_interval, ref * PS, gaps)


class Dropout(NamedTuple):
    start: float            # last good follower pulse, seconds
    duration: float         # gap minus one nominal interval, seconds
    missing_pulses: int


@dataclass(frozen=True)
class DropoutReport:
    dropouts: tuple[Dropout, ...]
    total_duration: float
    uptime_fraction: float

    @property
    def count(self) -> int:
        return len(self.dropouts)

    def to_dict(self) -> dict:
        return {
            "dropouts": [d._asdict() for d in self.dropouts],
            "total_duration": self.total_duration,
            "uptime_fraction": self.uptime_fraction,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def detect_dropouts(log: TimestampLog) -> DropoutReport:
    """Find follower gaps longer than 1.5 nominal intervals.

    Downtime is counted from the last good pulse: a gap of ``g`` seconds
    contributes ``g - T``. The observation span runs from the first to the
    last pulse on either channel plus one interval.
    """
    b = log.channel_b
    if b.size == 0:
        raise EmptyInput("follower channel has no pulses")
    period = log.interval_ps
    steps = np.diff(b)
    idx = np.nonzero(steps > DROPOUT_THRESHOLD * period)[0]
    dropouts = tuple(
        Dropout(float(b[i]) * PS, float(steps[i] - period) * PS,
                int(round(steps[i] / period)) - 1)
        for i in idx)
    firsts = [int(c[0]) for c in (log.channel_a, b) if c.size]
    lasts = [int(c[-1]) for c in (log.channel_a, b) if c.size]
    total_ps = max(lasts) - min(firsts) + period
    down_ps = int(sum(int(steps[i]) - period for i in idx))
    uptime = min(1.0, max(0.0, (total_ps - down_ps) / total_ps))
    return DropoutReport(dropouts, total_ps * PS, uptime)


def longest_clean_segment(paired: PairedSeries | TimeErrorSeries) -> TimeErrorSeries:
    """Longest gap-free run; ties go to the earliest run."""
    if isinstance(paired, TimeErrorSeries):
        return paired
    if len(paired) == 0:
        raise EmptyInput("no samples")
    segments = paired.segments()
    lengths = [len(s) for s in segments]
    return segments[int(np.argmax(lengths))]


# -- file interfaces --------------------------------------------------------

def write_log_csv(log: TimestampLog, dest) -> None:
    """One row per event, ``channel,timestamp_ps``, in time order (A first on ties)."""
    times = np.concatenate([log.channel_a, log.channel_b])
    chans = np.concatenate([np.zeros(log.channel_a.size, np.int8), np.ones(log.channel_b.size, np.int8)])
    order = np.lexsort((chans, times))
    names = ("A", "B")
    lines = ["channel,timestamp_ps"]
    lines += [f"{names[c]},{t}" for c, t in zip(chans[order].tolist(), times[order].tolist())]
    _write_text(dest, "\n".join(lines) + "\n")


def read_log_csv(src, nominal_interval: float = 1.0, tdc_jitter_rms: float = 3e-12) -> TimestampLog:
    reader = csv.reader(io.StringIO(_read_text(src)))
    try:
        header = [h.strip().lower() for h in next(reader)]
    except StopIteration:
        raise ConfigError("empty log CSV") from None
    if header != ["channel", "timestamp_ps"]:
        raise ConfigError(f"unexpected log CSV header {header}")
    chans = {"A": [], "B": []}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            chans[row[0].strip().upper()].append(int(row[1]))
        except (KeyError, IndexError, ValueError):
            raise ConfigError(f"bad log CSV row {lineno}: {row}") from None
    try:
        return TimestampLog(np.array(chans["A"], np.int64), np.array(chans["B"], np.int64),
                            nominal_interval, tdc_jitter_rms)
    except InvalidArgument as exc:
        raise ConfigError(str(exc)) from None


def write_dropout_json(report: DropoutReport, dest) -> None:
    _write_text(dest, report.to_json())


def read_dropout_json(src) -> DropoutReport:
    try:
        raw = json.loads(_read_text(src))
        drops = tuple(Dropout(float(d["start"]), float(d["duration"]), int(d["missing_pulses"]))
                      for d in raw["dropouts"])
        return DropoutReport(drops, float(raw["total_duration"]), float(raw["uptime_fraction"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad dropout report: {exc}") from None


def uptime_percent(report: DropoutReport) -> float:
    """Uptime in percent rounded to two decimals, as usually quoted."""
    return round(report.uptime_fraction * 100.0, 2)


__all__ = [
    "TimestampLog", "PairedSeries", "Gap", "Dropout", "DropoutReport",
    "pair_pps", "detect_dropouts", "longest_clean_segment",
    "write_log_csv", "read_log_csv", "write_dropout_json", "read_dropout_json",
    "uptime_percent", "DROPOUT_THRESHOLD",
]

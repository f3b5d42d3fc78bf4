"""The log-to-summary pipeline: pair, find dropouts, pick the clean run, evaluate."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import InsufficientData, InvalidArgument
from .pps import DropoutReport, TimestampLog, detect_dropouts, longest_clean_segment, pair_pps
from .stability import StabilityCurve, Statistic, TimeErrorSeries, mtie, stability_curve

DEFAULT_STATS = (Statistic.TDEV, Statistic.MTIE)
MTIE_SUMMARY_TAU = 100.0


@dataclass(frozen=True)
class Analysis:
    curves: tuple[StabilityCurve, ...]
    dropouts: DropoutReport
    segment: TimeErrorSeries
    summary: dict


def parse_stats(text: str | Sequence[str] | None) -> tuple[Statistic, ...]:
    if text is None:
        return DEFAULT_STATS
    items = text.split(",") if isinstance(text, str) else list(text)
    try:
        return tuple(dict.fromkeys(Statistic(s.strip()) for s in items if s.strip()))
    except ValueError:
        raise InvalidArgument(f"unknown statistic in {text!r}; use tdev, mtie, adev") from None


def parse_taus(text: str | None):
    """``None``/"octave" for the default grid, "dense", or comma-separated factors."""
    if text is None or text == "octave":
        return None, False
    if text == "dense":
        return None, True
    try:
        factors = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InvalidArgument(f"bad tau list {text!r}; integers, 'octave' or 'dense'") from None
    if not factors or min(factors) < 1:
        raise InvalidArgument("tau factors must be positive integers")
    return factors, False


def _finite(v):
    return None if v is None else float(v)


def summarise(curves, segment: TimeErrorSeries, dropouts: DropoutReport, paired_len: int) -> dict:
    summary = {
        "paired_samples": paired_len,
        "segment_samples": len(segment),
        "segment_start_s": segment.origin_time,
        "dropout_count": dropouts.count,
        "uptime_fraction": dropouts.uptime_fraction,
        "uptime_percent": round(dropouts.uptime_fraction * 100.0, 2),
        "min_tdev_s": None,
        "min_tdev_tau_s": None,
        "mtie_100s_s": None,
    }
    for curve in curves:
        if curve.statistic is Statistic.TDEV and len(curve):
            best = min(curve.points, key=lambda p: p.value)
            summary["min_tdev_s"] = best.value
            summary["min_tdev_tau_s"] = best.tau
    n = int(round(MTIE_SUMMARY_TAU / segment.tau0))
    try:
        summary["mtie_100s_s"] = _finite(mtie(segment, n))
    except (InsufficientData, InvalidArgument):
        pass
    return summary


def analyze_log(log: TimestampLog, stats=DEFAULT_STATS, taus=None, dense: bool = False,
                skew_offset: float = 0.0) -> Analysis:
    """Run the whole chain on one log; curves use the longest clean segment."""
    paired = pair_pps(log, skew_offset)
    dropouts = detect_dropouts(log)
    segment = longest_clean_segment(paired)
    curves = tuple(stability_curve(segment, s, taus, dense) for s in stats)
    return Analysis(curves, dropouts, segment, summarise(curves, segment, dropouts, len(paired)))

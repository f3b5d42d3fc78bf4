"""Clock-stability statistics on uniformly sampled phase-error series.

Phase errors are held as integer picoseconds, so second differences and
windowed extrema are exact; only the final sums of squares are done in
double precision.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, InsufficientData, InvalidArgument

logger = logging.getLogger(__name__)

PS = 1e-12
_INT_SAFE = 2**62


@dataclass(frozen=True, eq=False)
class TimeErrorSeries:
    """Uniformly sampled phase error ``x_i`` with sample interval ``tau0``.

    Sample ``i`` sits at ``origin_time + i * tau0``. Build from seconds with
    :meth:`from_seconds`; the constructor takes integer picoseconds.
    """

    samples_ps: np.ndarray
    tau0: float = 1.0
    origin_time: float | None = None

    def __post_init__(self):
        x = np.asarray(self.samples_ps)
        if x.ndim != 1 or x.size < 1:
            raise InvalidArgument("a time-error series needs at least one sample")
        if not np.issubdtype(x.dtype, np.integer):
            if not np.all(np.isfinite(x)):
                raise InvalidArgument("phase errors must be finite")
            x = np.rint(x)
        x = x.astype(np.int64)
        x.setflags(write=False)
        if not (self.tau0 > 0 and math.isfinite(self.tau0)):
            raise InvalidArgument(f"tau0 must be positive, got {self.tau0!r}")
        object.__setattr__(self, "samples_ps", x)
        object.__setattr__(self, "tau0", float(self.tau0))

    @classmethod
    def from_seconds(cls, values, tau0=1.0, origin_time=None) -> "TimeErrorSeries":
        v = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("phase errors must be finite")
        return cls(np.rint(v / PS).astype(np.int64), tau0, origin_time)

    @property
    def seconds(self) -> np.ndarray:
        return self.samples_ps * PS

    def times(self) -> np.ndarray:
        start = 0.0 if self.origin_time is None else self.origin_time
        return start + np.arange(len(self)) * self.tau0

    def __len__(self):
        return self.samples_ps.size

    def __eq__(self, other):
        if not isinstance(other, TimeErrorSeries):
            return NotImplemented
        return (self.tau0 == other.tau0 and self.origin_time == other.origin_time
                and np.array_equal(self.samples_ps, other.samples_ps))


class Statistic(str, Enum):
    TDEV = "TDEV"
    MTIE = "MTIE"
    ADEV = "ADEV"

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str) and value.upper() in cls.__members__:
            return cls[value.upper()]
        return None


class StabilityPoint(NamedTuple):
    tau: float
    value: float
    factor: int
    num_terms: int


@dataclass(frozen=True)
class StabilityCurve:
    """One statistic evaluated over a grid of averaging factors.

    ``factor`` is ``m`` for TDEV/ADEV and the window parameter ``n`` for MTIE.
    TDEV and MTIE values are in seconds; ADEV is dimensionless.
    """

    statistic: Statistic
    points: tuple[StabilityPoint, ...]
    tau0: float = 1.0
    warnings: tuple[str, ...] = field(default=())

    @property
    def taus(self) -> np.ndarray:
        return np.array([p.tau for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points])

    @property
    def factors(self) -> np.ndarray:
        return np.array([p.factor for p in self.points], dtype=np.int64)

    def relative_uncertainty(self) -> np.ndarray:
        """``1/sqrt(num_terms)`` per point.

        A rough heuristic for plotting error bars, not a chi-square interval.
        """
        return np.array([1.0 / math.sqrt(p.num_terms) for p in self.points])

    def __len__(self):
        return len(self.points)


def _check_factor(k, name):
    if isinstance(k, bool) or int(k) != k:
        raise InvalidArgument(f"{name} must be an integer, got {k!r}")
    k = int(k)
    if k < 1:
        raise InvalidArgument(f"{name} must be >= 1, got {k}")
    return k


def _second_difference(x: np.ndarray, m: int) -> np.ndarray:
    return x[2 * m:] - 2 * x[m:-m] + x[:-2 * m]


def _centred(series: TimeErrorSeries) -> np.ndarray:
    x = series.samples_ps
    return x - x[0]


def _tdev_sq_ps(series: TimeErrorSeries, m: int) -> tuple[float, int]:
    x = _centred(series)
    n_terms = x.size - 3 * m + 1
    d = _second_difference(x, m)
    bound = 4 * int(np.abs(x).max()) * d.size
    if bound < _INT_SAFE:
        prefix = np.concatenate(([0], np.cumsum(d)))
    else:
        prefix = np.concatenate(([0.0], np.cumsum(d.astype(float))))
    inner = (prefix[m:m + n_terms] - prefix[:n_terms]).astype(float)
    total = math.fsum(inner * inner)
    return total / (6.0 * m * m * n_terms), n_terms


def tdev(series: TimeErrorSeries, m: int) -> float:
    """Time deviation at ``tau = m * tau0``, in seconds.

    Evaluates the second-difference double sum with a prefix sum over the
    second differences, O(N) per ``m``. Insensitive to constant offsets and
    linear ramps in the input.

    Raises:
        InvalidArgument: ``m < 1``.
        InsufficientData: fewer than ``3m`` samples.
    """
    m = _check_factor(m, "m")
    if len(series) < 3 * m:
        raise InsufficientData(f"TDEV at m={m} needs {3 * m} samples, have {len(series)}")
    var, _ = _tdev_sq_ps(series, m)
    return math.sqrt(var) * PS


def _window_extrema(x: np.ndarray, w: int) -> tuple[np.ndarray, np.ndarray]:
    """Max and min of every run of ``w`` consecutive samples.

    van Herk / Gil-Werman block scheme: three passes of O(N) each, no
    per-window work. Padding is never read by a valid window.
    """
    n = x.size
    n_blocks = -(-n // w)
    padded = np.concatenate([x, np.full(n_blocks * w - n, x[-1])]).reshape(n_blocks, w)
    count = n - w + 1
    hi_fwd = np.maximum.accumulate(padded, axis=1).ravel()
    hi_bwd = np.maximum.accumulate(padded[:, ::-1], axis=1)[:, ::-1].ravel()
    lo_fwd = np.minimum.accumulate(padded, axis=1).ravel()
    lo_bwd = np.minimum.accumulate(padded[:, ::-1], axis=1)[:, ::-1].ravel()
    hi = np.maximum(hi_bwd[:count], hi_fwd[w - 1:n])
    lo = np.minimum(lo_bwd[:count], lo_fwd[w - 1:n])
    return hi, lo


def _mtie_ps(series: TimeErrorSeries, n: int) -> int:
    hi, lo = _window_extrema(series.samples_ps, n + 1)
    return int((hi - lo).max())


def mtie(series: TimeErrorSeries, n: int) -> float:
    """Maximum time interval error for windows of ``n + 1`` samples, in seconds.

    Raises:
        InvalidArgument: ``n < 1``.
        InsufficientData: fewer than ``n + 1`` samples.
    """
    n = _check_factor(n, "n")
    if len(series) < n + 1:
        raise InsufficientData(f"MTIE at n={n} needs {n + 1} samples, have {len(series)}")
    return _mtie_ps(series, n) * PS


def adev(series: TimeErrorSeries, m: int) -> float:
    """Overlapping Allan deviation of the fractional frequency implied by phase.

    ``sigma_y^2(tau) = sum (x[i+2m] - 2 x[i+m] + x[i])^2 / (2 tau^2 (N - 2m))``
    with ``tau = m * tau0``.
    """
    m = _check_factor(m, "m")
    if len(series) < 2 * m + 1:
        raise InsufficientData(f"ADEV at m={m} needs {2 * m + 1} samples, have {len(series)}")
    d = _second_difference(_centred(series), m).astype(float) * PS
    tau = m * series.tau0
    return math.sqrt(math.fsum(d * d) / (2.0 * tau * tau * d.size))


def max_factor(statistic: Statistic | str, n_samples: int) -> int:
    statistic = Statistic(statistic)
    if statistic is Statistic.TDEV:
        return n_samples // 3
    if statistic is Statistic.ADEV:
        return (n_samples - 1) // 2
    return n_samples - 1


def octave_factors(limit: int) -> list[int]:
    out = []
    k = 1
    while k <= limit:
        out.append(k)
        k *= 2
    return out


def dense_factors(limit: int, per_decade: int = 10) -> list[int]:
    if limit < 1:
        return []
    grid = np.logspace(0, math.log10(limit), max(2, int(per_decade * math.log10(limit)) + 1))
    return sorted({int(round(v)) for v in grid if 1 <= round(v) <= limit})


def _evaluate(series, statistic, k):
    n = len(series)
    if statistic is Statistic.TDEV:
        return tdev(series, k), n - 3 * k + 1
    if statistic is Statistic.ADEV:
        return adev(series, k), n - 2 * k
    return mtie(series, k), n - k


def stability_curve(series: TimeErrorSeries, statistic: Statistic | str,
                    taus: Iterable[int] | None = None, dense: bool = False) -> StabilityCurve:
    """Evaluate one statistic over a grid of integer averaging factors.

    Without ``taus`` the grid is octave spaced (1, 2, 4, ...) up to the
    largest valid factor, or about ten points per decade when ``dense``.
    Factors that fail their precondition are dropped with a warning; the
    call only raises when nothing is left.
    """
    statistic = Statistic(statistic)
    if taus is None:
        limit = max_factor(statistic, len(series))
        taus = dense_factors(limit) if dense else octave_factors(limit)
    points, notes = [], []
    for k in sorted(set(taus)):
        try:
            value, n_terms = _evaluate(series, statistic, k)
        except (InsufficientData, InvalidArgument) as exc:
            msg = f"{statistic.value} factor {k} skipped: {exc}"
            logger.warning(msg)
            notes.append(msg)
            continue
        points.append(StabilityPoint(int(k) * series.tau0, value, int(k), n_terms))
    if not points:
        raise InsufficientData(f"no valid {statistic.value} factor for a {len(series)}-sample series")
    return StabilityCurve(statistic, tuple(points), series.tau0, tuple(notes))


def loglog_slope(curve: StabilityCurve, tau_min=None, tau_max=None) -> float:
    """Least-squares slope of log10(value) against log10(tau)."""
    taus, values = curve.taus, curve.values
    keep = values > 0
    if tau_min is not None:
        keep &= taus >= tau_min
    if tau_max is not None:
        keep &= taus <= tau_max
    if keep.sum() < 2:
        raise InsufficientData("need two positive points to fit a slope")
    slope, _ = np.polyfit(np.log10(taus[keep]), np.log10(values[keep]), 1)
    return float(slope)


# -- CSV interfaces ---------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.12g}"


def write_series_csv(series: TimeErrorSeries, dest) -> None:
    """Two columns: ``time_s,phase_error_ps``."""
    rows = ["time_s,phase_error_ps"]
    rows += [f"{_fmt(t)},{int(x)}" for t, x in zip(series.times(), series.samples_ps)]
    _write_text(dest, "\n".join(rows) + "\n")


def read_series_csv(src, tau0: float | None = None) -> TimeErrorSeries:
    """Read ``time_s,phase_error_ps`` or ``index,phase_error_ps``.

    With a time column the sample interval is inferred and must be uniform;
    gapped series are rejected. With an index column ``tau0`` defaults to 1 s.
    """
    reader = csv.reader(io.StringIO(_read_text(src)))
    try:
        header = [h.strip().lower() for h in next(reader)]
    except StopIteration:
        raise ConfigError("empty series CSV") from None
    if len(header) != 2 or header[1] != "phase_error_ps" or header[0] not in ("time_s", "index"):
        raise ConfigError(f"unexpected series CSV header {header}")
    try:
        rows = [(float(a), float(b)) for a, b in (r for r in reader if r)]
    except ValueError as exc:
        raise ConfigError(f"bad series CSV row: {exc}") from None
    if not rows:
        raise ConfigError("series CSV has no samples")
    first, values = np.array(rows).T
    if header[0] == "index":
        return TimeErrorSeries(values, 1.0 if tau0 is None else tau0)
    origin = float(first[0])
    if first.size == 1:
        return TimeErrorSeries(values, 1.0 if tau0 is None else tau0, origin)
    steps = np.diff(first)
    step = float(np.median(steps)) if tau0 is None else tau0
    if step <= 0 or not np.allclose(steps, step, rtol=1e-9, atol=1e-9):
        raise ConfigError("series CSV is not uniformly sampled; split it at gaps first")
    return TimeErrorSeries(values, step, origin)


def write_curves_csv(curves: Sequence[StabilityCurve], dest) -> None:
    """Long format: ``statistic,tau_s,value_s,num_terms``."""
    rows = ["statistic,tau_s,value_s,num_terms"]
    for curve in curves:
        for p in curve.points:
            rows.append(f"{curve.statistic.value},{_fmt(p.tau)},{_fmt(p.value)},{p.num_terms}")
    _write_text(dest, "\n".join(rows) + "\n")


def read_curves_csv(src, tau0: float = 1.0) -> list[StabilityCurve]:
    """Inverse of :func:`write_curves_csv`; factors are recovered as tau / tau0."""
    reader = csv.DictReader(io.StringIO(_read_text(src)))
    grouped: dict[Statistic, list[StabilityPoint]] = {}
    try:
        for row in reader:
            stat = Statistic(row["statistic"])
            grouped.setdefault(stat, []).append(
                StabilityPoint(float(row["tau_s"]), float(row["value_s"]), 0, int(row["num_terms"])))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad curve CSV: {exc}") from None
    curves = []
    for stat, pts in grouped.items():
        pts.sort()
        curves.append(StabilityCurve(stat, tuple(
            p._replace(factor=int(round(p.tau / tau0))) for p in pts), tau0))
    return curves


def _write_text(dest, text: str) -> None:
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text, newline="")


def _read_text(src) -> str:
    if hasattr(src, "read"):
        return src.read()
    return Path(src).read_text()

"""Fibre asymmetry parameter: alpha, its fixed-point encoding, residual skew.

Two encodings are supported. ``"paper"`` is

    alpha_n = 2**40 * ((alpha - 1) / (alpha - 2) - 1/2)

and ``"conventional"`` (the usual WR calibration convention) is

    alpha_n = 2**40 * ((alpha + 1) / (alpha + 2) - 1/2)

They agree in magnitude near zero and differ in sign. Either way the result
has to fit a signed 32-bit integer, which limits |alpha| to about 7.8e-3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidArgument, OutOfRange, PoleError

SCALE = 2.0**40
INT32_MIN = -(2**31)
INT32_MAX = 2**31 - 1
MODES = ("paper", "conventional")

_POLE_TOL = 1e-12


def _check_mode(mode):
    if mode not in MODES:
        raise InvalidArgument(f"alpha mode must be one of {MODES}, got {mode!r}")


def in_range(alpha_n: int) -> bool:
    return INT32_MIN <= alpha_n <= INT32_MAX


def alpha_from_latencies(delta_ms: float, delta_sm: float) -> float:
    """``delta_ms / delta_sm - 1`` for leader->follower and follower->leader latency."""
    if not (delta_ms > 0 and delta_sm > 0):
        raise InvalidArgument("latencies must be positive")
    return delta_ms / delta_sm - 1.0


def _ratio(alpha, mode):
    if mode == "paper":
        if abs(alpha - 2.0) < _POLE_TOL:
            raise PoleError("alpha = 2 is a pole of the encoding", value=math.inf)
        return (alpha - 1.0) / (alpha - 2.0)
    if abs(alpha + 2.0) < _POLE_TOL:
        raise PoleError("alpha = -2 is a pole of the encoding", value=math.inf)
    return (alpha + 1.0) / (alpha + 2.0)


def encode_exact(alpha: float, mode: str = "paper") -> float:
    """Unrounded fixed-point value; used for range inversion and derivatives."""
    _check_mode(mode)
    return SCALE * (_ratio(alpha, mode) - 0.5)


def alpha_to_alpha_n(alpha: float, mode: str = "paper") -> int:
    """Round the encoded alpha to the nearest integer and check the int32 range.

    Raises:
        PoleError: ``alpha`` sits on the encoding's pole (2 in paper mode).
        OutOfRange: the rounded value does not fit; ``exc.value`` holds it.
    """
    value = round(encode_exact(alpha, mode))
    if not in_range(value):
        raise OutOfRange(f"alpha={alpha!r} encodes to {value}, outside signed 32-bit range",
                         value=value)
    return value


def alpha_n_to_alpha(alpha_n: int, mode: str = "paper") -> float:
    """Inverse of :func:`alpha_to_alpha_n`."""
    _check_mode(mode)
    if not in_range(alpha_n):
        raise OutOfRange(f"alpha_n={alpha_n} outside signed 32-bit range", value=alpha_n)
    r = alpha_n / SCALE + 0.5
    if mode == "paper":
        return (2.0 * r - 1.0) / (r - 1.0)
    return (1.0 - 2.0 * r) / (r - 1.0)


def quantization_step(alpha: float, mode: str = "paper") -> float:
    """Change in alpha produced by one unit of alpha_n around ``alpha``."""
    _check_mode(mode)
    pole = 2.0 if mode == "paper" else -2.0
    # d(ratio)/d(alpha) = -+1 / (alpha - pole)^2 for both forms
    return (alpha - pole) ** 2 / SCALE


def alpha_range(mode: str = "paper") -> tuple[float, float]:
    """Smallest and largest alpha whose encoding fits the int32 range.

    Found by inverting the encoding at both integer bounds.
    """
    ends = sorted((alpha_n_to_alpha(INT32_MIN, mode), alpha_n_to_alpha(INT32_MAX, mode)))
    return ends[0], ends[1]


def split_forward(rtt: float, alpha: float) -> float:
    """Forward latency implied by round trip ``rtt`` and asymmetry ``alpha``.

    ``delta_ms = rtt * (1 + alpha) / (2 + alpha)``, which reproduces
    ``alpha = delta_ms / delta_sm - 1`` exactly.
    """
    return rtt * (1.0 + alpha) / (2.0 + alpha)


def correction(alpha: float, rtt: float) -> float:
    """Amount by which an ``alpha``-aware split moves delta_ms away from rtt/2."""
    return rtt * alpha / (2.0 * (2.0 + alpha))


@dataclass(frozen=True)
class AsymmetryConfig:
    """Directional latencies of one link (seconds) and the asymmetry they imply."""

    delta_ms: float
    delta_sm: float

    def __post_init__(self):
        if not (self.delta_ms > 0 and self.delta_sm > 0):
            raise InvalidArgument("latencies must be positive")

    @property
    def alpha(self) -> float:
        return alpha_from_latencies(self.delta_ms, self.delta_sm)

    @property
    def rtt(self) -> float:
        return self.delta_ms + self.delta_sm

    def alpha_n(self, mode: str = "paper") -> int:
        return alpha_to_alpha_n(self.alpha, mode)

    def in_range(self, mode: str = "paper") -> bool:
        try:
            self.alpha_n(mode)
        except OutOfRange:
            return False
        return True

    @classmethod
    def from_profile(cls, profile) -> "AsymmetryConfig":
        return cls(profile.latency("forward"), profile.latency("return"))


def predicted_skew(config: AsymmetryConfig, applied_alpha: float) -> float:
    """Residual PPS skew after two-way transfer that assumes ``applied_alpha``.

    Positive values mean the follower PPS lags the leader. Equals
    ``(delta_ms - delta_sm)/2 - correction(applied_alpha, rtt)``: zero when
    the true alpha is applied, half the latency difference when 0 is applied.
    """
    if not math.isfinite(applied_alpha) or applied_alpha <= -1.0:
        raise InvalidArgument(f"applied alpha must be > -1, got {applied_alpha!r}")
    return (config.delta_ms - config.delta_sm) / 2.0 - correction(applied_alpha, config.rtt)


def calibration_report(config: AsymmetryConfig, mode: str = "paper", applied_alpha: float = 0.0) -> dict:
    """Everything the ``calibrate`` command prints, as plain JSON types."""
    alpha = config.alpha
    report = {
        "delta_ms_s": config.delta_ms,
        "delta_sm_s": config.delta_sm,
        "alpha": alpha,
        "mode": mode,
        "alpha_range": list(alpha_range(mode)),
    }
    try:
        report["alpha_n"] = alpha_to_alpha_n(alpha, mode)
        report["in_range"] = True
        applied = alpha
    except OutOfRange as exc:
        report["alpha_n"] = None if exc.value is None or not math.isfinite(exc.value) else int(exc.value)
        report["in_range"] = False
        applied = applied_alpha
    report["applied_alpha"] = applied
    report["predicted_skew_s"] = predicted_skew(config, applied)
    report["uncompensated_skew_s"] = predicted_skew(config, 0.0)
    return report

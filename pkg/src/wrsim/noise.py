"""Power-law clock phase noise: synthesis and TDEV-curve fitting.

Amplitudes are quoted as the TDEV each component produces at tau = 1 s.
Coloured components are made by shaping white Gaussian noise in the
frequency domain with a ``f**(beta/2)`` mask, where ``S_x(f) ~ f**beta``,
then keeping the central 80% of the record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
from scipy.optimize import nnls

from .errors import IllConditioned, InvalidSpec
from .stability import StabilityCurve, Statistic, TimeErrorSeries

# phase PSD exponent beta and the matching TDEV log-log slope
PHASE_PSD_EXPONENT = {
    "white_pm": 0.0,
    "flicker_pm": -1.0,
    "white_fm": -2.0,
    "random_walk_fm": -4.0,
}
TDEV_SLOPE = {
    "white_pm": -0.5,
    "flicker_pm": 0.0,
    "white_fm": 0.5,
    "random_walk_fm": 1.5,
}
NOISE_TYPES = tuple(PHASE_PSD_EXPONENT)

KEEP_FRACTION = 0.8


class NoiseComponent(NamedTuple):
    kind: str
    amplitude: float    # TDEV at tau = 1 s, seconds


@dataclass(frozen=True)
class NoiseSpec:
    components: tuple[NoiseComponent, ...] = ()
    seed: int = 0
    n_samples: int = 1
    tau0: float = 1.0

    def __post_init__(self):
        comps = tuple(NoiseComponent(*c) for c in self.components)
        for c in comps:
            if c.kind not in PHASE_PSD_EXPONENT:
                raise InvalidSpec(f"unknown noise type {c.kind!r}; expected one of {NOISE_TYPES}")
            if not (c.amplitude >= 0 and math.isfinite(c.amplitude)):
                raise InvalidSpec(f"amplitude must be finite and >= 0, got {c.amplitude!r}")
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise InvalidSpec("n_samples must be a positive integer")
        if not self.tau0 > 0:
            raise InvalidSpec("tau0 must be positive")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "n_samples", int(self.n_samples))

    def with_length(self, n_samples: int, tau0: float | None = None) -> "NoiseSpec":
        return NoiseSpec(self.components, self.seed, n_samples, self.tau0 if tau0 is None else tau0)

    @property
    def is_silent(self) -> bool:
        return all(c.amplitude == 0 for c in self.components)


def _rfft_sum(values, length):
    weights = np.full(values.size, 2.0)
    weights[0] = 1.0
    if length % 2 == 0:
        weights[-1] = 1.0
    return float(np.dot(weights, values))


def _mask(kind, length, tau0):
    beta = PHASE_PSD_EXPONENT[kind]
    if beta == 0.0:
        return None
    f = np.fft.rfftfreq(length, tau0)
    m = np.zeros(f.size)
    m[1:] = (f[1:] * tau0) ** (beta / 2.0)
    return m


def expected_tdev(kind: str, m: int, length: int, tau0: float = 1.0) -> float:
    """Expected TDEV at factor ``m`` of a unit-input shaped record of ``length``.

    Exact for the circular process the generator draws from, so scaling by
    it pins the ensemble TDEV at the reference tau regardless of seed.
    """
    if 3 * m > length:
        raise InvalidSpec(f"record of {length} samples is too short for m={m}")
    mask = _mask(kind, length, tau0)
    if mask is None:
        return 1.0 / math.sqrt(m)
    kernel = np.zeros(length)
    kernel[:m], kernel[m:2 * m], kernel[2 * m:3 * m] = 1.0, -2.0, 1.0
    power = np.abs(np.fft.rfft(kernel)) ** 2 * mask**2
    return math.sqrt(_rfft_sum(power, length) / length / (6.0 * m * m))


def _component(kind, amplitude, n, tau0, rng):
    length = max(int(math.ceil(n / KEEP_FRACTION)), 3)
    start = (length - n) // 2
    white = rng.standard_normal(length)
    mask = _mask(kind, length, tau0)
    shaped = white if mask is None else np.fft.irfft(np.fft.rfft(white) * mask, length)
    m_ref = max(1, int(round(1.0 / tau0)))
    tau_ref = m_ref * tau0
    while 3 * m_ref > length and m_ref > 1:
        m_ref //= 2
        tau_ref = m_ref * tau0
    target = amplitude * tau_ref ** TDEV_SLOPE[kind]
    return shaped[start:start + n] * (target / expected_tdev(kind, m_ref, length, tau0))


def synthesize_seconds(spec: NoiseSpec) -> np.ndarray:
    """Sum of the components of ``spec`` as a float array in seconds."""
    out = np.zeros(spec.n_samples)
    children = np.random.SeedSequence(spec.seed).spawn(len(spec.components))
    for comp, child in zip(spec.components, children):
        if comp.amplitude == 0:
            continue
        out += _component(comp.kind, comp.amplitude, spec.n_samples, spec.tau0,
                          np.random.default_rng(child))
    return out


def synthesize(spec: NoiseSpec) -> TimeErrorSeries:
    """Deterministic phase-noise series for ``spec`` (rounded to picoseconds)."""
    return TimeErrorSeries.from_seconds(synthesize_seconds(spec), spec.tau0)


class NoiseFit(NamedTuple):
    amplitudes: dict
    residual: float          # weighted RMS relative error of the fitted TDEV curve

    def to_spec(self, n_samples, tau0=1.0, seed=0) -> NoiseSpec:
        return NoiseSpec(tuple(NoiseComponent(k, a) for k, a in self.amplitudes.items()),
                         seed, n_samples, tau0)


def fit_noise_mixture(curve: StabilityCurve, kinds: Iterable[str] = NOISE_TYPES,
                      min_points: int = 5, min_decades: float = 1.5) -> NoiseFit:
    """Non-negative least-squares fit of component amplitudes to a TDEV curve.

    The model is ``TDEV^2(tau) = sum_k a_k^2 * tau**(2 s_k)`` with the
    theoretical slopes ``s_k``; rows are weighted by the measured value so
    the fit is in relative terms, and by ``sqrt(num_terms / m)``, a rough
    count of independent averages, so the noisy long-tau end of a curve does
    not dominate. Amplitudes only; which physical process
    produces a component is not inferred.

    Raises:
        IllConditioned: too few points or too narrow a tau span.
    """
    kinds = tuple(kinds)
    for k in kinds:
        if k not in TDEV_SLOPE:
            raise InvalidSpec(f"unknown noise type {k!r}")
    if curve.statistic is not Statistic.TDEV:
        raise InvalidSpec("noise fitting needs a TDEV curve")
    taus, values = curve.taus, curve.values
    if taus.size < min_points:
        raise IllConditioned(f"need at least {min_points} points, have {taus.size}")
    span = math.log10(taus.max() / taus.min())
    if span < min_decades:
        raise IllConditioned(f"tau span {span:.2f} decades is below {min_decades}")
    if not np.any(values > 0):
        return NoiseFit({k: 0.0 for k in kinds}, 0.0)
    keep = values > 0
    taus, values = taus[keep], values[keep]
    dof = np.array([p.num_terms / p.factor for p in curve.points])[keep]
    row = np.sqrt(dof / dof.max())
    design = np.column_stack([taus ** (2 * TDEV_SLOPE[k]) for k in kinds]) / values[:, None] ** 2
    col_norm = np.linalg.norm(design * row[:, None], axis=0)
    scaled = design * row[:, None] / col_norm
    if np.linalg.cond(scaled) > 1e10:
        raise IllConditioned("tau span cannot separate the requested components")
    weights, _ = nnls(scaled, row)
    variances = weights / col_norm
    amplitudes = {k: float(math.sqrt(v)) for k, v in zip(kinds, variances)}
    fitted = np.sqrt(design @ variances) * values
    residual = float(np.sqrt(np.average((fitted / values - 1.0) ** 2, weights=row**2)))
    return NoiseFit(amplitudes, residual)

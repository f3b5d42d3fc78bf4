"""Optical power chain: segmented fibre, EDFAs, bandpass filter, SFP receiver.

Powers are propagated in watts internally and reported in dBm. ASE is
tracked two ways: its total broadband power, and its spectral density at
the signal wavelength. A channel filter keeps only the in-band part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import h as PLANCK

from .errors import EmptyProfile, InvalidArgument, InvalidChain

GROUP_INDEX = 1.468
# microseconds per km at the group index above
DEFAULT_GROUP_DELAY_US_PER_KM = GROUP_INDEX / SPEED_OF_LIGHT * 1e9

# ITU-T G.652 fibre: zero-dispersion wavelength and slope
ZERO_DISPERSION_NM = 1313.0
DISPERSION_SLOPE_PS_NM2_KM = 0.092
OSNR_REFERENCE_HZ = 12.5e9          # 0.1 nm at 1550 nm

DIRECTIONS = ("forward", "return")


def dbm_to_mw(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0)


def mw_to_dbm(p_mw: float) -> float:
    if p_mw <= 0:
        return -math.inf
    return 10.0 * math.log10(p_mw)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return -math.inf if x <= 0 else 10.0 * math.log10(x)


def _w_to_dbm(p_w):
    return mw_to_dbm(p_w * 1e3)


def _dbm_to_w(p_dbm):
    return dbm_to_mw(p_dbm) * 1e-3


def wavelength_span_hz(span_nm: float, centre_nm: float = 1550.0) -> float:
    """Optical bandwidth in Hz of a wavelength span around ``centre_nm``."""
    return SPEED_OF_LIGHT * span_nm * 1e-9 / (centre_nm * 1e-9) ** 2


def group_delay_us_per_km(wavelength_nm: float) -> float:
    """Group delay of standard single-mode fibre at ``wavelength_nm``.

    Uses the G.652 fit ``tau(l) = tau0 + S0/8 * (l - l0**2 / l)**2`` anchored
    so that 1550 nm gives the default group index.
    """
    def rel_ps(lam):
        return DISPERSION_SLOPE_PS_NM2_KM / 8.0 * (lam - ZERO_DISPERSION_NM**2 / lam) ** 2
    return DEFAULT_GROUP_DELAY_US_PER_KM + (rel_ps(wavelength_nm) - rel_ps(1550.0)) * 1e-6


def _check_direction(direction):
    if direction not in DIRECTIONS:
        raise InvalidArgument(f"direction must be one of {DIRECTIONS}, got {direction!r}")


@dataclass(frozen=True)
class FibreSegment:
    length_km: float
    loss_db_per_km: float
    label: str = ""

    def __post_init__(self):
        if not self.length_km > 0:
            raise InvalidArgument(f"segment length must be positive, got {self.length_km}")
        if not self.loss_db_per_km > 0:
            raise InvalidArgument(f"loss coefficient must be positive, got {self.loss_db_per_km}")

    @property
    def loss_db(self) -> float:
        return self.length_km * self.loss_db_per_km


@dataclass(frozen=True)
class ChannelProfile:
    """Forward (leader to follower) and return fibre paths.

    ``return_path=None`` means the return direction uses the same fibre
    (simplex). ``connector_loss_db`` is an extra per-direction loss on top of
    the segment coefficients (patch panels, splices, connectors).
    """

    forward: tuple[FibreSegment, ...]
    return_path: tuple[FibreSegment, ...] | None = None
    group_delay_us_per_km: float = DEFAULT_GROUP_DELAY_US_PER_KM
    return_group_delay_us_per_km: float | None = None
    connector_loss_db: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "forward", tuple(self.forward))
        if self.return_path is not None:
            object.__setattr__(self, "return_path", tuple(self.return_path))
        if not self.group_delay_us_per_km > 0:
            raise InvalidArgument("group delay must be positive")
        if self.connector_loss_db < 0:
            raise InvalidArgument("connector loss cannot be negative")

    @classmethod
    def uniform(cls, length_km, loss_db_per_km, n_segments=1, return_km=None, **kw) -> "ChannelProfile":
        def build(total):
            return tuple(FibreSegment(total / n_segments, loss_db_per_km, f"spool {i + 1}")
                         for i in range(n_segments))
        back = None if return_km is None else build(return_km)
        return cls(build(length_km), back, **kw)

    def segments(self, direction="forward") -> tuple[FibreSegment, ...]:
        _check_direction(direction)
        if direction == "return" and self.return_path is not None:
            return self.return_path
        return self.forward

    def length_km(self, direction="forward") -> float:
        return sum(s.length_km for s in self.segments(direction))

    def latency(self, direction="forward") -> float:
        """One-way propagation latency in seconds."""
        per_km = self.group_delay_us_per_km
        if direction == "return" and self.return_group_delay_us_per_km is not None:
            per_km = self.return_group_delay_us_per_km
        return self.length_km(direction) * per_km * 1e-6

    def span_loss_db(self, direction="forward") -> float:
        return channel_loss(self, direction).total_db + self.connector_loss_db

    def concat(self, other: "ChannelProfile") -> "ChannelProfile":
        back = None
        if self.return_path is not None or other.return_path is not None:
            back = self.segments("return") + other.segments("return")
        return ChannelProfile(self.forward + other.forward, back, self.group_delay_us_per_km,
                              self.return_group_delay_us_per_km,
                              self.connector_loss_db + other.connector_loss_db)


class ChannelLoss(NamedTuple):
    total_db: float
    length_km: float
    average_db_per_km: float


def channel_loss(profile: ChannelProfile, direction: str = "forward") -> ChannelLoss:
    """Sum of segment losses for one direction, with the average coefficient.

    Raises:
        EmptyProfile: the direction has no segments.
    """
    segs = profile.segments(direction)
    if not segs:
        raise EmptyProfile(f"{direction} path has no fibre segments")
    total = math.fsum(s.loss_db for s in segs)
    length = math.fsum(s.length_km for s in segs)
    return ChannelLoss(total, length, total / length)


@dataclass(frozen=True)
class EdfaModel:
    """Erbium-doped fibre amplifier with a hard output clamp.

    Small-signal gain scales linearly (in dB) with ``pump_current_scale``.
    With ``output_setpoint_dbm`` the amplifier runs in constant-output-power
    mode: it raises gain up to the small-signal limit to reach the setpoint,
    and any remainder of the setpoint is broadband ASE outside the signal
    channel.
    """

    small_signal_gain_db: float = 30.0
    max_output_power_dbm: float = 20.0
    noise_figure_db: float = 5.0
    pump_current_scale: float = 1.0
    output_setpoint_dbm: float | None = None
    bandwidth_hz: float = field(default_factory=lambda: wavelength_span_hz(40.0))
    label: str = ""

    def __post_init__(self):
        if not 0.0 <= self.pump_current_scale <= 1.0:
            raise InvalidArgument("pump_current_scale must lie in [0, 1]")
        if self.small_signal_gain_db < 0:
            raise InvalidArgument("small-signal gain cannot be negative")
        if not self.bandwidth_hz > 0:
            raise InvalidArgument("amplifier bandwidth must be positive")

    @property
    def pumped_gain_db(self) -> float:
        return self.small_signal_gain_db * self.pump_current_scale


@dataclass(frozen=True)
class BandpassFilter:
    bandwidth_hz: float = 100e9
    insertion_loss_db: float = 0.0
    label: str = "bandpass"

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise InvalidArgument("filter bandwidth must be positive")


SFP_MODES = ("duplex_single_wavelength", "bidi_two_wavelength")


@dataclass(frozen=True)
class SfpModel:
    launch_power_dbm: float
    max_launch_dbm: float = 5.0
    sensitivity_dbm: float = -23.0
    wavelength_nm: float = 1547.72
    mode: str = "duplex_single_wavelength"
    return_wavelength_nm: float | None = None
    label: str = ""

    def __post_init__(self):
        if self.launch_power_dbm > self.max_launch_dbm:
            raise InvalidArgument(
                f"launch power {self.launch_power_dbm} dBm exceeds maximum {self.max_launch_dbm} dBm")
        if self.mode not in SFP_MODES:
            raise InvalidArgument(f"SFP mode must be one of {SFP_MODES}")

    @property
    def loss_budget_db(self) -> float:
        return self.max_launch_dbm - self.sensitivity_dbm

    def wavelength(self, direction="forward") -> float:
        if direction == "return" and self.return_wavelength_nm is not None:
            return self.return_wavelength_nm
        return self.wavelength_nm


class _Light(NamedTuple):
    signal: float           # W
    ase: float              # W, total broadband
    density: float          # W/Hz at the signal wavelength
    noise_bw: float         # Hz over which ``ase`` is spread


class EdfaOutput(NamedTuple):
    signal_dbm: float
    ase_dbm: float
    gain_db: float
    realized_gain_db: float     # total output over input
    gain_clamped: bool
    ase_dominant: bool

    @property
    def total_dbm(self) -> float:
        return mw_to_dbm(dbm_to_mw(self.signal_dbm) + dbm_to_mw(self.ase_dbm))


def _photon_energy(wavelength_nm):
    return PLANCK * SPEED_OF_LIGHT / (wavelength_nm * 1e-9)


def _amplify(model: EdfaModel, light: _Light, wavelength_nm: float):
    nf = db_to_linear(model.noise_figure_db)
    n_sp_hnu = nf * _photon_energy(wavelength_nm)      # W/Hz per unit (G - 1)
    n_ase = n_sp_hnu * model.bandwidth_hz
    p_in = light.signal + light.ase
    p_max = _dbm_to_w(model.max_output_power_dbm)
    g_pump = db_to_linear(model.pumped_gain_db)
    # largest gain that keeps total output (amplified input + new ASE) under the clamp
    g_cap = (p_max + n_ase) / (p_in + n_ase)
    target = None
    if model.output_setpoint_dbm is not None:
        target = min(_dbm_to_w(model.output_setpoint_dbm), p_max)
        g_req = (target + n_ase) / (p_in + n_ase)
    else:
        g_req = g_pump
    g = max(1.0, min(g_req, g_pump, g_cap))
    clamped = g_req > g_pump or g_req > g_cap
    if g_cap < 1.0:
        g = p_max / p_in
        new_ase = 0.0
    else:
        new_ase = n_ase * (g - 1.0)
    signal = light.signal * g
    ase = light.ase * g + new_ase
    if target is not None and signal + ase < target:
        ase = target - signal
    density = light.density * g + n_sp_hnu * max(g - 1.0, 0.0)
    out = _Light(signal, ase, density, model.bandwidth_hz if ase > 0 else light.noise_bw)
    realized = linear_to_db((signal + ase) / p_in)
    return out, g, clamped, realized


def edfa_output(model: EdfaModel, input_power_dbm: float, wavelength_nm: float = 1550.0) -> EdfaOutput:
    """Amplify a clean signal of ``input_power_dbm``.

    Gain is the pump-scaled small-signal gain, raised toward the setpoint in
    constant-power mode, and always limited so that signal plus ASE stays at
    or below ``max_output_power_dbm``. New ASE is ``NF * h * nu * (G - 1) * B``
    over the amplifier bandwidth ``B``.
    """
    if not math.isfinite(input_power_dbm):
        raise InvalidArgument("input power must be finite")
    out, g, clamped, realized = _amplify(model, _Light(_dbm_to_w(input_power_dbm), 0.0, 0.0, 0.0),
                                         wavelength_nm)
    return EdfaOutput(_w_to_dbm(out.signal), _w_to_dbm(out.ase), linear_to_db(g), realized,
                      clamped, out.ase > out.signal)


class Stage(NamedTuple):
    name: str
    signal_dbm: float
    ase_dbm: float
    total_dbm: float


def _finite_or_none(v):
    return v if math.isfinite(v) else None


@dataclass(frozen=True)
class LinkBudgetReport:
    direction: str
    stages: tuple[Stage, ...]
    received_signal_dbm: float
    sensitivity_dbm: float
    osnr_db: float
    osnr_threshold_db: float
    loss_budget_db: float
    span_loss_db: float
    coefficient_loss_db: float
    marginal_window_db: float = 1.0

    @property
    def margin_db(self) -> float:
        return self.received_signal_dbm - self.sensitivity_dbm

    @property
    def closes(self) -> bool:
        return self.margin_db >= 0 and self.osnr_db >= self.osnr_threshold_db

    @property
    def verdict(self) -> str:
        return "CLOSES" if self.closes else "FAILS"

    @property
    def marginal(self) -> bool:
        return abs(self.margin_db) < self.marginal_window_db

    def stage(self, name: str) -> Stage:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "verdict": self.verdict,
            "marginal": self.marginal,
            "margin_db": self.margin_db,
            "received_signal_dbm": self.received_signal_dbm,
            "sensitivity_dbm": self.sensitivity_dbm,
            "osnr_db_0.1nm": _finite_or_none(self.osnr_db),
            "osnr_threshold_db": self.osnr_threshold_db,
            "loss_budget_db": self.loss_budget_db,
            "span_loss_db": self.span_loss_db,
            "coefficient_loss_db": self.coefficient_loss_db,
            "stages": [{"name": s.name, "signal_dbm": _finite_or_none(s.signal_dbm),
                        "ase_dbm": _finite_or_none(s.ase_dbm),
                        "total_dbm": _finite_or_none(s.total_dbm)} for s in self.stages],
        }

    def table(self) -> str:
        def f(v):
            return "      -" if not math.isfinite(v) else f"{v:7.2f}"
        lines = [f"{'stage':<12} {'signal':>7} {'ASE':>7} {'total':>7}  (dBm, {self.direction})"]
        lines += [f"{s.name:<12} {f(s.signal_dbm)} {f(s.ase_dbm)} {f(s.total_dbm)}" for s in self.stages]
        tag = " (marginal)" if self.marginal else ""
        lines.append(f"margin {self.margin_db:+.2f} dB vs sensitivity {self.sensitivity_dbm:.2f} dBm, "
                     f"OSNR {self.osnr_db:.1f} dB (threshold {self.osnr_threshold_db:.1f}): "
                     f"{self.verdict}{tag}")
        return "\n".join(lines)


_RANK_TX, _RANK_BOOST, _RANK_FIBRE, _RANK_PRE, _RANK_FILTER, _RANK_RX = range(6)


def _rank_chain(chain):
    if not chain or not isinstance(chain[0], SfpModel):
        raise InvalidChain("chain must start with the transmitting SfpModel")
    ranks = [_RANK_TX]
    seen_fibre = False
    for comp in chain[1:]:
        if isinstance(comp, SfpModel):
            r = _RANK_RX
        elif isinstance(comp, EdfaModel):
            r = _RANK_PRE if seen_fibre else _RANK_BOOST
        elif isinstance(comp, ChannelProfile):
            r = _RANK_FIBRE
            seen_fibre = True
        elif isinstance(comp, BandpassFilter):
            r = _RANK_FILTER
        else:
            raise InvalidChain(f"unknown chain component {comp!r}")
        if r <= ranks[-1]:
            raise InvalidChain(f"{type(comp).__name__} is out of order "
                               "(expected tx, booster, fibre, preamp, filter, rx)")
        ranks.append(r)
    return ranks


def _stage(name, light):
    return Stage(name, _w_to_dbm(light.signal), _w_to_dbm(light.ase), _w_to_dbm(light.signal + light.ase))


def link_budget(chain: Sequence, direction: str = "forward", osnr_threshold_db: float = 10.0,
                marginal_window_db: float = 1.0) -> LinkBudgetReport:
    """Propagate launch power through ``chain`` and decide whether the link closes.

    ``chain`` is ordered transmitter, optional booster EDFA, optional
    ChannelProfile, optional pre-amplifier EDFA, optional BandpassFilter and
    an optional receiving SfpModel (defaults to the transmitter's model).
    A missing fibre stage means a back-to-back connection. The link closes
    when the received signal meets the receiver sensitivity and the OSNR in
    a 0.1 nm reference bandwidth meets ``osnr_threshold_db``.

    Raises:
        InvalidChain: components out of order.
    """
    _check_direction(direction)
    chain = list(chain)
    ranks = _rank_chain(chain)
    tx = chain[0]
    rx = chain[-1] if ranks[-1] == _RANK_RX else tx
    wl = tx.wavelength(direction)
    light = _Light(_dbm_to_w(tx.launch_power_dbm), 0.0, 0.0, 0.0)
    stages = [_stage("sfp_tx", light)]
    span = coeff = 0.0
    for comp, rank in zip(chain[1:], ranks[1:]):
        if rank in (_RANK_BOOST, _RANK_PRE):
            light, *_ = _amplify(comp, light, wl)
            stages.append(_stage(comp.label or ("booster" if rank == _RANK_BOOST else "preamp"), light))
        elif rank == _RANK_FIBRE:
            coeff = channel_loss(comp, direction).total_db
            span = coeff + comp.connector_loss_db
            t = db_to_linear(-span)
            light = _Light(light.signal * t, light.ase * t, light.density * t, light.noise_bw)
            stages.append(_stage("fibre_out", light))
        elif rank == _RANK_FILTER:
            t = db_to_linear(-comp.insertion_loss_db)
            in_band = min(light.ase, light.density * comp.bandwidth_hz)
            light = _Light(light.signal * t, in_band * t, light.density * t, comp.bandwidth_hz)
            stages.append(_stage(comp.label or "filter", light))
    stages.append(_stage("receiver", light))
    if light.ase > 0:
        noise_ref = light.ase / light.noise_bw * OSNR_REFERENCE_HZ
        osnr = linear_to_db(light.signal / noise_ref)
    else:
        osnr = math.inf
    return LinkBudgetReport(direction, tuple(stages), _w_to_dbm(light.signal), rx.sensitivity_dbm,
                            osnr, osnr_threshold_db, tx.loss_budget_db, span, coeff,
                            marginal_window_db)

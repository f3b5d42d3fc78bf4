"""Built-in link configurations: the long asymmetric duplex span and its shorter companions."""

from __future__ import annotations

from .asymmetry import AsymmetryConfig
from .noise import NoiseComponent, NoiseSpec
from .optical import (BandpassFilter, ChannelProfile, EdfaModel, FibreSegment, SfpModel,
                      group_delay_us_per_km)
from .sim import DropoutProcess, SimScenario

# measured launch and quoted EDFA output levels of the 300 km chain, dBm
SFP_LAUNCH_DBM = 2.07
BOOSTER_OUTPUT_DBM = 22.31
PREAMP_OUTPUT_DBM = 17.73
# extra loss (patch panels, mid-span connections) that reconciles the
# 0.17 dB/km coefficient with the quoted -37.12 dBm at the far end
CONNECTOR_LOSS_DB = 8.43

FLICKER_PLATEAU = 4e-12
DROPOUTS_PER_HOUR = 0.3
RECOVERY_MAX_S = 18.0
TWENTY_HOURS = 72000.0


def _spools(total_km, loss, n, prefix="spool"):
    return tuple(FibreSegment(total_km / n, loss, f"{prefix} {i + 1}") for i in range(n))


def amplified_300km_chain(with_edfas: bool = True, with_filter: bool = True) -> list:
    """SFP, booster, 300 km forward / 100 km return duplex fibre, preamp, filter."""
    profile = ChannelProfile(_spools(300, 0.17, 6), _spools(100, 0.17, 2, "return spool"),
                             connector_loss_db=CONNECTOR_LOSS_DB)
    chain = [SfpModel(SFP_LAUNCH_DBM, max_launch_dbm=5.0, sensitivity_dbm=-23.0, label="WR-LEN SFP")]
    if with_edfas:
        chain.append(EdfaModel(small_signal_gain_db=30.0, max_output_power_dbm=23.0,
                               output_setpoint_dbm=BOOSTER_OUTPUT_DBM, label="booster"))
    chain.append(profile)
    if with_edfas:
        chain.append(EdfaModel(small_signal_gain_db=30.0, max_output_power_dbm=20.0,
                               output_setpoint_dbm=PREAMP_OUTPUT_DBM, label="preamp"))
    if with_filter:
        chain.append(BandpassFilter(100e9))
    return chain


def _bidi_profile(km, loss, fwd_nm, ret_nm, n=1):
    return ChannelProfile(_spools(km, loss, n), None,
                          group_delay_us_per_km=group_delay_us_per_km(fwd_nm),
                          return_group_delay_us_per_km=group_delay_us_per_km(ret_nm))


def asymmetric_300km(seed: int = 0) -> SimScenario:
    sfp, booster, profile, preamp, bandpass = amplified_300km_chain()
    return SimScenario(
        name="300km_asymmetric_duplex",
        description="300 km forward, 100 km return; alpha cannot be encoded so 0 is applied",
        profile=profile, sfp=sfp, booster=booster, preamp=preamp, bandpass=bandpass,
        applied_alpha=0.0,
        link_noise=NoiseSpec((NoiseComponent("flicker_pm", FLICKER_PLATEAU),)),
        follower_noise=NoiseSpec((NoiseComponent("white_fm", 2e-12),)),
        tdc_jitter_rms=3e-12,
        duration=TWENTY_HOURS,
        dropout=DropoutProcess(DROPOUTS_PER_HOUR, RECOVERY_MAX_S),
        seed=seed,
    )


def symmetric_150km(seed: int = 150) -> SimScenario:
    # 0.165 dB/km keeps 150 km unamplified just inside the 28 dB budget
    profile = ChannelProfile(_spools(150, 0.165, 3), _spools(150, 0.165, 3, "return spool"))
    return SimScenario(
        name="150km_symmetric_duplex",
        description="150 km duplex pair, equal lengths, no amplification",
        profile=profile, sfp=SfpModel(SFP_LAUNCH_DBM, max_launch_dbm=5.0, sensitivity_dbm=-23.0),
        applied_alpha=0.0,
        link_noise=NoiseSpec((NoiseComponent("white_pm", 15e-12), NoiseComponent("white_fm", 0.08e-12))),
        duration=36000.0,
        seed=seed,
    )


def _calibrated(profile):
    return AsymmetryConfig.from_profile(profile).alpha


def simplex_150km(seed: int = 1490) -> SimScenario:
    profile = _bidi_profile(150, 0.2, 1490.0, 1550.0, n=3)
    sfp = SfpModel(4.0, max_launch_dbm=8.0, sensitivity_dbm=-33.0, wavelength_nm=1490.0,
                   mode="bidi_two_wavelength", return_wavelength_nm=1550.0, label="BiDi 160 km")
    return SimScenario(
        name="150km_simplex_bidi",
        description="single 150 km fibre, counter-propagating 1490/1550 nm",
        profile=profile, sfp=sfp,
        applied_alpha=_calibrated(profile), quantize_alpha=True,
        link_noise=NoiseSpec((NoiseComponent("white_pm", 20e-12), NoiseComponent("white_fm", 0.15e-12))),
        duration=36000.0,
        seed=seed,
    )


def simplex_7km(seed: int = 1310) -> SimScenario:
    profile = _bidi_profile(7, 0.35, 1310.0, 1490.0)
    sfp = SfpModel(-3.0, max_launch_dbm=-3.0, sensitivity_dbm=-19.0, wavelength_nm=1310.0,
                   mode="bidi_two_wavelength", return_wavelength_nm=1490.0, label="BiDi 10 km")
    return SimScenario(
        name="7km_simplex_bidi",
        description="single 7 km fibre, counter-propagating 1310/1490 nm",
        profile=profile, sfp=sfp,
        applied_alpha=_calibrated(profile), quantize_alpha=True,
        link_noise=NoiseSpec((NoiseComponent("white_pm", 20e-12),)),
        duration=20000.0,
        seed=seed,
    )


def replay_configurations() -> dict[str, SimScenario]:
    """The four built-in scenarios keyed by name."""
    scenarios = (asymmetric_300km(), symmetric_150km(), simplex_150km(), simplex_7km())
    return {s.name: s for s in scenarios}


BUILTIN_ALIASES = {
    "300km": "300km_asymmetric_duplex",
    "150km": "150km_symmetric_duplex",
    "150km_bidi": "150km_simplex_bidi",
    "7km": "7km_simplex_bidi",
}


def builtin(name: str) -> SimScenario:
    configs = replay_configurations()
    key = BUILTIN_ALIASES.get(name, name)
    if key not in configs:
        raise KeyError(f"unknown built-in scenario {name!r}; choose from {sorted(configs)}")
    return configs[key]

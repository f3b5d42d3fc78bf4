import dataclasses

import numpy as np
import pytest

from wrsim.asymmetry import AsymmetryConfig, predicted_skew, quantization_step
from wrsim.errors import InvalidScenario, LinkFails
from wrsim.noise import NoiseComponent, NoiseSpec
from wrsim.optical import ChannelProfile, SfpModel
from wrsim.pps import detect_dropouts, pair_pps
from wrsim.scenarios import amplified_300km_chain, asymmetric_300km, replay_configurations
from wrsim.sim import DropoutProcess, EventQueue, SimScenario, run
from wrsim.stability import tdev

SFP = SfpModel(2.07, 5.0, -23.0)
SHORT = ChannelProfile.uniform(10, 0.2)


def quiet(profile=SHORT, **kw):
    kw.setdefault("timestamp_jitter_rms", 0.0)
    kw.setdefault("duration", 300.0)
    return SimScenario("quiet", profile, SFP, **kw)


def asym_profile():
    return amplified_300km_chain()[2]


def test_event_queue_breaks_ties_by_push_order():
    q = EventQueue()
    q.push(5, "b")
    q.push(1, "a")
    q.push(5, "c")
    assert [q.pop()[1] for _ in range(3)] == ["a", "b", "c"]
    assert not q


def test_symmetric_servo_settles_below_1fs():
    out = run(quiet(initial_offset=2e-9, step_on_lock=False), check_budget=False)
    assert abs(out.follower_offset[0]) > 1e-9
    assert np.all(np.abs(out.follower_offset[100:]) < 1e-15)


def test_true_alpha_removes_any_asymmetry():
    profile = asym_profile()
    alpha = AsymmetryConfig.from_profile(profile).alpha
    out = run(quiet(profile, applied_alpha=alpha, step_on_lock=False), check_budget=False)
    assert np.all(np.abs(out.follower_offset[100:]) < 1e-15)


def test_zero_alpha_leaves_half_latency_difference():
    profile = asym_profile()
    cfg = AsymmetryConfig.from_profile(profile)
    out = run(quiet(profile, applied_alpha=0.0), check_budget=False)
    lag = out.follower_lag[100:]
    assert lag == pytest.approx((cfg.delta_ms - cfg.delta_sm) / 2, rel=1e-9)
    assert lag == pytest.approx(predicted_skew(cfg, 0.0), rel=1e-9)


def test_quantized_alpha_close_to_requested():
    s = quiet(applied_alpha=3e-4, quantize_alpha=True)
    assert abs(s.effective_alpha() - 3e-4) <= quantization_step(3e-4)
    with pytest.raises(InvalidScenario):
        quiet(applied_alpha=2.0, quantize_alpha=True).effective_alpha()


def test_ground_truth_matches_pairing_exactly():
    s = quiet(asym_profile(), link_noise=NoiseSpec((NoiseComponent("flicker_pm", 4e-12),)),
              timestamp_jitter_rms=3e-12, dropout=DropoutProcess(20.0, 18.0), duration=3600.0, seed=4)
    out = run(s, check_budget=False)
    paired = pair_pps(out.log)
    assert paired.gaps
    assert np.array_equal(paired.samples_ps, out.true_offset_series.samples_ps[paired.epochs])


def test_gap_free_tdev_equals_truth_tdev():
    s = quiet(link_noise=NoiseSpec((NoiseComponent("white_pm", 10e-12),)), duration=2000.0, seed=8)
    out = run(s)
    series = pair_pps(out.log).series
    for m in (1, 10, 100):
        assert tdev(series, m) == tdev(out.true_offset_series, m)


def test_no_follower_pps_inside_dropouts():
    s = quiet(dropout=DropoutProcess(30.0, 18.0), duration=7200.0, seed=2)
    out = run(s)
    assert out.dropout_windows
    b = out.log.channel_b
    a = out.log.channel_a
    for lost, relock in out.dropout_windows:
        # follower pulses lag leader pulses by at most the (tiny) offset here
        inside = (b > lost) & (b < relock)
        assert not inside.any()
        assert 0 < relock - lost <= 18 * 10**12
    assert set(b.tolist()) <= set(a.tolist())


def test_deterministic():
    s = quiet(link_noise=NoiseSpec((NoiseComponent("flicker_pm", 4e-12),)), follower_noise=NoiseSpec(
        (NoiseComponent("white_fm", 1e-12),)), timestamp_jitter_rms=3e-12, dropout=DropoutProcess(5.0, 18.0),
        duration=3600.0, seed=99)
    a, b = run(s), run(s)
    assert a.log == b.log
    assert a.true_offset_series == b.true_offset_series
    assert a.events == b.events
    assert np.array_equal(a.follower_offset, b.follower_offset)
    c = run(s.with_seed(100))
    assert not c.log == a.log


def test_noise_passes_through_without_servo():
    amp = 50e-12
    s = quiet(follower_noise=NoiseSpec((NoiseComponent("white_fm", amp),)), servo_bandwidth=0.0,
              step_on_lock=False, duration=50_000.0, seed=12)
    out = run(s)
    for m in (1, 10, 100):
        assert tdev(out.true_offset_series, m) == pytest.approx(amp * m**0.5, rel=0.2)


def test_servo_suppresses_short_term_white_fm():
    amp = 50e-12
    base = dict(follower_noise=NoiseSpec((NoiseComponent("white_fm", amp),)), duration=20_000.0, seed=12)
    free = run(quiet(servo_bandwidth=0.0, step_on_lock=False, **base))
    locked = run(quiet(**base))
    assert tdev(locked.true_offset_series, 100) < 0.2 * tdev(free.true_offset_series, 100)


def test_tdc_jitter_only_touches_timestamps():
    s = quiet(tdc_jitter_rms=3e-12, duration=1000.0, seed=1)
    out = run(s)
    x = pair_pps(out.log).samples_ps
    assert not np.array_equal(x, out.true_offset_series.samples_ps)
    assert np.std(x - out.true_offset_series.samples_ps) == pytest.approx(3 * 2**0.5, rel=0.2)


def test_budget_failure_refuses_to_lock():
    sfp, _, profile, _, _ = amplified_300km_chain()
    s = SimScenario("bare", profile, sfp, duration=10.0)
    with pytest.raises(LinkFails) as info:
        run(s)
    assert info.value.report.verdict == "FAILS"


@pytest.mark.parametrize("change", [
    {"duration": 0.0}, {"exchange_interval": 0.0}, {"pps_interval": -1.0},
    {"dropout": DropoutProcess(1.0, -1.0)}, {"servo_bandwidth": -0.1}, {"applied_alpha": -1.5},
])
def test_invalid_scenarios(change):
    with pytest.raises(InvalidScenario):
        run(dataclasses.replace(quiet(), **change))


def test_replay_configurations():
    configs = replay_configurations()
    assert len(configs) == 4
    seven = configs["7km_simplex_bidi"].sfp
    assert (seven.wavelength("forward"), seven.wavelength("return")) == (1310.0, 1490.0)
    bidi = configs["150km_simplex_bidi"].sfp
    assert (bidi.wavelength("forward"), bidi.wavelength("return")) == (1490.0, 1550.0)
    long = configs["300km_asymmetric_duplex"]
    assert long.profile.length_km("forward") == 300 and long.profile.length_km("return") == 100
    for s in configs.values():
        assert all(r.closes for r in s.budgets().values()), s.name


def test_builtin_dropout_statistics():
    out = run(asymmetric_300km())
    report = detect_dropouts(out.log)
    # 0.3 per hour over 20 h: about six events; recovery U(0, 18] s
    assert 3 <= report.count <= 10
    assert 0.998 < report.uptime_fraction < 1.0
    assert report.count == len(out.dropout_windows)

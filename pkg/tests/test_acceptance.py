"""Acceptance criteria, one test each, every one printing a PASS/FAIL line.

The lines are also gathered into an "acceptance criteria" section at the end
of the pytest terminal report.
"""

import dataclasses
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import mtie_all_literal, tdev_literal

from wrsim.analysis import analyze_log
from wrsim.asymmetry import (AsymmetryConfig, alpha_n_to_alpha, alpha_range, alpha_to_alpha_n,
                             quantization_step)
from wrsim.cli import main
from wrsim.errors import OutOfRange
from wrsim.noise import TDEV_SLOPE, NoiseComponent, NoiseSpec, synthesize
from wrsim.optical import DEFAULT_GROUP_DELAY_US_PER_KM, link_budget
from wrsim.pps import TimestampLog
from wrsim.scenarios import FLICKER_PLATEAU, amplified_300km_chain, asymmetric_300km
from wrsim.sim import DropoutProcess, run
from wrsim.stability import Statistic, TimeErrorSeries, loglog_slope, mtie, stability_curve, tdev

T = 10**12


@pytest.fixture(scope="module")
def calibrated_300km():
    out = run(asymmetric_300km())
    return out, analyze_log(out.log, (Statistic.TDEV, Statistic.MTIE), dense=True)


def test_criterion_01_oracle_equivalence(criterion):
    with criterion(1, "TDEV/MTIE match literal transcriptions to 1e-12 on 200 series in < 60 s"):
        rng = np.random.default_rng(1)
        start = time.perf_counter()
        checked = 0
        for _ in range(200):
            n = int(rng.integers(10, 2001))
            scale = 10 ** rng.uniform(0, 6)
            x = (np.cumsum(rng.standard_normal(n)) * scale + rng.standard_normal(n) * scale).astype(np.int64)
            series = TimeErrorSeries(x)
            for m in range(1, n // 3 + 1):
                ref = tdev_literal(x, m)
                assert tdev(series, m) == pytest.approx(ref, rel=1e-12, abs=0.0)
            ref_mtie = mtie_all_literal(x)
            for k in range(1, n):
                assert mtie(series, k) == pytest.approx(ref_mtie[k], rel=1e-12, abs=0.0)
            checked += 1
        elapsed = time.perf_counter() - start
        print(f"  {checked} series checked in {elapsed:.1f} s")
        assert checked == 200
        assert elapsed < 60.0


series_values = st.lists(st.integers(-10**9, 10**9), min_size=3, max_size=300)


def test_criterion_02_property_suites(criterion):
    with criterion(2, "TDEV ramp/offset immunity and MTIE monotonicity/scale suites, 1000 cases each"):
        @settings(max_examples=1000, deadline=None, database=None)
        @given(series_values, st.integers(-10**12, 10**12), st.integers(-10**6, 10**6))
        def tdev_immunity(values, offset, slope):
            x = np.array(values, dtype=np.int64)
            shifted = x + offset + slope * np.arange(x.size, dtype=np.int64)
            for m in range(1, x.size // 3 + 1):
                assert tdev(TimeErrorSeries(shifted), m) == pytest.approx(tdev(TimeErrorSeries(x), m),
                                                                        rel=1e-12, abs=1e-24)

        @settings(max_examples=1000, deadline=None, database=None)
        @given(series_values, st.integers(-1000, 1000), st.integers(-10**9, 10**9))
        def mtie_monotone_and_scale(values, scale, offset):
            x = np.array(values, dtype=np.int64)
            base = [mtie(TimeErrorSeries(x), n) for n in range(1, x.size)]
            assert all(a <= b for a, b in zip(base, base[1:]))
            scaled = TimeErrorSeries(x * scale + offset)
            for n, ref in enumerate(base, start=1):
                assert mtie(scaled, n) == pytest.approx(abs(scale) * ref, rel=1e-12, abs=1e-24)

        tdev_immunity()
        mtie_monotone_and_scale()


def test_criterion_03_noise_slopes(criterion):
    with criterion(3, "white PM / flicker PM / white FM slopes -0.5 / 0 / +0.5 within 0.15, 10 seeds, < 2 min"):
        start = time.perf_counter()
        for kind in ("white_pm", "flicker_pm", "white_fm"):
            slopes = []
            for seed in range(10):
                s = synthesize(NoiseSpec((NoiseComponent(kind, 1e-9),), seed, 100_000))
                slopes.append(loglog_slope(stability_curve(s, Statistic.TDEV), 10, 1000))
            print(f"  {kind:10s} slopes {min(slopes):+.3f} .. {max(slopes):+.3f}")
            assert all(abs(v - TDEV_SLOPE[kind]) <= 0.15 for v in slopes)
        assert time.perf_counter() - start < 120.0


def test_criterion_04_flicker_plateau(criterion, calibrated_300km):
    with criterion(4, "300 km simulate/analyze TDEV within a factor 2 of 4 ps for 20 s <= tau <= 1000 s"):
        _, result = calibrated_300km
        curve = next(c for c in result.curves if c.statistic is Statistic.TDEV)
        plateau = [p for p in curve.points if 20 <= p.tau <= 1000]
        assert len(plateau) >= 10
        values = [p.value for p in plateau]
        print(f"  TDEV {min(values) * 1e12:.2f} .. {max(values) * 1e12:.2f} ps over {len(plateau)} taus")
        assert all(FLICKER_PLATEAU / 2 <= v <= FLICKER_PLATEAU * 2 for v in values)


def test_criterion_05_uptime(criterion):
    with criterion(5, "20 h log with six 18 s gaps gives 99.85-99.87 % uptime and six dropouts"):
        a = np.arange(20 * 3600, dtype=np.int64) * T
        keep = np.ones(a.size, bool)
        for start in (4000, 16000, 29000, 41000, 55000, 66000):
            keep[start:start + 17] = False
        summary = analyze_log(TimestampLog(a, a[keep] + 25)).summary
        print(f"  uptime {summary['uptime_fraction'] * 100:.4f} %, {summary['dropout_count']} dropouts")
        assert 99.85 <= summary["uptime_fraction"] * 100 <= 99.87
        assert summary["dropout_count"] == 6


def test_criterion_06_asymmetry(criterion):
    with criterion(6, "alpha = 2 flagged, range near +/-7.8e-3, round trip within 10 steps on 1000 values"):
        us = DEFAULT_GROUP_DELAY_US_PER_KM * 1e-6
        long = AsymmetryConfig(300 * us, 100 * us)
        assert long.alpha == pytest.approx(2.0)
        for mode in ("paper", "conventional"):
            with pytest.raises(OutOfRange):
                long.alpha_n(mode)
            lo, hi = alpha_range(mode)
            print(f"  {mode:12s} range [{lo:.4e}, {hi:.4e}]")
            assert lo == pytest.approx(-7.8e-3, rel=0.05)
            assert hi == pytest.approx(7.8e-3, rel=0.05)
        rng = np.random.default_rng(6)
        for mode in ("paper", "conventional"):
            lo, hi = alpha_range(mode)
            for alpha in rng.uniform(lo * 0.999, hi * 0.999, 1000):
                back = alpha_n_to_alpha(alpha_to_alpha_n(alpha, mode), mode)
                assert abs(back - alpha) <= 10 * quantization_step(alpha, mode)


def test_criterion_07_servo(criterion):
    with criterion(7, "true alpha settles below 1 fs; zero alpha leaves (dMS - dSM)/2 to 1e-9"):
        base = dataclasses.replace(asymmetric_300km(), leader_noise=NoiseSpec(), follower_noise=NoiseSpec(),
                                   link_noise=NoiseSpec(), timestamp_jitter_rms=0.0, tdc_jitter_rms=0.0,
                                   dropout=DropoutProcess(), duration=600.0)
        config = AsymmetryConfig.from_profile(base.profile)
        true = run(dataclasses.replace(base, applied_alpha=config.alpha, step_on_lock=False,
                                       initial_offset=1e-6))
        assert abs(true.follower_offset[0]) > 1e-7
        assert np.all(np.abs(true.follower_offset[200:]) < 1e-15)
        zero = run(dataclasses.replace(base, applied_alpha=0.0))
        expected = (config.delta_ms - config.delta_sm) / 2
        lag = zero.follower_lag[200:]
        print(f"  steady lag {lag[-1] * 1e6:.4f} us, expected {expected * 1e6:.4f} us")
        assert lag == pytest.approx(expected, rel=1e-9)


def test_criterion_08_link_budget(criterion):
    with criterion(8, "300 km chain closes with stages 2.07/22.31/-37.12/17.73 dBm; no EDFAs fails"):
        rep = link_budget(amplified_300km_chain(), "forward")
        stages = {name: rep.stage(name).total_dbm for name in ("sfp_tx", "booster", "fibre_out", "preamp")}
        print("  " + ", ".join(f"{k} {v:.2f}" for k, v in stages.items()))
        assert rep.verdict == "CLOSES"
        assert stages["sfp_tx"] == pytest.approx(2.07, abs=0.01)
        assert stages["booster"] == pytest.approx(22.31, abs=0.01)
        assert stages["fibre_out"] == pytest.approx(-37.12, abs=0.01)
        assert stages["preamp"] == pytest.approx(17.73, abs=0.01)
        bare = link_budget(amplified_300km_chain(with_edfas=False), "forward")
        assert bare.loss_budget_db == 28.0
        assert bare.verdict == "FAILS"


def test_criterion_09_mtie_ceiling(criterion, calibrated_300km):
    with criterion(9, "MTIE at 100 s on the longest clean 300 km segment below 100 ps"):
        _, result = calibrated_300km
        value = mtie(result.segment, 100)
        print(f"  MTIE(100 s) = {value * 1e12:.1f} ps on {len(result.segment)} samples")
        assert result.summary["mtie_100s_s"] == value
        assert value < 100e-12


def test_criterion_10_determinism(criterion, tmp_path, monkeypatch):
    with criterion(10, "repeated simulate + analyze with a fixed seed gives byte-identical CSVs"):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1760400000")
        for d in ("first", "second"):
            args = ["simulate", "--builtin", "300km", "--seed", "11", "--analyze", "--out", str(tmp_path / d)]
            assert main(args) == 0
        names = sorted(p.name for p in (tmp_path / "first").glob("*.csv"))
        assert names == ["curves.csv", "log.csv", "truth.csv"]
        for name in names:
            assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()
        for d in ("first", "second"):
            assert main(["analyze", str(tmp_path / "first" / "log.csv"), "--out", str(tmp_path / f"re_{d}")]) == 0
        assert (tmp_path / "re_first" / "curves.csv").read_bytes() == \
            (tmp_path / "re_second" / "curves.csv").read_bytes()

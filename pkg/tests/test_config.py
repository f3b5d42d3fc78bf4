import json

import pytest

from wrsim.asymmetry import alpha_to_alpha_n
from wrsim.config import (load_scenario, profile_from_dict, profile_to_dict, save_scenario, scenario_from_dict,
                          scenario_to_dict)
from wrsim.errors import ConfigError
from wrsim.scenarios import replay_configurations
from wrsim.sim import run


def minimal():
    return {
        "name": "lab",
        "profile": {"forward": [{"length_km": 10, "loss_db_per_km": 0.2}]},
        "sfp": {"launch_power_dbm": 0.0},
        "duration": 60,
    }


def test_minimal_scenario_defaults():
    s = scenario_from_dict(minimal())
    assert s.name == "lab" and s.duration == 60.0
    assert s.booster is None and s.bandpass is None
    assert s.profile.return_path is None
    assert s.timestamp_jitter_rms == 3e-12


@pytest.mark.parametrize("name", sorted(replay_configurations()))
def test_builtins_round_trip(name, tmp_path):
    s = replay_configurations()[name]
    path = tmp_path / "s.json"
    save_scenario(s, path)
    back = load_scenario(path)
    assert back == s


def test_applied_alpha_n_is_decoded():
    raw = minimal()
    raw["asymmetry"] = {"applied_alpha_n": alpha_to_alpha_n(1e-4), "mode": "paper"}
    s = scenario_from_dict(raw)
    assert s.applied_alpha == pytest.approx(1e-4, rel=1e-6)
    assert s.quantize_alpha


def test_noise_components_parse():
    raw = minimal()
    raw["noise"] = {"link": {"components": [{"type": "flicker_pm", "amplitude": 4e-12}]}}
    s = scenario_from_dict(raw)
    assert s.link_noise.components[0].kind == "flicker_pm"
    assert run(s).log.channel_b.size == 60


@pytest.mark.parametrize("mutate", [
    lambda r: r.pop("profile"),
    lambda r: r.update(profile={"forward": []}),
    lambda r: r["profile"]["forward"][0].update(length_km=-1),
    lambda r: r["profile"]["forward"][0].update(length_km="ten"),
    lambda r: r["sfp"].update(colour="red"),
    lambda r: r["sfp"].update(launch_power_dbm=9.0),
    lambda r: r.update(duration=0),
    lambda r: r.update(seed="abc"),
    lambda r: r.update(noise={"link": {"components": [{"type": "pink", "amplitude": 1.0}]}}),
    lambda r: r.update(asymmetry={"mode": "other"}),
    lambda r: r.update(edfas={"middle": {}}),
    lambda r: r.update(dropout_process=[1, 2]),
])
def test_malformed_scenarios(mutate):
    raw = minimal()
    mutate(raw)
    with pytest.raises(ConfigError):
        scenario_from_dict(raw)


def test_profile_round_trip():
    raw = {"forward": [{"length_km": 50, "loss_db_per_km": 0.17, "label": "spool 1"}],
           "return": [{"length_km": 20, "loss_db_per_km": 0.2, "label": ""}], "connector_loss_db": 1.5}
    p = profile_from_dict(raw)
    assert p.connector_loss_db == 1.5
    assert profile_from_dict(json.loads(json.dumps(profile_to_dict(p)))) == p


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        load_scenario(tmp_path / "none.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_scenario(bad)


def test_to_dict_is_json_clean():
    for s in replay_configurations().values():
        json.dumps(scenario_to_dict(s), allow_nan=False)

"""JSON (de)serialisation of profiles, optical models, noise specs and scenarios.

Every malformed input surfaces as :class:`ConfigError` so the CLI can map it
to a single exit code.
"""

from __future__ import annotations

import json
import math
from dataclasses import fields
from pathlib import Path

from .asymmetry import MODES, alpha_n_to_alpha
from .errors import ConfigError, WrsimError
from .noise import NoiseComponent, NoiseSpec
from .optical import BandpassFilter, ChannelProfile, EdfaModel, FibreSegment, SfpModel
from .sim import DropoutProcess, SimScenario

# scenario keys copied straight onto SimScenario
_SCALARS = ("timestamp_jitter_rms", "tdc_jitter_rms", "exchange_interval", "pps_interval",
            "duration", "servo_bandwidth", "step_on_lock", "initial_offset", "osnr_threshold_db",
            "seed", "description")


def _require(obj, key, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    if key not in obj:
        raise ConfigError(f"{where} is missing {key!r}")
    return obj[key]


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where} must be a finite number, got {value!r}")
    return float(value)


def _object(raw, where):
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{where} must be a JSON object")
    return raw


def _known(cls, raw, where):
    if not isinstance(raw, dict):
        raise ConfigError(f"{where} must be a JSON object")
    names = {f.name for f in fields(cls)}
    extra = set(raw) - names
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")
    try:
        return cls(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


# -- profiles --------------------------------------------------------------

def _segments(raw, where):
    if not isinstance(raw, list):
        raise ConfigError(f"{where} must be a list of segments")
    out = []
    for i, seg in enumerate(raw):
        w = f"{where}[{i}]"
        try:
            out.append(FibreSegment(_number(_require(seg, "length_km", w), w + ".length_km"),
                                    _number(_require(seg, "loss_db_per_km", w), w + ".loss_db_per_km"),
                                    str(seg.get("label", ""))))
        except ValueError as exc:
            raise ConfigError(f"{w}: {exc}") from None
    return tuple(out)


def profile_from_dict(raw: dict) -> ChannelProfile:
    forward = _segments(_require(raw, "forward", "profile"), "profile.forward")
    if not forward:
        raise ConfigError("profile has no fibre segments")
    back = raw.get("return")
    kwargs = {}
    for key in ("group_delay_us_per_km", "return_group_delay_us_per_km", "connector_loss_db"):
        if raw.get(key) is not None:
            kwargs[key] = _number(raw[key], f"profile.{key}")
    try:
        return ChannelProfile(forward, None if back is None else _segments(back, "profile.return"), **kwargs)
    except ValueError as exc:
        raise ConfigError(f"profile: {exc}") from None


def profile_to_dict(profile: ChannelProfile) -> dict:
    def segs(ss):
        return [{"length_km": s.length_km, "loss_db_per_km": s.loss_db_per_km, "label": s.label} for s in ss]
    return {
        "forward": segs(profile.forward),
        "return": None if profile.return_path is None else segs(profile.return_path),
        "group_delay_us_per_km": profile.group_delay_us_per_km,
        "return_group_delay_us_per_km": profile.return_group_delay_us_per_km,
        "connector_loss_db": profile.connector_loss_db,
    }


# -- optical models ---------------------------------------------------------

def _plain(obj) -> dict:
    return {f.name: getattr(obj, f.name) for f in fields(obj)}


def _optional(cls, raw, where):
    return None if raw is None else _known(cls, raw, where)


# -- noise ------------------------------------------------------------------

def noise_from_dict(raw) -> NoiseSpec:
    if raw is None:
        return NoiseSpec()
    comps = raw.get("components", []) if isinstance(raw, dict) else raw
    if not isinstance(comps, list):
        raise ConfigError("noise components must be a list")
    parsed = []
    for i, c in enumerate(comps):
        w = f"noise component {i}"
        parsed.append(NoiseComponent(str(_require(c, "type", w)), _number(_require(c, "amplitude", w), w)))
    try:
        return NoiseSpec(tuple(parsed))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def noise_to_dict(spec: NoiseSpec) -> dict:
    return {"components": [{"type": c.kind, "amplitude": c.amplitude} for c in spec.components]}


# -- scenarios ----------------------------------------------------------------

def scenario_from_dict(raw: dict) -> SimScenario:
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a JSON object")
    kwargs = {
        "name": str(raw.get("name", "scenario")),
        "profile": profile_from_dict(_require(raw, "profile", "scenario")),
        "sfp": _known(SfpModel, _require(raw, "sfp", "scenario"), "sfp"),
    }
    edfas = raw.get("edfas") or {}
    if not isinstance(edfas, dict) or set(edfas) - {"booster", "preamp"}:
        raise ConfigError("edfas must be an object with optional 'booster' and 'preamp'")
    kwargs["booster"] = _optional(EdfaModel, edfas.get("booster"), "edfas.booster")
    kwargs["preamp"] = _optional(EdfaModel, edfas.get("preamp"), "edfas.preamp")
    kwargs["bandpass"] = _optional(BandpassFilter, raw.get("filter"), "filter")

    asym = _object(raw.get("asymmetry"), "asymmetry")
    mode = asym.get("mode", "paper")
    if mode not in MODES:
        raise ConfigError(f"asymmetry.mode must be one of {MODES}")
    kwargs["alpha_mode"] = mode
    if asym.get("applied_alpha_n") is not None:
        try:
            kwargs["applied_alpha"] = alpha_n_to_alpha(int(asym["applied_alpha_n"]), mode)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"asymmetry.applied_alpha_n: {exc}") from None
        kwargs["quantize_alpha"] = True
    else:
        kwargs["applied_alpha"] = _number(asym.get("applied_alpha", 0.0), "asymmetry.applied_alpha")
        kwargs["quantize_alpha"] = bool(asym.get("quantize", False))

    noise = _object(raw.get("noise"), "noise")
    for role in ("leader", "follower", "link"):
        kwargs[f"{role}_noise"] = noise_from_dict(noise.get(role))
    drop = raw.get("dropout_process")
    if drop is not None:
        drop = _object(drop, "dropout_process")
        kwargs["dropout"] = DropoutProcess(
            _number(drop.get("rate_per_hour", 0.0), "dropout_process.rate_per_hour"),
            _number(drop.get("recovery_max", 18.0), "dropout_process.recovery_max"))
    for key in _SCALARS:
        if key not in raw:
            continue
        if key == "seed":
            if isinstance(raw[key], bool) or not isinstance(raw[key], int):
                raise ConfigError("seed must be an integer")
            kwargs[key] = raw[key]
        elif key == "step_on_lock":
            kwargs[key] = bool(raw[key])
        elif key == "description":
            kwargs[key] = str(raw[key])
        else:
            kwargs[key] = _number(raw[key], key)
    scenario = SimScenario(**kwargs)
    try:
        scenario.validate()
    except WrsimError as exc:
        raise ConfigError(str(exc)) from None
    return scenario


def scenario_to_dict(s: SimScenario) -> dict:
    out = {
        "name": s.name,
        "description": s.description,
        "profile": profile_to_dict(s.profile),
        "sfp": _plain(s.sfp),
        "edfas": {"booster": None if s.booster is None else _plain(s.booster),
                  "preamp": None if s.preamp is None else _plain(s.preamp)},
        "filter": None if s.bandpass is None else _plain(s.bandpass),
        "asymmetry": {"applied_alpha": s.applied_alpha, "quantize": s.quantize_alpha, "mode": s.alpha_mode},
        "noise": {role: noise_to_dict(getattr(s, f"{role}_noise")) for role in ("leader", "follower", "link")},
        "dropout_process": {"rate_per_hour": s.dropout.rate_per_hour, "recovery_max": s.dropout.recovery_max},
    }
    for key in _SCALARS:
        out[key] = getattr(s, key)
    return out


# -- files ------------------------------------------------------------------

def load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise ConfigError(f"no such file: {path}") from None
    except (IsADirectoryError, PermissionError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON ({exc})") from None


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load_scenario(path) -> SimScenario:
    return scenario_from_dict(load_json(path))


def save_scenario(scenario: SimScenario, path) -> None:
    dump_json(scenario_to_dict(scenario), path)

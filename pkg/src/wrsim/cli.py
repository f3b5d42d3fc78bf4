"""``wrsim`` command line: simulate, analyze, budget, calibrate, demo.

Exit codes: 0 success, 2 configuration or usage error, 3 link budget
fails, 4 file I/O error, 5 log cannot be analysed (no overlap, ambiguous
pairing, too few samples).
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as _dt
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .analysis import analyze_log, parse_stats, parse_taus
from .asymmetry import MODES, AsymmetryConfig, alpha_range, alpha_to_alpha_n, calibration_report
from .config import dump_json, load_json, profile_from_dict, scenario_from_dict, scenario_to_dict
from .errors import (AmbiguousPairing, ConfigError, EmptyInput, InsufficientData, InvalidArgument,
                     InvalidScenario, LinkFails, NoOverlap, OutOfRange, WrsimError)
from .optical import DEFAULT_GROUP_DELAY_US_PER_KM, BandpassFilter, ChannelProfile, EdfaModel, SfpModel, link_budget
from .pps import read_log_csv, write_dropout_json, write_log_csv
from .scenarios import BUILTIN_ALIASES, amplified_300km_chain, builtin, replay_configurations
from .sim import run
from .stability import write_curves_csv, write_series_csv

EXIT_OK, EXIT_CONFIG, EXIT_LINK, EXIT_IO, EXIT_ANALYSIS = 0, 2, 3, 4, 5
DEFAULT_OUT = "wrsim_out"


class _IOFailure(Exception):
    pass


def _out_dir(arg) -> Path:
    path = Path(arg or os.environ.get("WRSIM_OUT_DIR") or DEFAULT_OUT)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _IOFailure(f"cannot create output directory {path}: {exc}") from None
    return path


def _write(path: Path, writer, *args):
    try:
        writer(*args, path)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc}") from None
    return path


def _timestamp() -> str:
    # SOURCE_DATE_EPOCH pins the manifest timestamp for fully reproducible trees
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
           else _dt.datetime.now(_dt.timezone.utc))
    return now.replace(microsecond=0).isoformat()


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _manifest(out: Path, files, **fields) -> Path:
    manifest = {
        "manifest_version": 1,
        "tool": "wrsim",
        "tool_version": __version__,
        "timestamp": _timestamp(),
        "output_dir": str(out),
        **fields,
        "files": {p.name: _sha256(p) for p in files},
    }
    return _write(out / "manifest.json", dump_json, manifest)


def _write_events(events, path):
    with open(path, "w") as fh:
        for ev in events:
            fh.write(json.dumps(ev, sort_keys=True) + "\n")


# -- analyze ------------------------------------------------------------------

def _analysis_files(log, out: Path, stats, taus_text, skew_offset=0.0):
    taus, dense = parse_taus(taus_text)
    result = analyze_log(log, stats, taus, dense, skew_offset)
    files = [
        _write(out / "curves.csv", write_curves_csv, list(result.curves)),
        _write(out / "dropouts.json", write_dropout_json, result.dropouts),
        _write(out / "summary.json", dump_json, result.summary),
    ]
    return result, files


def _print_summary(summary, stream=sys.stdout):
    def fmt(v, scale=1.0, unit=""):
        return "n/a" if v is None else f"{v * scale:.4g}{unit}"
    print(f"uptime         {summary['uptime_percent']:.2f} %  ({summary['dropout_count']} dropouts)", file=stream)
    print(f"min TDEV       {fmt(summary['min_tdev_s'], 1e12, ' ps')} at tau = "
          f"{fmt(summary['min_tdev_tau_s'], 1, ' s')}", file=stream)
    print(f"MTIE(100 s)    {fmt(summary['mtie_100s_s'], 1e12, ' ps')}", file=stream)
    print(f"clean segment  {summary['segment_samples']} of {summary['paired_samples']} paired samples",
          file=stream)


def cmd_analyze(args) -> int:
    stats = parse_stats(args.stats)
    parse_taus(args.taus)
    try:
        log = read_log_csv(Path(args.log), args.interval)
    except FileNotFoundError:
        raise _IOFailure(f"no such log file: {args.log}") from None
    except (IsADirectoryError, PermissionError) as exc:
        raise _IOFailure(f"cannot read {args.log}: {exc}") from None
    out = _out_dir(args.out)
    result, files = _analysis_files(log, out, stats, args.taus, args.skew_offset)
    _manifest(out, files, command="analyze", log_path=str(args.log), seed=None,
              statistics=[s.value for s in stats], tau_grid=args.taus or "octave")
    _print_summary(result.summary)
    return EXIT_OK


# -- simulate -------------------------------------------------------------------

def _load_scenario(args):
    """Scenario from --builtin, a scenario JSON, or a previous run's manifest."""
    if getattr(args, "builtin", None):
        try:
            return builtin(args.builtin), f"builtin:{args.builtin}", {}
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
    if not args.config:
        raise ConfigError("need --config FILE or --builtin NAME")
    raw = load_json(args.config)
    if isinstance(raw, dict) and "manifest_version" in raw:
        base = Path(args.config).parent
        scenario_file = base / "scenario.json"
        replay = {"stats": ",".join(raw.get("statistics") or []) or None,
                  "taus": raw.get("tau_grid"), "analyze": raw.get("analyzed", False)}
        return scenario_from_dict(load_json(scenario_file)), str(raw.get("scenario_path")), replay
    return scenario_from_dict(raw), str(args.config), {}


def simulate_to(scenario, out: Path, scenario_path: str, analyze: bool, stats, taus_text):
    output = run(scenario)
    files = [
        _write(out / "scenario.json", dump_json, scenario_to_dict(scenario)),
        _write(out / "log.csv", write_log_csv, output.log),
        _write(out / "truth.csv", write_series_csv, output.true_offset_series),
        _write(out / "events.jsonl", _write_events, output.events),
    ]
    summary = None
    if analyze:
        result, more = _analysis_files(output.log, out, stats, taus_text)
        files += more
        summary = result.summary
    _manifest(out, files, command="simulate", scenario_path=scenario_path, seed=scenario.seed,
              statistics=[s.value for s in stats], tau_grid=taus_text or "octave", analyzed=analyze)
    return summary


def cmd_simulate(args) -> int:
    scenario, source, replay = _load_scenario(args)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    if args.alpha_mode is not None:
        scenario = dataclasses.replace(scenario, alpha_mode=args.alpha_mode)
    stats_text = args.stats or replay.get("stats")
    taus_text = args.taus or replay.get("taus")
    if taus_text == "octave":
        taus_text = None
    stats = parse_stats(stats_text)
    parse_taus(taus_text)
    out = _out_dir(args.out)
    summary = simulate_to(scenario, out, source, args.analyze or replay.get("analyze", False),
                          stats, taus_text)
    print(f"{scenario.name}: wrote {out}")
    if summary is not None:
        _print_summary(summary)
    return EXIT_OK


# -- demo -----------------------------------------------------------------------

def _demo_one(name, out, seed, stats_text, taus_text):
    scenario = replay_configurations()[name]
    if seed is not None:
        scenario = scenario.with_seed(seed)
    target = Path(out) / name
    target.mkdir(parents=True, exist_ok=True)
    return name, simulate_to(scenario, target, f"builtin:{name}", True, parse_stats(stats_text), taus_text)


def cmd_demo(args) -> int:
    out = _out_dir(args.out)
    parse_stats(args.stats)
    parse_taus(args.taus)
    names = list(replay_configurations())
    jobs = max(1, args.jobs)
    call = [(n, str(out), args.seed, args.stats, args.taus) for n in names]
    if jobs == 1:
        results = [_demo_one(*c) for c in call]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_demo_one, *zip(*call)))
    for name, summary in results:
        print(f"== {name}")
        _print_summary(summary)
    return EXIT_OK


# -- budget -----------------------------------------------------------------------

def _budget_chain(args):
    if args.builtin:
        if args.builtin in ("chain300", "300km", "300km_asymmetric_duplex"):
            chain = amplified_300km_chain(with_edfas=not args.no_edfas, with_filter=not args.no_filter)
        else:
            try:
                chain = builtin(args.builtin).chain()
            except KeyError as exc:
                raise ConfigError(str(exc.args[0])) from None
    elif args.config:
        raw = load_json(args.config)
        if isinstance(raw, dict) and "profile" in raw:
            chain = scenario_from_dict(raw).chain()
        else:
            chain = [SfpModel(2.07, 5.0, -23.0), profile_from_dict(raw)]
    else:
        raise ConfigError("need --config FILE or --builtin NAME")

    parts = {type(p): p for p in chain if not isinstance(p, EdfaModel)}
    edfas = [p for p in chain if isinstance(p, EdfaModel)]
    profile = parts[ChannelProfile]
    sfp = parts[SfpModel]
    overrides = {k: v for k, v in (("launch_power_dbm", args.launch), ("max_launch_dbm", args.max_launch),
                                   ("sensitivity_dbm", args.sensitivity)) if v is not None}
    if overrides:
        try:
            sfp = dataclasses.replace(sfp, **overrides)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    booster = next((e for e in edfas if chain.index(e) < chain.index(profile)), None)
    preamp = next((e for e in edfas if chain.index(e) > chain.index(profile)), None)
    if args.booster is not None:
        booster = EdfaModel(max_output_power_dbm=max(23.0, args.booster), output_setpoint_dbm=args.booster,
                            label="booster")
    if args.preamp is not None:
        preamp = EdfaModel(max_output_power_dbm=max(20.0, args.preamp), output_setpoint_dbm=args.preamp,
                           label="preamp")
    if args.no_edfas:
        booster = preamp = None
    bandpass = parts.get(BandpassFilter)
    if args.filter_ghz is not None:
        bandpass = BandpassFilter(args.filter_ghz * 1e9)
    if args.no_filter:
        bandpass = None
    return [p for p in (sfp, booster, profile, preamp, bandpass) if p is not None]


def cmd_budget(args) -> int:
    chain = _budget_chain(args)
    directions = ("forward", "return") if args.direction == "both" else (args.direction,)
    reports = {d: link_budget(chain, d, args.osnr_threshold) for d in directions}
    for d, rep in reports.items():
        print(f"[{d}]")
        print(rep.table())
    if args.out or os.environ.get("WRSIM_OUT_DIR"):
        out = _out_dir(args.out)
        path = _write(out / "budget.json", dump_json, {d: r.to_dict() for d, r in reports.items()})
        print(f"wrote {path}")
    return EXIT_OK if all(r.closes for r in reports.values()) else EXIT_LINK


# -- calibrate ----------------------------------------------------------------

def cmd_calibrate(args) -> int:
    mode = args.alpha_mode
    if args.alpha is not None:
        report = {"alpha": args.alpha, "mode": mode, "alpha_range": list(alpha_range(mode))}
        try:
            report["alpha_n"], report["in_range"] = alpha_to_alpha_n(args.alpha, mode), True
        except OutOfRange as exc:
            report["alpha_n"], report["in_range"] = exc.value, False
    else:
        if args.delta_ms is not None or args.delta_sm is not None:
            if args.delta_ms is None or args.delta_sm is None:
                raise ConfigError("give both --delta-ms and --delta-sm")
            config = AsymmetryConfig(args.delta_ms, args.delta_sm)
        elif args.forward_km is not None:
            back = args.return_km if args.return_km is not None else args.forward_km
            if args.forward_km <= 0 or back <= 0:
                raise ConfigError("fibre lengths must be positive")
            us = DEFAULT_GROUP_DELAY_US_PER_KM * 1e-6
            config = AsymmetryConfig(args.forward_km * us, back * us)
        elif args.config:
            raw = load_json(args.config)
            profile = scenario_from_dict(raw).profile if isinstance(raw, dict) and "profile" in raw \
                else profile_from_dict(raw)
            config = AsymmetryConfig.from_profile(profile)
        else:
            raise ConfigError("need latencies, fibre lengths, --alpha or --config")
        report = calibration_report(config, mode, args.applied_alpha)
    text = dump_json(report)
    sys.stdout.write(text)
    if args.out:
        _write(_out_dir(args.out) / "calibration.json", lambda t, p: Path(p).write_text(t), text)
    return EXIT_OK


# -- entry point -------------------------------------------------------------

def _add_alpha_mode(p, default):
    p.add_argument("--alpha-mode", choices=MODES, default=default,
                   help="alpha fixed-point encoding (default paper)")


def _add_common(p, stats=True):
    p.add_argument("--out", help="output directory (default $WRSIM_OUT_DIR or ./wrsim_out)")
    if stats:
        p.add_argument("--stats", help="comma-separated statistics: tdev, mtie, adev (default tdev,mtie)")
        p.add_argument("--taus", help="'octave' (default), 'dense', or comma-separated integer factors")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wrsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"wrsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    builtins = sorted(set(replay_configurations()) | set(BUILTIN_ALIASES))

    p = sub.add_parser("simulate", help="run a scenario and write its PPS log")
    p.add_argument("--config", help="scenario JSON or a manifest.json from an earlier run")
    p.add_argument("--builtin", choices=builtins, help="use a built-in scenario")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--analyze", action="store_true", help="also run the analysis on the new log")
    _add_alpha_mode(p, None)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="pair a PPS log and compute stability curves")
    p.add_argument("log", help="log CSV (channel,timestamp_ps)")
    p.add_argument("--interval", type=float, default=1.0, help="nominal PPS interval, seconds")
    p.add_argument("--skew-offset", type=float, default=0.0,
                   help="coarse follower-minus-leader skew removed before pairing, seconds")
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("budget", help="optical power and OSNR budget")
    p.add_argument("--config", help="profile JSON or scenario JSON")
    p.add_argument("--builtin", help="'chain300' or a built-in scenario name")
    p.add_argument("--launch", type=float, help="SFP launch power, dBm")
    p.add_argument("--max-launch", type=float, help="SFP maximum launch power, dBm")
    p.add_argument("--sensitivity", type=float, help="receiver sensitivity, dBm")
    p.add_argument("--booster", type=float, metavar="DBM", help="add a booster with this output setpoint")
    p.add_argument("--preamp", type=float, metavar="DBM", help="add a preamp with this output setpoint")
    p.add_argument("--filter-ghz", type=float, help="add a bandpass filter of this width")
    p.add_argument("--no-edfas", action="store_true", help="remove both amplifiers")
    p.add_argument("--no-filter", action="store_true", help="remove the bandpass filter")
    p.add_argument("--direction", choices=("forward", "return", "both"), default="both")
    p.add_argument("--osnr-threshold", type=float, default=10.0, help="required OSNR, dB")
    _add_common(p, stats=False)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("calibrate", help="asymmetry alpha, alpha_n and predicted skew")
    p.add_argument("--delta-ms", type=float, help="leader to follower latency, seconds")
    p.add_argument("--delta-sm", type=float, help="follower to leader latency, seconds")
    p.add_argument("--forward-km", type=float, help="forward fibre length, km")
    p.add_argument("--return-km", type=float, help="return fibre length, km (default: same)")
    p.add_argument("--alpha", type=float, help="encode this alpha directly")
    p.add_argument("--applied-alpha", type=float, default=0.0,
                   help="alpha used when the true one cannot be encoded (default 0)")
    p.add_argument("--config", help="profile or scenario JSON")
    p.add_argument("--out", help="also write calibration.json here")
    _add_alpha_mode(p, "paper")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("demo", help="simulate and analyze all four built-in configurations")
    p.add_argument("--seed", type=int, help="override every scenario seed")
    p.add_argument("--jobs", type=int, default=1, help="scenarios to run in parallel")
    _add_common(p)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LinkFails as exc:
        print(f"wrsim: link fails: {exc}", file=sys.stderr)
        if exc.report is not None:
            print(exc.report.table(), file=sys.stderr)
        return EXIT_LINK
    except _IOFailure as exc:
        print(f"wrsim: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NoOverlap, AmbiguousPairing, EmptyInput, InsufficientData) as exc:
        print(f"wrsim: cannot analyse log: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except (ConfigError, InvalidScenario, InvalidArgument, WrsimError, ValueError) as exc:
        print(f"wrsim: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"wrsim: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

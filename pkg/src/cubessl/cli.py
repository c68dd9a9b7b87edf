"""
Command-line front end.

Exit codes: 0 ok, 2 bad configuration or arguments, 3 I/O failure,
4 no signal. Log verbosity comes from ``CUBESSL_LOG_LEVEL``.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import Config, config_to_doc, parse_config
from .errors import InvalidArgumentError, NoSignalError
from .fileio import read_wav, write_rows_csv, write_srp_csv, write_wav
from .pipeline import TRAJECTORY_COLUMNS, localize, run_distance_sweep, track_and_drive
from .scene import SceneConfig, SourceSpec, synthesize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NO_SIGNAL = 4

logger = logging.getLogger("cubessl")


class ConfigFileError(Exception):
    pass


def _load(args) -> Config:
    path = Path(args.config)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigFileError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigFileError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise ConfigFileError(f"{path}: {exc}") from None
    doc = _apply_overrides(doc, args)
    return parse_config(doc, path.parent)


def _apply_overrides(doc: dict, args) -> dict:
    doc = copy.deepcopy(doc)
    if getattr(args, "azimuth_step", None) is not None:
        doc.setdefault("grid", {})["azimuth_step"] = args.azimuth_step
    if getattr(args, "elevation_step", None) is not None:
        doc.setdefault("grid", {})["elevation_step"] = args.elevation_step
    if getattr(args, "max_sources", None) is not None:
        doc["max_sources"] = args.max_sources
    if getattr(args, "seed", None) is not None and isinstance(doc.get("scene"), dict):
        doc["scene"]["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        doc.setdefault("sweep", {})["trials"] = args.trials
    if getattr(args, "duration", None) is not None:
        doc.setdefault("track", {})["duration"] = args.duration
    return doc


def _emit(args, doc: dict, text: str) -> None:
    if args.json:
        print(json.dumps(doc))
    else:
        print(text)


def cmd_simulate(args) -> int:
    cfg = _load(args)
    if cfg.scene is None:
        raise InvalidArgumentError("scene: required for simulate")
    x = synthesize(cfg.scene, cfg.localizer.array)
    clipped = write_wav(args.output, x, cfg.scene.sample_rate)
    if clipped:
        logger.warning("%.3f%% of samples clipped to full scale", 100 * clipped)
    truth = {
        "sources": [
            {"azimuth": s.azimuth, "elevation": s.elevation, "range": s.range, "level": s.level}
            for s in cfg.scene.sources
        ],
        "sample_rate": cfg.scene.sample_rate,
        "channels": int(x.shape[0]),
        "samples": int(x.shape[1]),
        "clipped_fraction": clipped,
    }
    print(json.dumps(truth))
    return EXIT_OK


def cmd_localize(args) -> int:
    cfg = _load(args)
    samples, rate = read_wav(args.wav)
    loc = cfg.localizer
    if rate != loc.sample_rate:
        logger.info("using WAV sample rate %g Hz instead of configured %g Hz", rate, loc.sample_rate)
        loc = replace(loc, sample_rate=rate)
    if args.dump_srp:
        loc = replace(loc, dump_srp=True)
    result = localize(samples, loc)
    if args.dump_srp:
        write_srp_csv(args.dump_srp, result.srp_map, loc.grid())
    lines = [f"{'azimuth':>9} {'elevation':>9} {'power':>12}"]
    lines += [f"{e.azimuth:9.1f} {e.elevation:9.1f} {e.power:12.4f}" for e in result.estimates]
    doc = result.to_dict()
    doc["config"] = config_to_doc(Config(loc, cfg.scene, cfg.drive, cfg.controller, cfg.track, cfg.sweep))
    _emit(args, doc, "\n".join(lines))
    return EXIT_OK


def _default_sweep_scene(sample_rate: float) -> SceneConfig:
    return SceneConfig((SourceSpec(-4.0, -45.0, 1.0, 0.1),), 0.0, 0.25, sample_rate, 0)


def cmd_sweep(args) -> int:
    cfg = _load(args)
    base = cfg.scene or _default_sweep_scene(cfg.localizer.sample_rate)
    sw = cfg.sweep
    rows = run_distance_sweep(base, sw.distances, sw.trials, cfg.localizer, sw.azimuth, sw.elevation)
    out = [(round(d * 100.0, 6), mse) for d, mse in rows]
    write_rows_csv(args.output, ("distance_cm", "mse_deg2"), out)
    doc = {"rows": [{"distance_cm": d, "mse_deg2": m} for d, m in out], "config": config_to_doc(cfg)}
    _emit(args, doc, "\n".join(f"{d:7.1f} cm  {m:10.3f} deg^2" for d, m in out))
    return EXIT_OK


def cmd_track(args) -> int:
    cfg = _load(args)
    if cfg.scene is None:
        raise InvalidArgumentError("scene: required for track")
    traj = track_and_drive(cfg.scene, cfg.localizer, cfg.drive, cfg.controller, cfg.track)
    write_rows_csv(args.output, TRAJECTORY_COLUMNS, traj.rows)
    err = math.degrees(traj.bearing_error())
    dist = traj.distance_to_target()
    doc = {
        "cycles": len(traj),
        "final_heading_error_deg": err,
        "distance_to_source_m": dist,
        "arrived": traj.arrived,
        "final_state": {"x": traj.final_state.x, "y": traj.final_state.y, "heading": traj.final_state.heading},
        "config": config_to_doc(cfg),
    }
    _emit(args, doc, f"final heading error: {err:.2f} deg\ndistance to source: {dist:.3f} m")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cubessl", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--json", action="store_true", help="print one JSON document")
        p.add_argument("--azimuth-step", type=float)
        p.add_argument("--elevation-step", type=float)
        p.add_argument("--max-sources", type=int)
        if seed:
            p.add_argument("--seed", type=int)

    p = sub.add_parser("simulate", help="render a scene config to a multichannel WAV")
    p.add_argument("config")
    p.add_argument("output")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_simulate, json=True)

    p = sub.add_parser("localize", help="estimate source directions in a WAV recording")
    p.add_argument("wav")
    p.add_argument("config")
    p.add_argument("--dump-srp", metavar="CSV", help="write the SRP map to this CSV")
    common(p, seed=False)
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("sweep", help="azimuth MSE versus source distance")
    p.add_argument("config")
    p.add_argument("output")
    p.add_argument("--trials", type=int)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("track", help="closed-loop localization and driving")
    p.add_argument("config")
    p.add_argument("output")
    p.add_argument("--duration", type=float)
    common(p)
    p.set_defaults(func=cmd_track)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("CUBESSL_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigFileError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoSignalError as exc:
        print(f"error: no signal: {exc}", file=sys.stderr)
        return EXIT_NO_SIGNAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""
JSON configuration documents.

One document carries every section; each is optional and falls back to
the library defaults::

    {
      "array": {"preset": "cubical", "edge_length": 0.15, "speed_of_sound": 343.0}
             | {"speed_of_sound": 343.0, "mics": [[x, y, z], ...]},
      "sample_rate": 16000,
      "grid": {"radius": 1.5, "azimuth_step": 2, "elevation_step": 2},
      "frames": {"length": 1024, "hop": 512, "window": "hann"},
      "regularization": null,
      "max_sources": 3,
      "suppression_radius": 20,
      "scene": {"duration": 1.0, "noise_rms": 0.0 | "snr_db": 20, "seed": 0,
                "sources": [{"azimuth": 45, "elevation": -45, "range": 1.5,
                             "level": 0.1, "excitation": "white"}]},
      "drive": {"wheel_angles": [90, 210, 330], "wheel_radius": 0.05, "body_radius": 0.2},
      "controller": {"gain": 2.0, "max_omega": 1.5, "forward_speed": 0.3, "deadband_deg": 5},
      "track": {"duration": 10, "control_period": 0.25, "window": 0.5, "stop_range": 0.5},
      "sweep": {"distances_cm": [50, 60, ...] | {"start": 50, "stop": 300, "step": 10},
                "trials": 20, "azimuth": -4, "elevation": -45}
    }

Unknown keys are rejected with the offending name in the message.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError
from .geometry import SPEED_OF_SOUND, MicArray, cubical_array
from .pipeline import ControllerParams, LocalizerConfig, TrackParams
from .scene import SceneConfig, SourceSpec, noise_rms_for_snr
from .spectral import DEFAULT_SAMPLE_RATE
from .vehicle import DriveGeometry

_TOP_KEYS = {
    "array", "sample_rate", "grid", "frames", "regularization", "max_sources",
    "suppression_radius", "scene", "drive", "controller", "track", "sweep",
}


@dataclass(frozen=True)
class SweepParams:
    distances: tuple[float, ...] = tuple(d / 100.0 for d in range(50, 301, 10))
    trials: int = 20
    azimuth: float = -4.0
    elevation: float = -45.0


@dataclass
class Config:
    localizer: LocalizerConfig = field(default_factory=LocalizerConfig)
    scene: Optional[SceneConfig] = None
    drive: DriveGeometry = field(default_factory=DriveGeometry)
    controller: ControllerParams = field(default_factory=ControllerParams)
    track: TrackParams = field(default_factory=TrackParams)
    sweep: SweepParams = field(default_factory=SweepParams)
    raw: dict = field(default_factory=dict)


def _section(doc: dict, name: str, allowed: set) -> dict:
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise InvalidArgumentError(f"{name}: expected an object")
    extra = set(sec) - allowed
    if extra:
        raise InvalidArgumentError(f"{name}: unknown field(s) {sorted(extra)}")
    return sec


def _number(sec: dict, key: str, default, where: str):
    value = sec.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InvalidArgumentError(f"{where}.{key}: expected a finite number, got {value!r}")
    return value


def parse_array(sec: dict) -> MicArray:
    if not sec:
        return cubical_array()
    if "mics" in sec:
        extra = set(sec) - {"mics", "speed_of_sound"}
        if extra:
            raise InvalidArgumentError(f"array: unknown field(s) {sorted(extra)}")
        return MicArray.from_dict(sec)
    extra = set(sec) - {"preset", "edge_length", "speed_of_sound"}
    if extra:
        raise InvalidArgumentError(f"array: unknown field(s) {sorted(extra)}")
    if sec.get("preset", "cubical") != "cubical":
        raise InvalidArgumentError(f"array.preset: unknown preset {sec['preset']!r}")
    return cubical_array(
        _number(sec, "edge_length", 0.15, "array"), _number(sec, "speed_of_sound", SPEED_OF_SOUND, "array")
    )


def parse_localizer(doc: dict) -> LocalizerConfig:
    grid = _section(doc, "grid", {"radius", "azimuth_step", "elevation_step"})
    frames = _section(doc, "frames", {"length", "hop", "window"})
    defaults = LocalizerConfig()
    return LocalizerConfig(
        array=parse_array(doc.get("array") or {}),
        sample_rate=_number(doc, "sample_rate", DEFAULT_SAMPLE_RATE, "config"),
        radius=_number(grid, "radius", defaults.radius, "grid"),
        azimuth_step=_number(grid, "azimuth_step", defaults.azimuth_step, "grid"),
        elevation_step=_number(grid, "elevation_step", defaults.elevation_step, "grid"),
        frame_length=_number(frames, "length", defaults.frame_length, "frames"),
        hop=_number(frames, "hop", defaults.hop, "frames"),
        window=frames.get("window", defaults.window),
        regularization=_number(doc, "regularization", None, "config"),
        max_sources=_number(doc, "max_sources", defaults.max_sources, "config"),
        suppression_radius=_number(doc, "suppression_radius", defaults.suppression_radius, "config"),
    )


def parse_scene(sec: dict, sample_rate: float, base_dir: Path = Path(".")) -> SceneConfig:
    extra = set(sec) - {"duration", "noise_rms", "snr_db", "seed", "sources"}
    if extra:
        raise InvalidArgumentError(f"scene: unknown field(s) {sorted(extra)}")
    if "noise_rms" in sec and "snr_db" in sec:
        raise InvalidArgumentError("scene: give either noise_rms or snr_db, not both")
    raw_sources = sec.get("sources")
    if not isinstance(raw_sources, list) or not raw_sources:
        raise InvalidArgumentError("scene.sources: expected a non-empty list")
    sources = []
    for i, s in enumerate(raw_sources):
        where = f"scene.sources[{i}]"
        if not isinstance(s, dict):
            raise InvalidArgumentError(f"{where}: expected an object")
        extra = set(s) - {"azimuth", "elevation", "range", "level", "excitation"}
        if extra:
            raise InvalidArgumentError(f"{where}: unknown field(s) {sorted(extra)}")
        for key in ("azimuth", "elevation", "range"):
            if key not in s:
                raise InvalidArgumentError(f"{where}.{key}: required")
        excitation = s.get("excitation", "white")
        if isinstance(excitation, dict):
            if set(excitation) != {"file"}:
                raise InvalidArgumentError(f"{where}.excitation: expected {{'file': path}}")
            from .fileio import read_wav

            wav_path = Path(excitation["file"])
            if not wav_path.is_absolute():
                wav_path = base_dir / wav_path
            excitation = read_wav(wav_path)[0][0]
        try:
            sources.append(
                SourceSpec(
                    _number(s, "azimuth", None, where),
                    _number(s, "elevation", None, where),
                    _number(s, "range", None, where),
                    _number(s, "level", 1.0, where),
                    excitation,
                )
            )
        except InvalidArgumentError as exc:
            raise InvalidArgumentError(f"{where}: {exc}") from None
    if "snr_db" in sec:
        first = sources[0]
        noise = noise_rms_for_snr(first.level, first.range, _number(sec, "snr_db", None, "scene"))
    else:
        noise = _number(sec, "noise_rms", 0.0, "scene")
    seed = sec.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise InvalidArgumentError(f"scene.seed: expected an integer, got {seed!r}")
    return SceneConfig(tuple(sources), noise, _number(sec, "duration", 1.0, "scene"), sample_rate, seed)


def parse_sweep(sec: dict) -> SweepParams:
    d = SweepParams()
    dist = sec.get("distances_cm")
    if dist is None:
        distances = d.distances
    elif isinstance(dist, dict):
        if set(dist) - {"start", "stop", "step"}:
            raise InvalidArgumentError("sweep.distances_cm: expected start/stop/step")
        start, stop, step_ = (float(dist.get(k, v)) for k, v in (("start", 50), ("stop", 300), ("step", 10)))
        if not step_ > 0:
            raise InvalidArgumentError("sweep.distances_cm.step: must be positive")
        n = int(math.floor((stop - start) / step_ + 1e-9)) + 1
        distances = tuple(float(v) / 100.0 for v in start + step_ * np.arange(n))
    else:
        distances = tuple(float(v) / 100.0 for v in dist)
    if not distances or any(v <= 0 for v in distances) or list(distances) != sorted(distances):
        raise InvalidArgumentError("sweep.distances_cm: must be positive and ascending")
    trials = sec.get("trials", d.trials)
    if not isinstance(trials, int) or trials < 1:
        raise InvalidArgumentError(f"sweep.trials: expected a positive integer, got {trials!r}")
    return SweepParams(
        distances, trials, _number(sec, "azimuth", d.azimuth, "sweep"), _number(sec, "elevation", d.elevation, "sweep")
    )


def parse_config(doc: dict, base_dir: Path = Path(".")) -> Config:
    if not isinstance(doc, dict):
        raise InvalidArgumentError("config: expected a JSON object")
    extra = set(doc) - _TOP_KEYS
    if extra:
        raise InvalidArgumentError(f"config: unknown field(s) {sorted(extra)}")
    localizer = parse_localizer(doc)
    scene = None
    if "scene" in doc:
        scene = parse_scene(_section(doc, "scene", {"duration", "noise_rms", "snr_db", "seed", "sources"}),
                            localizer.sample_rate, base_dir)

    drv = _section(doc, "drive", {"wheel_angles", "wheel_radius", "body_radius"})
    dd = DriveGeometry()
    drive = DriveGeometry(
        tuple(drv.get("wheel_angles", dd.wheel_angles)),
        _number(drv, "wheel_radius", dd.wheel_radius, "drive"),
        _number(drv, "body_radius", dd.body_radius, "drive"),
    )

    ctl = _section(doc, "controller", {"gain", "max_omega", "forward_speed", "deadband_deg"})
    cd = ControllerParams()
    controller = ControllerParams(
        _number(ctl, "gain", cd.gain, "controller"),
        _number(ctl, "max_omega", cd.max_omega, "controller"),
        _number(ctl, "forward_speed", cd.forward_speed, "controller"),
        math.radians(_number(ctl, "deadband_deg", math.degrees(cd.deadband), "controller")),
    )
    if min(controller.gain, controller.max_omega, controller.forward_speed, controller.deadband) < 0:
        raise InvalidArgumentError("controller: gain, max_omega, forward_speed and deadband_deg must be >= 0")

    trk = _section(doc, "track", {"duration", "control_period", "window", "stop_range"})
    td = TrackParams()
    track = TrackParams(
        _number(trk, "duration", td.duration, "track"),
        _number(trk, "control_period", td.control_period, "track"),
        _number(trk, "window", td.window, "track"),
        _number(trk, "stop_range", td.stop_range, "track"),
    )
    if track.duration < 0:
        raise InvalidArgumentError("track.duration: must be >= 0")
    if not track.control_period > 0:
        raise InvalidArgumentError("track.control_period: must be positive")
    if track.window * localizer.sample_rate < localizer.frame_length:
        raise InvalidArgumentError("track.window: shorter than one analysis frame")

    sweep = parse_sweep(_section(doc, "sweep", {"distances_cm", "trials", "azimuth", "elevation"}))
    return Config(localizer, scene, drive, controller, track, sweep, doc)


def load_config(path) -> Config:
    path = Path(path)
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(doc, path.parent)


def config_to_doc(cfg: Config) -> dict:
    """Effective configuration as a JSON-ready document (defaults filled in)."""
    loc = cfg.localizer
    doc = {
        "array": loc.array.to_dict(),
        "sample_rate": loc.sample_rate,
        "grid": {"radius": loc.radius, "azimuth_step": loc.azimuth_step, "elevation_step": loc.elevation_step},
        "frames": {"length": loc.frame_length, "hop": loc.hop, "window": loc.window},
        "regularization": loc.regularization,
        "max_sources": loc.max_sources,
        "suppression_radius": loc.suppression_radius,
        "drive": {
            "wheel_angles": list(cfg.drive.wheel_angles),
            "wheel_radius": cfg.drive.wheel_radius,
            "body_radius": cfg.drive.body_radius,
        },
        "controller": {
            "gain": cfg.controller.gain,
            "max_omega": cfg.controller.max_omega,
            "forward_speed": cfg.controller.forward_speed,
            "deadband_deg": math.degrees(cfg.controller.deadband),
        },
        "track": {
            "duration": cfg.track.duration,
            "control_period": cfg.track.control_period,
            "window": cfg.track.window,
            "stop_range": cfg.track.stop_range,
        },
        "sweep": {
            "distances_cm": [round(d * 100.0, 6) for d in cfg.sweep.distances],
            "trials": cfg.sweep.trials,
            "azimuth": cfg.sweep.azimuth,
            "elevation": cfg.sweep.elevation,
        },
    }
    if cfg.scene is not None:
        doc["scene"] = {
            "duration": cfg.scene.duration,
            "noise_rms": cfg.scene.noise_rms,
            "seed": cfg.scene.seed,
            "sources": [
                {
                    "azimuth": s.azimuth,
                    "elevation": s.elevation,
                    "range": s.range,
                    "level": s.level,
                    "excitation": s.excitation if isinstance(s.excitation, str) else "file",
                }
                for s in cfg.scene.sources
            ],
        }
    return doc

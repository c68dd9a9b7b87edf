"""
End-to-end localization and the closed-loop drive simulation.

``localize`` chains framing, per-pair GCC-PHAT, SRP accumulation on the
spherical grid and peak picking. ``track_and_drive`` re-renders the scene
from the vehicle's pose each control cycle and steers toward the strongest
estimate. ``run_distance_sweep`` measures azimuth error against range.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgumentError, NoSignalError
from .geometry import MicArray, cartesian_to_spherical, cubical_array, wrap_degrees
from .scene import SceneConfig, SourceSpec, synthesize
from .spectral import (
    DEFAULT_FRAME_LENGTH,
    DEFAULT_HOP,
    DEFAULT_SAMPLE_RATE,
    DEFAULT_WINDOW,
    frame_stream,
    gcc_phat_pairs,
    make_window,
)
from .srp_grid import (
    DEFAULT_MAX_SOURCES,
    DEFAULT_RADIUS,
    DEFAULT_STEP,
    DEFAULT_SUPPRESSION_RADIUS,
    DelayTable,
    DoaEstimate,
    SphericalGrid,
    SrpMap,
    accumulate_srp,
    build_delay_table,
    build_grid,
    find_peaks,
)
from .vehicle import (
    DEFAULT_DEADBAND,
    DEFAULT_FORWARD_SPEED,
    DEFAULT_GAIN,
    DEFAULT_MAX_OMEGA,
    BodyTwist,
    DriveGeometry,
    VehicleState,
    forward_kinematics,
    heading_controller,
    inverse_kinematics,
    step,
    wrap_angle,
)

logger = logging.getLogger(__name__)

ENERGY_FLOOR = 1e-6  # frame RMS, full scale = 1.0
_FRAMES_PER_CHUNK = 64


@dataclass(frozen=True)
class LocalizerConfig:
    array: MicArray = field(default_factory=cubical_array)
    sample_rate: float = DEFAULT_SAMPLE_RATE
    radius: float = DEFAULT_RADIUS
    azimuth_step: float = DEFAULT_STEP
    elevation_step: float = DEFAULT_STEP
    frame_length: int = DEFAULT_FRAME_LENGTH
    hop: int = DEFAULT_HOP
    window: str = DEFAULT_WINDOW
    regularization: Optional[float] = None
    max_sources: int = DEFAULT_MAX_SOURCES
    suppression_radius: float = DEFAULT_SUPPRESSION_RADIUS
    dump_srp: bool = False

    def __post_init__(self):
        def bad(name, why):
            raise InvalidArgumentError(f"{name}: {why} (got {getattr(self, name)!r})")

        if not isinstance(self.array, MicArray):
            bad("array", "must be a MicArray")
        if not self.sample_rate > 0:
            bad("sample_rate", "must be positive")
        if not (math.isfinite(self.radius) and self.radius > self.array.circumradius):
            bad("radius", f"must exceed the array circumradius {self.array.circumradius:.4f} m")
        for name, span in (("azimuth_step", 360.0), ("elevation_step", 180.0)):
            s = getattr(self, name)
            if not (s > 0 and abs(span / s - round(span / s)) < 1e-9):
                bad(name, f"must be a positive divisor of {span:g}")
        if int(self.frame_length) != self.frame_length or self.frame_length < 2:
            bad("frame_length", "must be an integer >= 2")
        if int(self.hop) != self.hop or not 0 < self.hop <= self.frame_length:
            bad("hop", "must be an integer in (0, frame_length]")
        try:
            make_window(self.window, 4)
        except (ValueError, TypeError):
            bad("window", "unknown window")
        if self.regularization is not None and not self.regularization >= 0:
            bad("regularization", "must be >= 0 or null")
        if int(self.max_sources) != self.max_sources or self.max_sources < 1:
            bad("max_sources", "must be an integer >= 1")
        if not self.suppression_radius > 0:
            bad("suppression_radius", "must be positive")
        for name in ("frame_length", "hop", "max_sources"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.frame_length <= 2 * self.max_shift_bound:
            bad("frame_length", f"must exceed twice the largest pair delay ({self.max_shift_bound:.2f} samples)")

    @property
    def max_shift_bound(self) -> float:
        """Largest possible |delay| between any pair, in samples."""
        pos = self.array.positions
        d = np.linalg.norm(pos[:, None] - pos[None], axis=-1).max()
        return float(d * self.sample_rate / self.array.speed_of_sound)

    def grid(self) -> SphericalGrid:
        return _cached_grid(self.radius, self.azimuth_step, self.elevation_step)

    def delay_table(self) -> DelayTable:
        return _cached_table(self.grid(), self.array, self.sample_rate)


@lru_cache(maxsize=16)
def _cached_grid(radius, azimuth_step, elevation_step) -> SphericalGrid:
    return build_grid(radius, azimuth_step, elevation_step)


@lru_cache(maxsize=16)
def _cached_table(grid, array, sample_rate) -> DelayTable:
    return build_delay_table(grid, array, sample_rate)


@dataclass
class LocalizationResult:
    estimates: list[DoaEstimate]
    srp_map: Optional[SrpMap] = None
    frames_used: int = 0
    elapsed: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {
            "estimates": [e.to_dict() for e in self.estimates],
            "frames_used": self.frames_used,
            "elapsed": self.elapsed,
        }


def srp_map_from_samples(samples, config: LocalizerConfig) -> SrpMap:
    """Steered response power accumulated over every non-silent frame."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or x.shape[0] != config.array.n_mics:
        raise InvalidArgumentError(
            f"samples: expected {config.array.n_mics} channels, got shape {x.shape}"
        )
    if x.shape[1] < config.frame_length:
        raise InvalidArgumentError(
            f"samples: {x.shape[1]} samples is shorter than one frame ({config.frame_length})"
        )
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("samples: non-finite values")

    table = config.delay_table()
    frames = frame_stream(x, config.frame_length, config.hop, config.window)
    win_rms = np.sqrt(np.mean(make_window(config.window, config.frame_length) ** 2))
    frame_rms = np.sqrt(np.mean(frames**2, axis=-1)) / win_rms
    active = frames[np.max(frame_rms, axis=1) >= ENERGY_FLOOR]
    if len(active) == 0:
        raise NoSignalError("every frame is below the energy floor")

    # correlate channel b against channel a so the peak lands at the table shift
    swapped = table.pairs[:, ::-1]
    centre = config.frame_length - 1
    half = int(math.ceil(table.max_shift)) + 1
    summed = np.zeros((len(swapped), 2 * half + 1))
    for start in range(0, len(active), _FRAMES_PER_CHUNK):
        corr = gcc_phat_pairs(active[start : start + _FRAMES_PER_CHUNK], swapped, config.regularization)
        summed += corr[..., centre - half : centre + half + 1].sum(axis=0)
    return accumulate_srp(summed, table, SrpMap.empty(config.grid()), frames=len(active))


def localize(samples, config: LocalizerConfig = LocalizerConfig()) -> LocalizationResult:
    """Estimate source directions from a (n_mics, n_samples) recording.

    Raises
    ------
    InvalidArgumentError
        Channel count differs from the array, or fewer samples than a frame.
    NoSignalError
        Every frame is below the energy floor.
    """
    t0 = time.perf_counter()
    srp = srp_map_from_samples(samples, config)
    estimates = find_peaks(srp, config.grid(), config.max_sources, config.suppression_radius)
    return LocalizationResult(
        estimates,
        srp if config.dump_srp else None,
        srp.frames_accumulated,
        time.perf_counter() - t0,
    )


@dataclass(frozen=True)
class ControllerParams:
    gain: float = DEFAULT_GAIN
    max_omega: float = DEFAULT_MAX_OMEGA
    forward_speed: float = DEFAULT_FORWARD_SPEED
    deadband: float = DEFAULT_DEADBAND


@dataclass(frozen=True)
class TrackParams:
    duration: float = 10.0
    control_period: float = 0.25
    window: float = 0.5
    stop_range: float = 0.5


TRAJECTORY_COLUMNS = ("t", "x", "y", "heading", "azimuth_error", "wheel0", "wheel1", "wheel2")


@dataclass
class Trajectory:
    """Per-cycle log plus the pose after the last cycle.

    ``heading`` and ``azimuth_error`` are in radians; wheel speeds in m/s.
    ``azimuth_error`` is NaN on cycles without a usable estimate.
    """

    rows: list[tuple]
    final_state: VehicleState
    source_positions: np.ndarray
    target_index: int
    arrived: bool = False

    def __len__(self):
        return len(self.rows)

    def bearing_error(self, state: Optional[VehicleState] = None) -> float:
        """True heading error (radians) to the target source from ``state``."""
        state = self.final_state if state is None else state
        dx, dy = self.source_positions[self.target_index, :2] - state.position
        return wrap_angle(math.atan2(dy, dx) - state.heading)

    def distance_to_target(self, state: Optional[VehicleState] = None) -> float:
        state = self.final_state if state is None else state
        return float(np.linalg.norm(self.source_positions[self.target_index, :2] - state.position))


def relative_scene(scene: SceneConfig, state: VehicleState, duration: float, seed: int) -> SceneConfig:
    """The scene as heard by the array on a vehicle at ``state``.

    Sources are fixed in the world frame defined by the vehicle's starting
    pose (origin, heading 0); the array keeps its height.
    """
    c, s = math.cos(state.heading), math.sin(state.heading)
    sources = []
    for src in scene.sources:
        dx, dy, dz = src.position - np.array([state.x, state.y, 0.0])
        body = (c * dx + s * dy, -s * dx + c * dy, dz)
        az, el, rng = cartesian_to_spherical(body)
        sources.append(SourceSpec(az, el, rng, src.level, src.excitation))
    return replace(scene, sources=tuple(sources), duration=duration, seed=seed)


def track_and_drive(
    scene: SceneConfig,
    localizer: LocalizerConfig = LocalizerConfig(),
    drive: DriveGeometry = DriveGeometry(),
    controller: ControllerParams = ControllerParams(),
    track: TrackParams = TrackParams(),
    initial_state: VehicleState = VehicleState(),
    measure: Optional[Callable[[VehicleState, int], Optional[float]]] = None,
) -> Trajectory:
    """Closed-loop localization and steering.

    Each cycle renders ``track.window`` seconds of audio from the current
    pose, localizes it, and steers toward ``estimates[0]``. ``measure``
    replaces the audio path: it takes ``(state, cycle)`` and returns the
    azimuth in degrees (or None for no estimate). The loop stops early once
    any source is within ``track.stop_range`` metres.
    """
    positions = np.array([src.position for src in scene.sources])
    target = int(np.argmax([src.level / src.range for src in scene.sources]))
    state = initial_state
    rows: list[tuple] = []
    n_cycles = int(math.floor(track.duration / track.control_period + 1e-9)) if track.duration > 0 else 0
    arrived = False
    for k in range(n_cycles):
        ranges = np.linalg.norm(positions[:, :2] - state.position, axis=1)
        if np.min(np.hypot(ranges, positions[:, 2])) <= max(track.stop_range, localizer.array.circumradius):
            arrived = True
            break
        if measure is None:
            azimuth = _measure_azimuth(scene, localizer, state, track.window, scene.seed + k)
        else:
            azimuth = measure(state, k)
        if azimuth is None:
            error = float("nan")
            twist = BodyTwist()
        else:
            error = math.radians(wrap_degrees(azimuth))
            twist = heading_controller(
                error, controller.gain, controller.max_omega, controller.forward_speed, controller.deadband
            )
        wheels = inverse_kinematics(twist, drive)
        rows.append((k * track.control_period, state.x, state.y, state.heading, error, *wheels.speeds))
        state = step(state, forward_kinematics(wheels, drive), track.control_period)
    return Trajectory(rows, state, positions, target, arrived)


def _measure_azimuth(scene, localizer, state, window, seed) -> Optional[float]:
    local = relative_scene(scene, state, window, seed)
    try:
        result = localize(synthesize(local, localizer.array), localizer)
    except NoSignalError:
        logger.info("no signal at pose %s; holding still", state)
        return None
    if not result.estimates:
        return None
    return result.estimates[0].azimuth


def perfect_measurement(scene: SceneConfig, target: Optional[int] = None) -> Callable:
    """Stub ``measure`` returning the exact bearing to the loudest (or given) source."""
    positions = np.array([src.position for src in scene.sources])
    if target is None:
        target = int(np.argmax([src.level / src.range for src in scene.sources]))

    def measure(state: VehicleState, cycle: int) -> float:
        dx, dy = positions[target, :2] - state.position
        return math.degrees(wrap_angle(math.atan2(dy, dx) - state.heading))

    return measure


def azimuth_error(estimate: float, truth: float) -> float:
    """Signed azimuth difference in degrees, wrapped to (-180, 180]."""
    return wrap_degrees(estimate - truth)


def run_distance_sweep(
    base_scene: SceneConfig,
    distances,
    trials: int = 20,
    localizer: LocalizerConfig = LocalizerConfig(),
    azimuth: float = -4.0,
    elevation: float = -45.0,
) -> list[tuple[float, float]]:
    """Mean squared azimuth error (deg^2) at each source distance.

    The first source of ``base_scene`` supplies level and excitation; its
    direction is replaced by ``(azimuth, elevation)``. Noise RMS stays
    fixed, so SNR falls with 1/r. Failed localizations count as 180 deg.
    """
    distances = [float(d) for d in distances]
    if any(d <= 0 for d in distances) or distances != sorted(distances):
        raise InvalidArgumentError("distances must be positive and ascending")
    if trials < 1:
        raise InvalidArgumentError(f"trials must be >= 1, got {trials}")
    src = base_scene.sources[0]
    rows = []
    for i, dist in enumerate(distances):
        errs = []
        for trial in range(trials):
            scene = replace(
                base_scene,
                sources=(SourceSpec(azimuth, elevation, dist, src.level, src.excitation),),
                seed=base_scene.seed + 1000 * i + trial,
            )
            try:
                est = localize(synthesize(scene, localizer.array), localizer).estimates
                err = azimuth_error(est[0].azimuth, azimuth) if est else 180.0
            except NoSignalError:
                err = 180.0
            errs.append(err * err)
        rows.append((dist, float(np.mean(errs))))
        logger.debug("sweep distance %.2f m: mse %.3f deg^2", dist, rows[-1][1])
    return rows

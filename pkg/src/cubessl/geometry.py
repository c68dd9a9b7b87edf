"""
Microphone array geometry and propagation delays.

Frame convention: x forward (vehicle heading), y left, z up. Azimuth is
measured in the x-y plane from +x toward +y, in (-180, 180]; elevation is
measured from the x-y plane toward +z, in [-90, 90].
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError

SPEED_OF_SOUND = 343.0  # m/s, dry air at 20 C
DEFAULT_EDGE_LENGTH = 0.15  # m

_MIN_SEPARATION = 1e-6


@dataclass(frozen=True)
class MicArray:
    """Ordered microphone positions (meters) and the speed of sound (m/s).

    Positions are stored as nested tuples so the array is hashable and can
    key cached grids and delay tables.
    """

    mics: tuple[tuple[float, float, float], ...]
    speed_of_sound: float = SPEED_OF_SOUND

    def __post_init__(self):
        mics = np.asarray(self.mics, dtype=float)
        if mics.ndim != 2 or mics.shape[1] != 3:
            raise InvalidArgumentError(f"mics must be a list of 3D positions, got shape {mics.shape}")
        if mics.shape[0] < 2:
            raise InvalidArgumentError("mics: at least 2 microphones are required")
        if not np.all(np.isfinite(mics)):
            raise InvalidArgumentError("mics: positions must be finite")
        if not (math.isfinite(self.speed_of_sound) and self.speed_of_sound > 0):
            raise InvalidArgumentError(f"speed_of_sound must be positive, got {self.speed_of_sound}")
        diffs = mics[:, None, :] - mics[None, :, :]
        dist = np.linalg.norm(diffs, axis=-1)
        iu = np.triu_indices(len(mics), k=1)
        if np.any(dist[iu] <= _MIN_SEPARATION):
            raise InvalidArgumentError("mics: two microphones are coincident")
        object.__setattr__(self, "mics", tuple(tuple(float(v) for v in row) for row in mics))
        object.__setattr__(self, "speed_of_sound", float(self.speed_of_sound))

    @classmethod
    def from_positions(cls, positions, speed_of_sound: float = SPEED_OF_SOUND) -> "MicArray":
        return cls(tuple(map(tuple, np.asarray(positions, dtype=float))), speed_of_sound)

    @property
    def positions(self) -> np.ndarray:
        """(M, 3) array of microphone coordinates."""
        return np.array(self.mics, dtype=float)

    @property
    def n_mics(self) -> int:
        return len(self.mics)

    @property
    def circumradius(self) -> float:
        """Largest microphone distance from the origin."""
        return float(np.max(np.linalg.norm(self.positions, axis=1)))

    def to_dict(self) -> dict:
        return {"speed_of_sound": self.speed_of_sound, "mics": [list(m) for m in self.mics]}

    @classmethod
    def from_dict(cls, doc: dict) -> "MicArray":
        if "mics" not in doc:
            raise InvalidArgumentError("array: missing field 'mics'")
        return cls.from_positions(doc["mics"], float(doc.get("speed_of_sound", SPEED_OF_SOUND)))

    @classmethod
    def load(cls, path) -> "MicArray":
        """Read ``{"speed_of_sound": c, "mics": [[x, y, z], ...]}`` from a JSON file."""
        with open(Path(path)) as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path) -> None:
        with open(Path(path), "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


@dataclass(frozen=True)
class MicPair:
    index_a: int
    index_b: int
    distance: float


def cubical_array(edge_length: float = DEFAULT_EDGE_LENGTH, speed_of_sound: float = SPEED_OF_SOUND) -> MicArray:
    """Eight microphones on the vertices of an origin-centred, axis-aligned cube.

    Vertices are ordered by z, then y, then x, so index 0 is (-h, -h, -h) and
    index 7 is (+h, +h, +h) with h = edge_length / 2.
    """
    edge_length = float(edge_length)
    if not (math.isfinite(edge_length) and edge_length > 0):
        raise InvalidArgumentError(f"edge_length must be positive and finite, got {edge_length}")
    h = edge_length / 2.0
    verts = [(x, y, z) for z in (-h, h) for y in (-h, h) for x in (-h, h)]
    return MicArray(tuple(verts), speed_of_sound)


def enumerate_pairs(array: MicArray) -> list[MicPair]:
    """All unordered microphone pairs (a < b) in lexicographic order."""
    pos = array.positions
    return [
        MicPair(a, b, float(np.linalg.norm(pos[a] - pos[b])))
        for a, b in itertools.combinations(range(array.n_mics), 2)
    ]


def pair_indices(array: MicArray) -> np.ndarray:
    """(P, 2) integer array of the pairs from :func:`enumerate_pairs`."""
    return np.array(list(itertools.combinations(range(array.n_mics), 2)), dtype=int)


def farfield_tdoa(distance: float, angle: float, c: float = SPEED_OF_SOUND) -> float:
    """Plane-wave time difference of arrival ``d sin(angle) / c`` in seconds."""
    if not c > 0:
        raise InvalidArgumentError(f"speed of sound must be positive, got {c}")
    if distance < 0:
        raise InvalidArgumentError(f"distance must be non-negative, got {distance}")
    return distance * math.sin(angle) / c


def point_delay_difference(point, pair: MicPair, array: MicArray) -> float:
    """Propagation time to mic ``a`` minus propagation time to mic ``b`` (seconds).

    Positive when the point is closer to ``b``, i.e. the wavefront reaches
    ``b`` first.
    """
    point = np.asarray(point, dtype=float)
    if point.shape != (3,) or not np.all(np.isfinite(point)):
        raise InvalidArgumentError("point must be a finite 3D position")
    pos = array.positions
    ra = np.linalg.norm(point - pos[pair.index_a])
    rb = np.linalg.norm(point - pos[pair.index_b])
    if min(ra, rb) <= _MIN_SEPARATION:
        raise InvalidArgumentError("point coincides with a microphone")
    return float((ra - rb) / array.speed_of_sound)


def direction_vector(azimuth_deg, elevation_deg) -> np.ndarray:
    """Unit vector(s) for azimuth/elevation in degrees; trailing axis of size 3."""
    az = np.radians(np.asarray(azimuth_deg, dtype=float))
    el = np.radians(np.asarray(elevation_deg, dtype=float))
    return np.stack([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)], axis=-1)


def spherical_to_cartesian(azimuth_deg, elevation_deg, radius) -> np.ndarray:
    return np.asarray(radius, dtype=float)[..., None] * direction_vector(azimuth_deg, elevation_deg)


def cartesian_to_spherical(point) -> tuple[float, float, float]:
    """Return ``(azimuth_deg, elevation_deg, range)`` with azimuth in (-180, 180]."""
    x, y, z = (float(v) for v in point)
    r = math.sqrt(x * x + y * y + z * z)
    if r == 0:
        raise InvalidArgumentError("direction of the origin is undefined")
    az = wrap_degrees(math.degrees(math.atan2(y, x)))
    el = math.degrees(math.asin(max(-1.0, min(1.0, z / r))))
    return az, el, r


def wrap_degrees(angle: float) -> float:
    """Wrap an angle in degrees to (-180, 180]."""
    wrapped = math.fmod(angle, 360.0)
    if wrapped <= -180.0:
        wrapped += 360.0
    elif wrapped > 180.0:
        wrapped -= 360.0
    return wrapped

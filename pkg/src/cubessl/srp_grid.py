"""
Spherical search grid, per-pair delay tables, steered response power
accumulation and multi-source peak picking.

Grid points are flattened elevation-major::

    flat_index = elevation_index * n_azimuths + azimuth_index
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidArgumentError
from .geometry import MicArray, direction_vector, pair_indices, wrap_degrees
from .spectral import CorrelationFunction

DEFAULT_RADIUS = 1.5
DEFAULT_STEP = 2.0
DEFAULT_MAX_SOURCES = 3
DEFAULT_SUPPRESSION_RADIUS = 20.0


@dataclass(frozen=True)
class SphericalGrid:
    radius: float
    azimuths: tuple[float, ...]
    elevations: tuple[float, ...]

    @property
    def shape(self) -> tuple[int, int]:
        """``(n_elevations, n_azimuths)``."""
        return len(self.elevations), len(self.azimuths)

    @property
    def size(self) -> int:
        return len(self.elevations) * len(self.azimuths)

    @cached_property
    def directions(self) -> np.ndarray:
        """(G, 3) unit vectors in flat-index order."""
        el, az = np.meshgrid(self.elevations, self.azimuths, indexing="ij")
        return direction_vector(az.ravel(), el.ravel())

    @cached_property
    def points(self) -> np.ndarray:
        """(G, 3) Cartesian grid points at ``radius``."""
        return self.radius * self.directions

    def flat_index(self, azimuth_index: int, elevation_index: int) -> int:
        return elevation_index * len(self.azimuths) + azimuth_index

    def unravel(self, flat_index: int) -> tuple[int, int]:
        """Return ``(azimuth_index, elevation_index)``."""
        el_i, az_i = divmod(int(flat_index), len(self.azimuths))
        return az_i, el_i

    def angles(self, flat_index: int) -> tuple[float, float]:
        """``(azimuth, elevation)`` in degrees of a flat index."""
        az_i, el_i = self.unravel(flat_index)
        return self.azimuths[az_i], self.elevations[el_i]

    @property
    def step(self) -> float:
        """Coarsest of the azimuth and elevation steps, degrees."""
        steps = []
        if len(self.azimuths) > 1:
            steps.append(self.azimuths[1] - self.azimuths[0])
        if len(self.elevations) > 1:
            steps.append(self.elevations[1] - self.elevations[0])
        return max(steps) if steps else 360.0

    @cached_property
    def neighbours(self) -> np.ndarray:
        """(K, 2) index pairs of points within 1.5 grid steps of each other."""
        theta = math.radians(1.5 * self.step)
        chord = 2.0 * math.sin(min(theta, math.pi) / 2.0)
        tree = cKDTree(self.directions)
        return tree.query_pairs(chord, output_type="ndarray")


def _steps_in(span: float, step: float, name: str) -> int:
    if not (math.isfinite(step) and step > 0):
        raise InvalidArgumentError(f"{name} must be positive, got {step}")
    count = span / step
    if abs(count - round(count)) > 1e-9:
        raise InvalidArgumentError(f"{name} {step} does not divide {span:g} degrees")
    return int(round(count))


def build_grid(
    radius: float = DEFAULT_RADIUS,
    azimuth_step: float = DEFAULT_STEP,
    elevation_step: float = DEFAULT_STEP,
) -> SphericalGrid:
    """Constant-radius direction grid.

    Azimuths run from ``-180 + azimuth_step`` to 180 inclusive, elevations
    from -90 to 90 inclusive. Both poles keep one entry per azimuth so the
    flat index stays regular.
    """
    if not (math.isfinite(radius) and radius > 0):
        raise InvalidArgumentError(f"radius must be positive, got {radius}")
    n_az = _steps_in(360.0, azimuth_step, "azimuth_step")
    n_el = _steps_in(180.0, elevation_step, "elevation_step")
    azimuths = tuple(-180.0 + azimuth_step * i for i in range(1, n_az + 1))
    elevations = tuple(-90.0 + elevation_step * i for i in range(n_el + 1))
    return SphericalGrid(float(radius), azimuths, elevations)


@dataclass(frozen=True, eq=False)
class DelayTable:
    """Per-pair, per-grid-point time shifts in fractional samples.

    ``shifts[p, g]`` is the arrival time at ``pairs[p, 0]`` minus the arrival
    time at ``pairs[p, 1]`` for a source at grid point ``g``, times the
    sample rate.
    """

    shifts: np.ndarray
    pairs: np.ndarray
    sample_rate: float

    @property
    def max_shift(self) -> float:
        return float(np.max(np.abs(self.shifts))) if self.shifts.size else 0.0

    @cached_property
    def _stencils(self) -> dict:
        return {}

    def stencil(self, max_lag: int) -> tuple[np.ndarray, np.ndarray]:
        """Left neighbour index and blend weight for correlations of half-width ``max_lag``."""
        if max_lag not in self._stencils:
            pos = self.shifts + max_lag
            i0 = np.clip(np.floor(pos).astype(np.intp), 0, 2 * max_lag - 1)
            self._stencils[max_lag] = (i0, pos - i0)
        return self._stencils[max_lag]


def build_delay_table(grid: SphericalGrid, array: MicArray, sample_rate: float, pairs=None) -> DelayTable:
    """Evaluate the exact point-to-microphone delay difference at every grid point.

    ``pairs`` defaults to every pair ``a < b``; passing reversed rows
    yields the negated table.
    """
    if grid.radius <= array.circumradius:
        raise InvalidArgumentError(
            f"grid radius {grid.radius} m must exceed the array circumradius {array.circumradius:.4f} m"
        )
    if not sample_rate > 0:
        raise InvalidArgumentError(f"sample_rate must be positive, got {sample_rate}")
    pairs = pair_indices(array) if pairs is None else np.asarray(pairs, dtype=int)
    dist = np.linalg.norm(grid.points[:, None, :] - array.positions[None, :, :], axis=-1)
    shifts = (dist[:, pairs[:, 0]] - dist[:, pairs[:, 1]]).T * (sample_rate / array.speed_of_sound)
    return DelayTable(shifts, pairs, float(sample_rate))


@dataclass
class SrpMap:
    power: np.ndarray
    frames_accumulated: int = 0

    @classmethod
    def empty(cls, grid: SphericalGrid) -> "SrpMap":
        return cls(np.zeros(grid.size), 0)


def _correlation_matrix(correlations) -> np.ndarray:
    if isinstance(correlations, np.ndarray):
        return np.atleast_2d(np.asarray(correlations, dtype=float))
    return np.stack([c.values if isinstance(c, CorrelationFunction) else np.asarray(c, float) for c in correlations])


def accumulate_srp(correlations, table: DelayTable, srp_map: SrpMap, frames: int = 1) -> SrpMap:
    """Add the pair-summed, linearly interpolated correlations at every grid point.

    Parameters
    ----------
    correlations : sequence of CorrelationFunction or np.ndarray (P, 2L-1)
        One correlation per table pair, in table order.
    frames : int
        Number of frames folded into ``correlations``. Interpolation is
        linear, so summing per-frame correlations first and accumulating
        once gives the same map as accumulating frame by frame.
    """
    corr = _correlation_matrix(correlations)
    n_pairs = table.shifts.shape[0]
    if corr.shape[0] != n_pairs:
        raise InvalidArgumentError(f"expected {n_pairs} pair correlations, got {corr.shape[0]}")
    max_lag = (corr.shape[1] - 1) // 2
    if table.max_shift > max_lag:
        raise InvalidArgumentError(
            f"correlation half-width {max_lag} does not cover delay-table shift {table.max_shift:.3f}"
        )
    i0, frac = table.stencil(max_lag)
    left = np.take_along_axis(corr, i0, axis=1)
    right = np.take_along_axis(corr, i0 + 1, axis=1)
    contribution = ((1.0 - frac) * left + frac * right).sum(axis=0)
    return SrpMap(srp_map.power + contribution, srp_map.frames_accumulated + frames)


@dataclass(frozen=True)
class DoaEstimate:
    azimuth: float
    elevation: float
    power: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if not -90.0 <= self.elevation <= 90.0:
            raise InvalidArgumentError(f"elevation {self.elevation} outside [-90, 90]")
        object.__setattr__(self, "azimuth", wrap_degrees(self.azimuth))

    @property
    def direction(self) -> np.ndarray:
        return direction_vector(self.azimuth, self.elevation)

    def to_dict(self) -> dict:
        return {"azimuth": self.azimuth, "elevation": self.elevation, "power": self.power}


def angular_distance(a: DoaEstimate, b: DoaEstimate) -> float:
    """Great-circle angle between two directions, degrees in [0, 180]."""
    u, v = a.direction, b.direction
    return float(np.degrees(np.arctan2(np.linalg.norm(np.cross(u, v)), np.dot(u, v))))


def local_maxima(power: np.ndarray, grid: SphericalGrid) -> np.ndarray:
    """Flat indices that are no lower than any grid neighbour and above the map minimum."""
    power = np.asarray(power, dtype=float)
    nb = grid.neighbours
    best = np.full(power.shape, -np.inf)
    if len(nb):
        np.maximum.at(best, nb[:, 0], power[nb[:, 1]])
        np.maximum.at(best, nb[:, 1], power[nb[:, 0]])
    return np.flatnonzero((power >= best) & (power > power.min()))


def find_peaks(
    srp_map: SrpMap,
    grid: SphericalGrid,
    max_sources: int = DEFAULT_MAX_SOURCES,
    suppression_radius: float = DEFAULT_SUPPRESSION_RADIUS,
) -> list[DoaEstimate]:
    """Greedy peak picking with great-circle non-maximum suppression.

    Candidates are local maxima of the map, visited by descending power;
    a candidate is accepted unless it lies within ``suppression_radius``
    degrees of an already accepted peak. Returns at most ``max_sources``
    estimates, strongest first.
    """
    if max_sources < 1:
        raise InvalidArgumentError(f"max_sources must be >= 1, got {max_sources}")
    if not suppression_radius > 0:
        raise InvalidArgumentError(f"suppression_radius must be positive, got {suppression_radius}")
    power = np.asarray(srp_map.power, dtype=float)
    candidates = local_maxima(power, grid)
    # stable sort keeps lower flat index first among equal powers
    order = candidates[np.argsort(-power[candidates], kind="stable")]
    dirs = grid.directions
    cos_limit = math.cos(math.radians(suppression_radius))
    accepted: list[int] = []
    for g in order:
        if accepted and np.max(dirs[accepted] @ dirs[g]) > cos_limit:
            continue
        accepted.append(int(g))
        if len(accepted) == max_sources:
            break
    out = []
    for g in accepted:
        az, el = grid.angles(g)
        out.append(DoaEstimate(az, el, float(power[g])))
    return out


def srp_argmax(srp_map: SrpMap) -> int:
    return int(np.argmax(srp_map.power))

"""WAV, CSV and JSON readers/writers for scenes, SRP maps and trajectories."""

from __future__ import annotations

import csv
import json

import numpy as np
from scipy.io import wavfile

from .errors import InvalidArgumentError
from .srp_grid import SphericalGrid, SrpMap

_PCM16_SCALE = 32768.0


def write_wav(path, samples, sample_rate: float) -> float:
    """Write (n_channels, n_samples) floats in [-1, 1] as 16-bit PCM.

    Returns the fraction of samples that had to be clipped.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    clipped = float(np.mean(np.abs(x) > 1.0)) if x.size else 0.0
    pcm = np.clip(np.round(x * _PCM16_SCALE), -32768, 32767).astype("<i2")
    wavfile.write(str(path), int(round(sample_rate)), pcm.T)
    return clipped


def read_wav(path) -> tuple[np.ndarray, float]:
    """Return ``(samples, sample_rate)`` with samples shaped (n_channels, n_samples)."""
    rate, data = wavfile.read(str(path))
    if data.dtype == np.int16:
        x = data.astype(float) / _PCM16_SCALE
    elif data.dtype == np.int32:
        x = data.astype(float) / 2.0**31
    elif data.dtype == np.uint8:
        x = (data.astype(float) - 128.0) / 128.0
    elif np.issubdtype(data.dtype, np.floating):
        x = data.astype(float)
    else:
        raise InvalidArgumentError(f"unsupported WAV sample type {data.dtype}")
    if x.ndim == 1:
        x = x[:, None]
    return np.ascontiguousarray(x.T), float(rate)


def write_srp_csv(path, srp_map: SrpMap, grid: SphericalGrid) -> None:
    """One row per grid point in flat-index order."""
    n_el, n_az = grid.shape
    el = np.repeat(grid.elevations, n_az)
    az = np.tile(grid.azimuths, n_el)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["elevation_deg", "azimuth_deg", "power"])
        for row in zip(el, az, srp_map.power):
            w.writerow([f"{row[0]:g}", f"{row[1]:g}", repr(float(row[2]))])


def read_srp_csv(path) -> np.ndarray:
    """(G, 3) array of elevation, azimuth, power."""
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def write_rows_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


def write_json(path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)

"""
Framing and cross-correlation of microphone channels.

Lag convention: a correlation value at lag ``k`` is the literal sum
``R[k] = sum_n x1[n] * x2[n + k]``. When ``x2`` is a copy of ``x1`` delayed
by ``s`` samples the peak sits at ``k = +s``. Every routine here, time
domain or frequency domain, follows this convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from .errors import AmbiguousPeakError, InvalidArgumentError, LagOutOfRangeError

DEFAULT_SAMPLE_RATE = 16000.0
DEFAULT_FRAME_LENGTH = 1024
DEFAULT_HOP = 512
DEFAULT_WINDOW = "hann"

# relative to the largest cross-spectrum magnitude in the frame
DEFAULT_RELATIVE_REGULARIZATION = 1e-12


@dataclass(frozen=True, eq=False)
class SignalFrame:
    samples: np.ndarray
    sample_rate: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise InvalidArgumentError("samples must be a non-empty 1D sequence")
        if not np.all(np.isfinite(samples)):
            raise InvalidArgumentError("samples must be finite")
        if not self.sample_rate > 0:
            raise InvalidArgumentError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size


@dataclass(frozen=True, eq=False)
class Spectrum:
    bins: np.ndarray
    frame_length: int
    sample_rate: float


@dataclass(frozen=True, eq=False)
class CorrelationFunction:
    """Correlation values for integer lags ``-(L-1) .. L-1``."""

    values: np.ndarray
    sample_rate: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size % 2 == 0:
            raise InvalidArgumentError("correlation must have odd length 2L-1")
        object.__setattr__(self, "values", values)

    @property
    def max_lag(self) -> int:
        return (self.values.size - 1) // 2

    @property
    def lags(self) -> np.ndarray:
        return np.arange(-self.max_lag, self.max_lag + 1)

    def __getitem__(self, lag: int) -> float:
        if abs(lag) > self.max_lag:
            raise LagOutOfRangeError(f"lag {lag} outside [-{self.max_lag}, {self.max_lag}]")
        return float(self.values[lag + self.max_lag])


def _check_pair(x1: SignalFrame, x2: SignalFrame) -> None:
    if len(x1) != len(x2):
        raise InvalidArgumentError(f"frame lengths differ: {len(x1)} vs {len(x2)}")
    if x1.sample_rate != x2.sample_rate:
        raise InvalidArgumentError(f"sample rates differ: {x1.sample_rate} vs {x2.sample_rate}")


def spectrum(frame: SignalFrame, n_fft: int | None = None) -> Spectrum:
    """One-sided transform of a frame, zero-padded to ``n_fft`` (default 2L)."""
    n_fft = 2 * len(frame) if n_fft is None else int(n_fft)
    return Spectrum(np.fft.rfft(frame.samples, n=n_fft), n_fft, frame.sample_rate)


def xcorr_time(x1: SignalFrame, x2: SignalFrame) -> CorrelationFunction:
    """Direct evaluation of ``sum_n x1[n] x2[n+k]`` over every lag.

    O(L^2); intended as the reference that the FFT path is checked against.
    """
    _check_pair(x1, x2)
    a, b = x1.samples, x2.samples
    n = a.size
    out = np.zeros(2 * n - 1)
    for k in range(-n + 1, n):
        if k >= 0:
            out[k + n - 1] = np.dot(a[: n - k], b[k:])
        else:
            out[k + n - 1] = np.dot(a[-k:], b[: n + k])
    return CorrelationFunction(out, x1.sample_rate)


def _lag_order(circular: np.ndarray, length: int) -> np.ndarray:
    # X1 * conj(X2) puts lag k at circular index -k; flip into R[k] order
    # for k = -(L-1) .. L-1.
    idx = -np.arange(-length + 1, length)
    return circular[..., idx % circular.shape[-1]]


def cross_power(X1: np.ndarray, X2: np.ndarray, phat: bool = True, regularization: float | None = None) -> np.ndarray:
    """Cross-power spectrum ``X1 conj(X2)``, optionally magnitude-normalised.

    ``regularization=None`` uses 1e-12 times the largest bin magnitude along
    the last axis. Bins with zero magnitude and zero regularization are set
    to zero instead of dividing 0 by 0.
    """
    cross = X1 * np.conj(X2)
    if not phat:
        return cross
    mag = np.abs(cross)
    if regularization is None:
        eps = DEFAULT_RELATIVE_REGULARIZATION * np.max(mag, axis=-1, keepdims=True)
    else:
        if regularization < 0:
            raise InvalidArgumentError(f"regularization must be >= 0, got {regularization}")
        eps = regularization
    denom = mag + eps
    with np.errstate(invalid="ignore", divide="ignore"):
        weighted = np.where(denom > 0, cross / np.where(denom > 0, denom, 1.0), 0.0)
    return weighted


def gcc_phat(
    x1: SignalFrame,
    x2: SignalFrame,
    regularization: float | None = None,
    phat: bool = True,
) -> CorrelationFunction:
    """Generalized cross-correlation with phase transform.

    Both frames are zero-padded to twice their length so the inverse
    transform gives the linear (not circular) correlation. With
    ``phat=False`` the magnitude normalisation is skipped and the result
    matches :func:`xcorr_time`.
    """
    _check_pair(x1, x2)
    n = len(x1)
    X1 = spectrum(x1).bins
    X2 = spectrum(x2).bins
    circ = np.fft.irfft(cross_power(X1, X2, phat, regularization), n=2 * n)
    return CorrelationFunction(_lag_order(circ, n), x1.sample_rate)


def gcc_phat_pairs(
    frames: np.ndarray,
    pairs: np.ndarray,
    regularization: float | None = None,
    phat: bool = True,
) -> np.ndarray:
    """Batched GCC-PHAT.

    Parameters
    ----------
    frames : np.ndarray (..., n_channels, L)
        Windowed frames; leading axes (e.g. frame index) are broadcast.
    pairs : np.ndarray (P, 2)
        Channel index pairs ``(i, j)``; each row yields ``gcc_phat(x_i, x_j)``.

    Returns
    -------
    np.ndarray (..., P, 2L-1)
        Correlation values in lag order ``-(L-1) .. L-1``.
    """
    frames = np.asarray(frames, dtype=float)
    n = frames.shape[-1]
    spec = np.fft.rfft(frames, n=2 * n, axis=-1)
    X1 = spec[..., pairs[:, 0], :]
    X2 = spec[..., pairs[:, 1], :]
    circ = np.fft.irfft(cross_power(X1, X2, phat, regularization), n=2 * n, axis=-1)
    return _lag_order(circ, n)


def tdoa_from_correlation(corr: CorrelationFunction) -> float:
    """Lag of the global maximum, in seconds.

    Ties go to the smallest ``|lag|``, then to the negative lag.
    """
    values = corr.values
    if values.size == 0:
        raise InvalidArgumentError("empty correlation")
    if np.all(values == values[0]):
        raise AmbiguousPeakError("correlation is constant; no unique peak")
    lags = corr.lags
    tied = lags[values == values.max()]
    best = min(tied, key=lambda k: (abs(k), k))
    return float(best) / corr.sample_rate


def interpolate_correlation(corr: CorrelationFunction, lag: float) -> float:
    """Linear interpolation of the correlation at a fractional lag."""
    m = corr.max_lag
    if not (-m <= lag <= m) or math.isnan(lag):
        raise LagOutOfRangeError(f"lag {lag} outside [-{m}, {m}]")
    pos = lag + m
    i0 = min(int(math.floor(pos)), corr.values.size - 2) if corr.values.size > 1 else 0
    frac = pos - i0
    if frac == 0 or corr.values.size == 1:
        return float(corr.values[i0])
    return float((1.0 - frac) * corr.values[i0] + frac * corr.values[i0 + 1])


def make_window(window, frame_length: int) -> np.ndarray:
    """Analysis taper; accepts scipy window names or ``"rect"``/``"rectangular"``."""
    if window is None or window in ("rect", "rectangular", "boxcar", "none"):
        return np.ones(frame_length)
    return get_window(window, frame_length, fftbins=True)


def frame_stream(
    samples,
    frame_length: int = DEFAULT_FRAME_LENGTH,
    hop: int = DEFAULT_HOP,
    window="hann",
) -> np.ndarray:
    """Cut a multichannel signal into windowed, hop-advanced frames.

    Parameters
    ----------
    samples : array_like (n_channels, n_samples)
    frame_length, hop : int
        ``frame_length >= 2`` and ``0 < hop <= frame_length``.
    window : str or None
        Taper applied to every frame.

    Returns
    -------
    np.ndarray (n_frames, n_channels, frame_length)
        The trailing partial frame is dropped; fewer samples than one frame
        gives ``n_frames == 0``.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if frame_length < 2:
        raise InvalidArgumentError(f"frame_length must be >= 2, got {frame_length}")
    if not 0 < hop <= frame_length:
        raise InvalidArgumentError(f"hop must be in (0, frame_length], got {hop}")
    n_ch, n = x.shape
    if n < frame_length:
        return np.zeros((0, n_ch, frame_length))
    n_frames = (n - frame_length) // hop + 1
    view = np.lib.stride_tricks.sliding_window_view(x, frame_length, axis=1)[:, ::hop][:, :n_frames]
    return np.transpose(view, (1, 0, 2)) * make_window(window, frame_length)

"""Autocorrelation pitch tracking and frame-level RMS energy."""

from __future__ import annotations

import math

import numpy as np

FRAME_PERIOD = 0.010
WINDOW = 0.040
F_MIN = 60.0
F_MAX = 400.0
VOICING_THRESHOLD = 0.45


def n_frames_for(n_samples: int, sample_rate: int,
                 frame_period: float = FRAME_PERIOD) -> int:
    return int(math.ceil(n_samples / sample_rate / frame_period))


def _frames(samples: np.ndarray, sample_rate: int, frame_period: float,
            window: float) -> np.ndarray:
    """Windows centered on the frame grid, zero-padded at the edges."""
    win_len = int(round(window * sample_rate))
    hop = frame_period * sample_rate
    n = n_frames_for(len(samples), sample_rate, frame_period)
    out = np.zeros((n, win_len))
    half = win_len // 2
    for i in range(n):
        center = int(round(i * hop))
        lo = center - half
        hi = lo + win_len
        src_lo = max(lo, 0)
        src_hi = min(hi, len(samples))
        if src_hi > src_lo:
            out[i, src_lo - lo:src_hi - lo] = samples[src_lo:src_hi]
    return out


def extract_f0(samples: np.ndarray, sample_rate: int,
               frame_period: float = FRAME_PERIOD,
               window: float = WINDOW,
               f_min: float = F_MIN,
               f_max: float = F_MAX,
               voicing_threshold: float = VOICING_THRESHOLD) -> np.ndarray:
    """Per-frame f0 in Hz; 0 marks unvoiced frames.

    Voicing requires the peak of the normalized autocorrelation in the lag
    search range to reach `voicing_threshold`.  The peak lag is refined by
    parabolic interpolation.
    """
    if sample_rate < 8000:
        raise ValueError("sample rate %d < 8 kHz" % sample_rate)
    frames = _frames(samples, sample_rate, frame_period, window)
    hann = np.hanning(frames.shape[1])
    lag_min = max(2, int(math.floor(sample_rate / f_max)))
    lag_max = int(math.ceil(sample_rate / f_min))
    f0 = np.zeros(frames.shape[0])
    for i, frame in enumerate(frames):
        x = (frame - frame.mean()) * hann
        r = np.correlate(x, x, mode="full")[len(x) - 1:]
        if r[0] <= 1e-12 or lag_max >= len(r) - 1:
            continue
        r = r / r[0]
        seg = r[lag_min:lag_max + 1]
        k = int(np.argmax(seg)) + lag_min
        if r[k] < voicing_threshold:
            continue
        # parabolic refinement of the peak lag
        y0, y1, y2 = r[k - 1], r[k], r[k + 1]
        denom = y0 - 2 * y1 + y2
        lag = k + (0.5 * (y0 - y2) / denom if abs(denom) > 1e-12 else 0.0)
        if lag > 0:
            f0[i] = sample_rate / lag
    return f0


def extract_energy(samples: np.ndarray, sample_rate: int,
                   frame_period: float = FRAME_PERIOD,
                   window: float = WINDOW) -> np.ndarray:
    """Per-frame RMS energy (linear)."""
    frames = _frames(samples, sample_rate, frame_period, window)
    return np.sqrt(np.mean(frames ** 2, axis=1))

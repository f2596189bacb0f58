"""Continuous wavelet transform (Ricker mother wavelet) and the tracing of
lines of maximum amplitude across scales."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SignalTooShort

SCALE_MIN = 0.08   # seconds
SCALE_MAX = 1.28
VOICES_PER_OCTAVE = 2
SUPPORT = 5.0      # kernel half-width in units of the scale


def ricker(t: np.ndarray) -> np.ndarray:
    """Mexican-hat wavelet: (2 / (sqrt(3) pi^(1/4))) (1 - t^2) exp(-t^2 / 2)."""
    t = np.asarray(t, dtype=np.float64)
    return (2.0 / (math.sqrt(3.0) * math.pi ** 0.25)) * (1.0 - t ** 2) \
        * np.exp(-(t ** 2) / 2.0)


def dyadic_scales(start: float = SCALE_MIN, stop: float = SCALE_MAX,
                  voices: int = VOICES_PER_OCTAVE) -> list[float]:
    scales = []
    i = 0
    while True:
        s = start * 2.0 ** (i / voices)
        if s > stop * (1 + 1e-9):
            break
        scales.append(s)
        i += 1
    return scales


@dataclass
class CwtMatrix:
    scales: list[float]          # seconds, ascending
    coefficients: np.ndarray     # shape (len(scales), n_frames)
    frame_period: float


def cwt_ricker(signal: np.ndarray, scales: list[float],
               frame_period: float) -> CwtMatrix:
    """CWT via direct convolution with L1-normalized kernels.

    Edges use reflected padding so coefficients are defined on the full
    frame grid.
    """
    signal = np.asarray(signal, dtype=np.float64)
    n = len(signal)
    if not scales:
        raise ValueError("need at least one scale")
    rows = []
    for scale in sorted(scales):
        scale_frames = scale / frame_period
        half = int(math.ceil(SUPPORT * scale_frames))
        if half > n - 1:
            raise SignalTooShort(
                "signal of %d frames shorter than support of scale %.3g s"
                % (n, scale))
        t = np.arange(-half, half + 1) / scale_frames
        kernel = ricker(t)
        kernel /= np.sum(np.abs(kernel))
        padded = np.pad(signal, half, mode="reflect")
        rows.append(np.convolve(padded, kernel, mode="valid"))
    return CwtMatrix(sorted(scales), np.vstack(rows), frame_period)


def _local_maxima(row: np.ndarray) -> np.ndarray:
    """Indices of strict positive local maxima."""
    if len(row) < 3:
        return np.array([], dtype=int)
    inner = (row[1:-1] > row[:-2]) & (row[1:-1] > row[2:]) & (row[1:-1] > 0)
    return np.nonzero(inner)[0] + 1


def trace_loma(cwt: CwtMatrix) -> list[list[tuple[int, int]]]:
    """Trace lines of maximum amplitude from the largest scale down.

    Each line starts at a local maximum of the largest scale and continues at
    every smaller scale to the nearest local maximum within +/- half that
    scale's width (in frames); lines that lose their maximum are dropped.
    Returns lines as [(scale_index, frame_index), ...] ordered large -> small.
    """
    coeffs = cwt.coefficients
    n_scales = coeffs.shape[0]
    maxima = [_local_maxima(coeffs[s]) for s in range(n_scales)]
    lines: list[list[tuple[int, int]]] = []
    for start in maxima[n_scales - 1]:
        line = [(n_scales - 1, int(start))]
        pos = int(start)
        alive = True
        for s in range(n_scales - 2, -1, -1):
            window = max(1, int(round(cwt.scales[s] / cwt.frame_period / 2)))
            cand = maxima[s]
            if len(cand) == 0:
                alive = False
                break
            dist = np.abs(cand - pos)
            j = int(np.argmin(dist))
            if dist[j] > window:
                alive = False
                break
            pos = int(cand[j])
            line.append((s, pos))
        if alive:
            lines.append(line)
    return lines


def line_amplitude(cwt: CwtMatrix, line: list[tuple[int, int]]) -> float:
    return float(sum(cwt.coefficients[s, f] for s, f in line))

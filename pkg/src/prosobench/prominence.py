"""Word-level prosodic prominence scores.

f0, energy and a word-duration signal are z-scored, fused into one composite
curve, decomposed with a Ricker CWT, and lines of maximum amplitude are traced
across scales; a word's score is the largest line amplitude ending inside it.
Scores at or above the threshold (default 1.25) yield the prominent label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import pitch
from .corpus import Recording, WordToken
from .errors import AlignmentError, ParseError
from .histogram import HistogramReport, make_histogram
from .wavelet import CwtMatrix, cwt_ricker, dyadic_scales, line_amplitude, trace_loma

THETA_PROMINENCE = 1.25
SMOOTH_WINDOW = 0.050  # seconds, moving average applied to the composite


@dataclass
class AcousticTrack:
    frame_period: float
    f0: np.ndarray       # Hz, 0 = unvoiced
    energy: np.ndarray   # linear RMS
    n_frames: int

    def duration(self) -> float:
        return self.n_frames * self.frame_period


@dataclass
class CompositeSignal:
    frames: np.ndarray
    components: dict[str, np.ndarray] = field(default_factory=dict)


@dataclass(frozen=True)
class ProminenceRecord:
    recording_id: str
    token: WordToken
    score: float
    label: bool


def track_from_audio(samples: np.ndarray, sample_rate: int,
                     frame_period: float = pitch.FRAME_PERIOD,
                     **tracker_kwargs) -> AcousticTrack:
    f0 = pitch.extract_f0(samples, sample_rate, frame_period, **tracker_kwargs)
    energy = pitch.extract_energy(samples, sample_rate, frame_period)
    return AcousticTrack(frame_period, f0, energy, len(f0))


# precomputed-feature ingestion: `frame f0_hz energy` TSV

def track_to_tsv(track: AcousticTrack) -> str:
    lines = ["frame\tf0_hz\tenergy"]
    for i in range(track.n_frames):
        lines.append("%d\t%.6f\t%.8f" % (i, track.f0[i], track.energy[i]))
    return "\n".join(lines) + "\n"


def track_from_tsv(text: str, frame_period: float = pitch.FRAME_PERIOD) -> AcousticTrack:
    lines = text.splitlines()
    if not lines or lines[0].split("\t") != ["frame", "f0_hz", "energy"]:
        raise ParseError("bad track TSV header")
    f0 = []
    energy = []
    for row, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise ParseError("row %d: expected 3 columns" % row)
        try:
            f0.append(float(cols[1]))
            energy.append(float(cols[2]))
        except ValueError:
            raise ParseError("row %d: unparsable value" % row)
    return AcousticTrack(frame_period, np.array(f0), np.array(energy), len(f0))


# ---------------------------------------------------------------------------
# composite signal

def _zscore(x: np.ndarray) -> np.ndarray:
    sd = float(np.std(x))
    if sd < 1e-12:
        return np.zeros_like(x)
    return (x - np.mean(x)) / sd


def _interpolate_f0_semitones(f0: np.ndarray) -> np.ndarray:
    voiced = f0 > 0
    if not voiced.any():
        return np.zeros_like(f0)
    st = np.zeros_like(f0)
    st[voiced] = 12.0 * np.log2(f0[voiced] / 100.0)
    idx = np.arange(len(f0))
    return np.interp(idx, idx[voiced], st[voiced])


def _smooth(x: np.ndarray, frame_period: float) -> np.ndarray:
    k = max(1, int(round(SMOOTH_WINDOW / frame_period)))
    if k == 1 or len(x) < 2:
        return x
    k = min(k, len(x))
    pad = k // 2
    padded = np.pad(x, (pad, k - 1 - pad), mode="reflect")
    return np.convolve(padded, np.ones(k) / k, mode="valid")


def compute_composite(track: AcousticTrack,
                      tokens: Sequence[WordToken]) -> CompositeSignal:
    fp = track.frame_period
    total = track.duration()
    dur_signal = np.zeros(track.n_frames)
    for tok in tokens:
        if tok.t_end > total + fp + 1e-9:
            raise AlignmentError("token %r [%g, %g] outside track of %g s"
                                 % (tok.orthography, tok.t_start, tok.t_end, total))
        lo = max(0, int(math.floor(tok.t_start / fp)))
        hi = min(track.n_frames, int(math.ceil(tok.t_end / fp)))
        dur_signal[lo:hi] = np.maximum(dur_signal[lo:hi], tok.duration)

    f0_z = _zscore(_interpolate_f0_semitones(track.f0))
    energy_z = _zscore(np.log(np.maximum(track.energy, 1e-10)))
    dur_z = _zscore(dur_signal)
    composite = _smooth((f0_z + energy_z + dur_z) / 3.0, fp)
    return CompositeSignal(composite, {"f0": f0_z, "energy": energy_z,
                                       "duration": dur_z})


# ---------------------------------------------------------------------------
# scoring

def compute_cwt(composite: CompositeSignal, frame_period: float,
                scales: Optional[list[float]] = None) -> CwtMatrix:
    return cwt_ricker(composite.frames, scales or dyadic_scales(), frame_period)


def word_prominence_scores(cwt: CwtMatrix,
                           tokens: Sequence[WordToken],
                           recording_id: str = "",
                           theta: float = THETA_PROMINENCE) -> list[ProminenceRecord]:
    """Assign each traced line's amplitude to the word containing its
    smallest-scale endpoint; a word's score is the max over its lines."""
    scores = {id(tok): 0.0 for tok in tokens}
    for line in trace_loma(cwt):
        _, frame = line[-1]  # smallest-scale endpoint
        t = (frame + 0.5) * cwt.frame_period
        for tok in tokens:
            if tok.t_start <= t < tok.t_end:
                amp = line_amplitude(cwt, line)
                scores[id(tok)] = max(scores[id(tok)], amp)
                break
    return [ProminenceRecord(recording_id, tok, scores[id(tok)],
                             scores[id(tok)] >= theta)
            for tok in tokens]


def score_recording(track: AcousticTrack, recording: Recording,
                    theta: float = THETA_PROMINENCE,
                    scales: Optional[list[float]] = None) -> list[ProminenceRecord]:
    tokens = list(recording.tokens())
    composite = compute_composite(track, tokens)
    cwt = compute_cwt(composite, track.frame_period, scales)
    return word_prominence_scores(cwt, tokens, recording.id, theta)


def score_histogram(records: list[ProminenceRecord], width: float = 0.25,
                    lo: float = 0.0, hi: float = 6.0,
                    theta: float = THETA_PROMINENCE) -> HistogramReport:
    return make_histogram([r.score for r in records], width, lo, hi, theta)


def calibrate_threshold(scores: Sequence[float], target_rate: float) -> float:
    """Pick the threshold that labels closest to `target_rate` of the tokens.

    Provided because thresholds from other prominence implementations may not
    transfer exactly to this one.
    """
    if not 0.0 < target_rate < 1.0:
        raise ValueError("target rate must be in (0, 1)")
    ordered = np.sort(np.asarray(scores))[::-1]
    k = max(1, int(round(target_rate * len(ordered))))
    return float(ordered[min(k, len(ordered)) - 1])


def prominence_tsv(records: list[ProminenceRecord]) -> str:
    lines = ["speaker\tutt\tidx\tword\tscore\tlabel"]
    for r in records:
        t = r.token
        lines.append("%s\t%d\t%d\t%s\t%.6f\t%d"
                     % (t.speaker_id, t.utterance_index, t.token_index,
                        t.orthography, r.score, int(r.label)))
    return "\n".join(lines) + "\n"

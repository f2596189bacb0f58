"""Expected-duration models and binary speech-reduction labels.

The corpus is split into halves by recording; a duration model fitted on one
half predicts expected word durations on the other, and a token is labeled
reduced when actual/expected falls below the language threshold (strict `<`).
Both directions are run so every token in the corpus receives a label.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

import numpy as np

from .corpus import AlignedCorpus, WordToken
from .errors import FitError, MissingAnnotation, SplitError
from .histogram import HistogramReport, make_histogram

THETA_DEFAULTS = {"en": 0.5, "fr": 0.5, "zh": 0.6}

SYLLABLE_CLAMP = 0.02  # floor (s) on per-syllable OLS predictions


@dataclass
class SegmentDurationTable:
    means: dict[str, float]
    counts: dict[str, int]
    fallback_mean: float

    def to_json(self) -> dict:
        return {"kind": "segment_table",
                "means": self.means,
                "counts": self.counts,
                "fallback_mean": self.fallback_mean}


@dataclass
class SyllableDurationModel:
    coefficients: dict[str, float]
    intercept: float
    training_mse: float
    degenerate: bool = False   # True when OLS fell back to per-label mean sums
    fallback_coefficient: float = 0.0

    def predict_syllable(self, labels: list[str]) -> float:
        pred = self.intercept
        for lab in labels:
            pred += self.coefficients.get(lab, self.fallback_coefficient)
        return max(pred, SYLLABLE_CLAMP)

    def to_json(self) -> dict:
        return {"kind": "syllable_model",
                "coefficients": self.coefficients,
                "intercept": self.intercept,
                "training_mse": self.training_mse,
                "degenerate": self.degenerate,
                "fallback_coefficient": self.fallback_coefficient}


DurationModel = Union[SegmentDurationTable, SyllableDurationModel]


def model_from_json(data: dict) -> DurationModel:
    if data["kind"] == "segment_table":
        return SegmentDurationTable(data["means"], data["counts"],
                                    data["fallback_mean"])
    return SyllableDurationModel(data["coefficients"], data["intercept"],
                                 data["training_mse"], data["degenerate"],
                                 data["fallback_coefficient"])


# ---------------------------------------------------------------------------
# corpus halving

class SplitResult(NamedTuple):
    first: AlignedCorpus
    second: AlignedCorpus
    imbalance: float  # |tokens(first) - tokens(second)| / total


_EXHAUSTIVE_LIMIT = 16


def split_halves(corpus: AlignedCorpus, seed: int = 0) -> SplitResult:
    """Deterministic split by recording, minimizing token-count imbalance.

    Up to 16 recordings the optimal partition is found by exhaustive search
    (ties broken by recording-id set); beyond that a greedy largest-first
    assignment with seeded tie shuffling is used.
    """
    recs = corpus.recordings
    if len(recs) < 2:
        raise SplitError("need >= 2 recordings to split, got %d" % len(recs))
    counts = [rec.n_tokens() for rec in recs]
    total = sum(counts)

    if len(recs) <= _EXHAUSTIVE_LIMIT:
        best_mask = None
        best_key = None
        n = len(recs)
        # recording 0 pinned to the first half; mask enumerates the rest
        for bits in range(2 ** (n - 1)):
            mask = [True] + [bool(bits >> i & 1) for i in range(n - 1)]
            if all(mask) or not any(mask):
                continue
            tok_a = sum(c for c, m in zip(counts, mask) if m)
            ids_a = tuple(sorted(r.id for r, m in zip(recs, mask) if m))
            key = (abs(total - 2 * tok_a), ids_a)
            if best_key is None or key < best_key:
                best_key = key
                best_mask = mask
        mask = best_mask
    else:
        order = sorted(range(len(recs)), key=lambda i: (-counts[i], recs[i].id))
        rng = random.Random(seed)
        # shuffle runs of equal-count recordings so the seed matters only
        # where the outcome is genuinely arbitrary
        shuffled = []
        for _, group in itertools.groupby(order, key=lambda i: counts[i]):
            group = list(group)
            rng.shuffle(group)
            shuffled.extend(group)
        mask = [False] * len(recs)
        tok_a = tok_b = 0
        for i in shuffled:
            if tok_a <= tok_b:
                mask[i] = True
                tok_a += counts[i]
            else:
                tok_b += counts[i]

    first = tuple(r for r, m in zip(recs, mask) if m)
    second = tuple(r for r, m in zip(recs, mask) if not m)
    tok_a = sum(r.n_tokens() for r in first)
    imbalance = abs(total - 2 * tok_a) / total if total else 0.0
    return SplitResult(AlignedCorpus(corpus.language, first),
                       AlignedCorpus(corpus.language, second),
                       imbalance)


# ---------------------------------------------------------------------------
# model fitting

def fit_segment_table(half: AlignedCorpus) -> SegmentDurationTable:
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    grand = 0.0
    n = 0
    for tok in half.tokens():
        for seg in tok.segments:
            sums[seg.label] = sums.get(seg.label, 0.0) + seg.duration
            counts[seg.label] = counts.get(seg.label, 0) + 1
            grand += seg.duration
            n += 1
    if n == 0:
        raise FitError("no segments in corpus half")
    means = {lab: sums[lab] / counts[lab] for lab in sums}
    return SegmentDurationTable(means, counts, grand / n)


def _mean_sum_fallback(syllables) -> SyllableDurationModel:
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for syl in syllables:
        for seg in syl.segments:
            sums[seg.label] = sums.get(seg.label, 0.0) + seg.duration
            counts[seg.label] = counts.get(seg.label, 0) + 1
    coeffs = {lab: sums[lab] / counts[lab] for lab in sums}
    fallback = sum(sums.values()) / max(sum(counts.values()), 1)
    preds = [sum(coeffs[s.label] for s in syl.segments) for syl in syllables]
    mse = float(np.mean([(p - syl.duration) ** 2
                         for p, syl in zip(preds, syllables)]))
    return SyllableDurationModel(coeffs, 0.0, mse, degenerate=True,
                                 fallback_coefficient=fallback)


def fit_syllable_model(half: AlignedCorpus) -> SyllableDurationModel:
    """OLS of syllable duration on the syllable's phone-label count vector."""
    syllables = [syl for tok in half.tokens()
                 if tok.syllables is not None for syl in tok.syllables]
    if not syllables:
        raise FitError("no syllable annotations in corpus half")
    labels = sorted({seg.label for syl in syllables for seg in syl.segments})
    col = {lab: i for i, lab in enumerate(labels)}
    X = np.zeros((len(syllables), len(labels) + 1))
    X[:, -1] = 1.0
    y = np.empty(len(syllables))
    for i, syl in enumerate(syllables):
        for seg in syl.segments:
            X[i, col[seg.label]] += 1.0
        y[i] = syl.duration
    if np.linalg.matrix_rank(X) < X.shape[1]:
        return _mean_sum_fallback(syllables)
    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = X @ beta - y
    coeffs = {lab: float(beta[col[lab]]) for lab in labels}
    return SyllableDurationModel(coeffs, float(beta[-1]),
                                 float(np.mean(resid ** 2)),
                                 fallback_coefficient=float(np.mean(beta[:-1])))


def expected_duration(token: WordToken, model: DurationModel) -> float:
    if isinstance(model, SegmentDurationTable):
        if not token.segments:
            raise MissingAnnotation("token %r has no segments" % token.orthography)
        return sum(model.means.get(seg.label, model.fallback_mean)
                   for seg in token.segments)
    if token.syllables is None or not token.syllables:
        raise MissingAnnotation("token %r has no syllables" % token.orthography)
    return sum(model.predict_syllable([seg.label for seg in syl.segments])
               for syl in token.syllables)


# ---------------------------------------------------------------------------
# labeling

@dataclass(frozen=True)
class ReductionRecord:
    recording_id: str
    token: WordToken
    actual: float
    expected: float
    ratio: float
    label: bool


@dataclass
class LabelingResult:
    records: list[ReductionRecord]
    excluded: list[str] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def label_half(half: AlignedCorpus, model: DurationModel, theta: float,
               result: LabelingResult) -> None:
    for rec in half.recordings:
        for tok in rec.tokens():
            try:
                expected = expected_duration(tok, model)
            except MissingAnnotation as exc:
                result.excluded.append(str(exc))
                continue
            if expected <= 0:
                result.excluded.append(
                    "token %r: nonpositive expected duration %g"
                    % (tok.orthography, expected))
                continue
            ratio = tok.duration / expected
            result.records.append(ReductionRecord(
                rec.id, tok, tok.duration, expected, ratio, ratio < theta))


def label_reductions(corpus: AlignedCorpus,
                     variant: str = "segment",
                     theta: Optional[float] = None,
                     seed: int = 0) -> LabelingResult:
    """Split, fit in both directions, and label every token in the corpus.

    variant: "segment" (sum of per-phone mean durations, English-style) or
    "syllable" (per-syllable OLS, French/Mandarin-style).
    """
    if theta is None:
        theta = THETA_DEFAULTS.get(corpus.language, 0.5)
    fit = fit_segment_table if variant == "segment" else fit_syllable_model
    half_a, half_b, imbalance = split_halves(corpus, seed)
    result = LabelingResult([], metadata={
        "variant": variant, "theta": theta, "seed": seed,
        "imbalance": imbalance,
        "half_a": [r.id for r in half_a.recordings],
        "half_b": [r.id for r in half_b.recordings],
    })
    label_half(half_b, fit(half_a), theta, result)
    label_half(half_a, fit(half_b), theta, result)
    order = {rec.id: i for i, rec in enumerate(corpus.recordings)}
    result.records.sort(key=lambda r: (order[r.recording_id],
                                       r.token.utterance_index,
                                       r.token.token_index))
    return result


def ratio_histogram(records: list[ReductionRecord], width: float = 0.05,
                    lo: float = 0.0, hi: float = 3.0,
                    theta: float = 0.5) -> HistogramReport:
    return make_histogram([r.ratio for r in records], width, lo, hi, theta)


def reduction_tsv(records: list[ReductionRecord]) -> str:
    lines = ["speaker\tutt\tidx\tword\tactual\texpected\tratio\tlabel"]
    for r in records:
        t = r.token
        lines.append("%s\t%d\t%d\t%s\t%.6f\t%.6f\t%.6f\t%d"
                     % (t.speaker_id, t.utterance_index, t.token_index,
                        t.orthography, r.actual, r.expected, r.ratio,
                        int(r.label)))
    return "\n".join(lines) + "\n"


def model_to_json_str(model: DurationModel, metadata: Optional[dict] = None) -> str:
    data = model.to_json()
    if metadata:
        data["metadata"] = metadata
    return json.dumps(data, indent=2, sort_keys=True) + "\n"

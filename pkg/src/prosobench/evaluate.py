"""Scoring and analysis of prediction files against gold benchmarks.

Token-level positive-class F1 (B and I collapsed) per speaker fold, Monte
Carlo random baselines, surprisal-label point-biserial correlations, winner
tables with paired bootstrap significance, word-level rate differences and
frequency curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .benchset import BioDataset, FoldAssignment, Provenance
from .corpus import normalize_word
from .errors import AlignmentError, ParseError, UndefinedCorrelation

POSITIVE_TAGS = ("B", "I")


def is_positive(tag: str) -> bool:
    return tag in POSITIVE_TAGS


# ---------------------------------------------------------------------------
# prediction files

@dataclass
class PredictionSet:
    task: str
    model_name: str
    tokens: list[tuple[Provenance, str, str]]  # (provenance, word, tag)


def parse_prediction_tsv(text: str, task: str = "",
                         model_name: str = "") -> PredictionSet:
    """Parse `speaker utt idx word tag` rows, or the subword variant
    `speaker utt idx word subword_index tag` (collapsed by majority vote,
    ties counting as positive)."""
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty prediction file")
    header = lines[0].split("\t")
    if header == ["speaker", "utt", "idx", "word", "tag"]:
        subword = False
    elif header == ["speaker", "utt", "idx", "word", "subword_index", "tag"]:
        subword = True
    else:
        raise ParseError("bad prediction TSV header: %r" % lines[0])

    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != len(header):
            raise ParseError("expected %d columns" % len(header), line=lineno)
        try:
            prov = (cols[0], int(cols[1]), int(cols[2]))
        except ValueError:
            raise ParseError("unparsable provenance", line=lineno)
        rows.append((prov, cols[3], cols[-1]))

    if subword:
        rows = collapse_subwords(rows)
    return PredictionSet(task, model_name, rows)


def collapse_subwords(rows: list[tuple[Provenance, str, str]]
                      ) -> list[tuple[Provenance, str, str]]:
    """Majority vote among a word's subword tags; ties classify as positive."""
    grouped: dict[Provenance, list[tuple[str, str]]] = {}
    order: list[Provenance] = []
    for prov, word, tag in rows:
        if prov not in grouped:
            grouped[prov] = []
            order.append(prov)
        grouped[prov].append((word, tag))
    out = []
    for prov in order:
        parts = grouped[prov]
        pos = sum(is_positive(tag) for _, tag in parts)
        label = pos * 2 >= len(parts)
        out.append((prov, parts[0][0], "B" if label else "O"))
    return out


def gold_tokens(dataset: BioDataset) -> list[tuple[Provenance, str, str]]:
    return [(prov, word, tag)
            for sent in dataset.sentences
            for prov, word, tag in zip(sent.provenance, sent.tokens, sent.tags)]


# ---------------------------------------------------------------------------
# F1 scoring

@dataclass
class FoldScore:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int


@dataclass
class EvalReport:
    task: str
    model_name: str
    per_fold: dict[int, FoldScore]
    baseline_f1: Optional[float] = None

    def _agg(self, attr: str) -> tuple[float, float]:
        vals = [getattr(s, attr) for _, s in sorted(self.per_fold.items())]
        mean = float(np.mean(vals))
        sd = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
        return mean, sd

    @property
    def mean_f1(self) -> float:
        return self._agg("f1")[0]

    def fold_f1s(self) -> list[float]:
        return [s.f1 for _, s in sorted(self.per_fold.items())]

    def to_json(self) -> dict:
        data = {
            "task": self.task,
            "model": self.model_name,
            "per_fold": {str(k): vars(s) for k, s in sorted(self.per_fold.items())},
        }
        for attr in ("f1", "precision", "recall"):
            mean, sd = self._agg(attr)
            data[attr] = {"mean": mean, "sd": sd,
                          "display": format_mean_sd(mean, sd)}
        if self.baseline_f1 is not None:
            data["baseline_f1"] = self.baseline_f1
        return data

    def to_text(self) -> str:
        lines = ["task=%s model=%s" % (self.task, self.model_name)]
        for k, s in sorted(self.per_fold.items()):
            lines.append("fold %d: P=%.3f R=%.3f F1=%.3f (tp=%d fp=%d fn=%d)"
                         % (k, s.precision, s.recall, s.f1, s.tp, s.fp, s.fn))
        for attr, name in (("f1", "F1"), ("precision", "Precision"),
                           ("recall", "Recall")):
            mean, sd = self._agg(attr)
            lines.append("%s: %s" % (name, format_mean_sd(mean, sd)))
        return "\n".join(lines) + "\n"


def format_mean_sd(mean: float, sd: float) -> str:
    """Render aggregates like '.442 (.014)'."""

    def strip(x: float) -> str:
        s = "%.3f" % x
        return s[1:] if s.startswith("0.") else s

    return "%s (%s)" % (strip(mean), strip(sd))


def _prf(tp: int, fp: int, fn: int) -> FoldScore:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return FoldScore(p, r, f1, tp, fp, fn)


def check_alignment(gold: Sequence[tuple[Provenance, str, str]],
                    pred: Sequence[tuple[Provenance, str, str]]) -> None:
    if len(gold) != len(pred):
        raise AlignmentError("gold has %d tokens, predictions have %d"
                             % (len(gold), len(pred)))
    for i, (g, p) in enumerate(zip(gold, pred)):
        if g[0] != p[0]:
            raise AlignmentError("provenance mismatch at token %d: gold %r vs "
                                 "prediction %r" % (i, g[0], p[0]))


def score(gold: BioDataset, pred: PredictionSet,
          folds: Optional[FoldAssignment] = None) -> EvalReport:
    gtoks = gold_tokens(gold)
    check_alignment(gtoks, pred.tokens)
    counts: dict[int, list[int]] = {}
    for (prov, _, gtag), (_, _, ptag) in zip(gtoks, pred.tokens):
        fold = folds.fold_of(prov[0]) if folds is not None else 0
        tp_fp_fn = counts.setdefault(fold, [0, 0, 0])
        g, p = is_positive(gtag), is_positive(ptag)
        if g and p:
            tp_fp_fn[0] += 1
        elif p:
            tp_fp_fn[1] += 1
        elif g:
            tp_fp_fn[2] += 1
    per_fold = {k: _prf(*v) for k, v in counts.items()}
    return EvalReport(gold.task, pred.model_name, per_fold)


def random_baseline(positive_rate: float, n_tokens: int, n_trials: int = 100,
                    seed: int = 0) -> tuple[float, float]:
    """Monte Carlo F1 of rate-matched independent random predictions."""
    if not 0.0 < positive_rate < 1.0:
        raise ValueError("positive rate must be in (0, 1)")
    rng = np.random.default_rng(seed)
    f1s = np.empty(n_trials)
    for t in range(n_trials):
        g = rng.random(n_tokens) < positive_rate
        p = rng.random(n_tokens) < positive_rate
        tp = int(np.sum(g & p))
        fp = int(np.sum(~g & p))
        fn = int(np.sum(g & ~p))
        f1s[t] = _prf(tp, fp, fn).f1
    return float(np.mean(f1s)), float(np.std(f1s, ddof=1))


# ---------------------------------------------------------------------------
# surprisal-label correlation

@dataclass
class CorrelationReport:
    r: float
    ci_low: float
    ci_high: float
    n: int


def point_biserial(labels: np.ndarray, values: np.ndarray) -> float:
    """(mu1 - mu0) / sigma * sqrt(p (1 - p)); equals Pearson on the 0/1
    indicator."""
    labels = np.asarray(labels, dtype=bool)
    values = np.asarray(values, dtype=np.float64)
    sigma = float(np.std(values))
    if sigma < 1e-300:
        raise UndefinedCorrelation("surprisal values have zero variance")
    p = float(np.mean(labels))
    if p in (0.0, 1.0):
        raise UndefinedCorrelation("labels are constant")
    mu1 = float(np.mean(values[labels]))
    mu0 = float(np.mean(values[~labels]))
    return (mu1 - mu0) / sigma * math.sqrt(p * (1 - p))


def correlate_surprisal(labels: Sequence[bool], values: Sequence[float],
                        n_boot: int = 1000, seed: int = 0) -> CorrelationReport:
    labels = np.asarray(labels, dtype=bool)
    values = np.asarray(values, dtype=np.float64)
    r = point_biserial(labels, values)
    rng = np.random.default_rng(seed)
    n = len(labels)
    boots = []
    for _ in range(n_boot):
        idx = rng.integers(0, n, size=n)
        try:
            boots.append(point_biserial(labels[idx], values[idx]))
        except UndefinedCorrelation:
            continue
    lo, hi = np.percentile(boots, [2.5, 97.5]) if boots else (r, r)
    return CorrelationReport(r, float(lo), float(hi), n)


# ---------------------------------------------------------------------------
# winners table

CRITERION_DIRECTIONS = {
    "FT": {"reduction": "higher", "prominence": "higher"},
    "ppl": {"reduction": "lower", "prominence": "lower"},
    "ppl_label_cor": {"reduction": "lower", "prominence": "higher"},
}


def _paired_bootstrap_sig(a: Sequence[float], b: Sequence[float],
                          n_boot: int = 1000, seed: int = 0) -> bool:
    """True when the 95% bootstrap interval of mean(a - b) excludes 0."""
    diffs = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    if np.all(diffs == 0.0):
        return False
    rng = np.random.default_rng(seed)
    means = [float(np.mean(diffs[rng.integers(0, len(diffs), len(diffs))]))
             for _ in range(n_boot)]
    lo, hi = np.percentile(means, [2.5, 97.5])
    return lo > 0 or hi < 0


def winners_table(data: dict[tuple[str, str], dict[str, dict[str, list[float]]]],
                  model_a: str = "conv", model_b: str = "wiki",
                  n_boot: int = 1000, seed: int = 0) -> list[dict[str, str]]:
    """Per (language, task) and criterion, pick the winning model or "n.s.".

    `data[(language, task)][criterion][model]` holds per-fold values.
    Rows where a language's two tasks agree on all criteria are merged into
    one "both" row.
    """
    rows = []
    for (language, task), criteria in sorted(data.items()):
        row = {"language": language, "task": task}
        for crit, directions in CRITERION_DIRECTIONS.items():
            cell = criteria.get(crit, {})
            if model_a not in cell or model_b not in cell:
                row[crit] = ""
                continue
            a, b = cell[model_a], cell[model_b]
            if not _paired_bootstrap_sig(a, b, n_boot, seed):
                row[crit] = "n.s."
                continue
            higher_wins = directions[task] == "higher"
            a_better = (np.mean(a) > np.mean(b)) == higher_wins
            row[crit] = model_a if a_better else model_b
        rows.append(row)

    merged: list[dict[str, str]] = []
    by_lang: dict[str, list[dict[str, str]]] = {}
    for row in rows:
        by_lang.setdefault(row["language"], []).append(row)
    for language in sorted(by_lang):
        group = by_lang[language]
        crits = list(CRITERION_DIRECTIONS)
        if len(group) == 2 and all(group[0][c] == group[1][c] for c in crits):
            merged.append({**group[0], "task": "both"})
        else:
            merged.extend(group)
    return merged


def winners_text(rows: list[dict[str, str]]) -> str:
    header = ["lge", "task"] + list(CRITERION_DIRECTIONS)
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join([row["language"], row["task"]]
                               + [row[c] for c in CRITERION_DIRECTIONS]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# word-level error analysis (rate differences)

@dataclass
class RateDiffEntry:
    word: str
    count: int
    gold_rate: float
    pred_rate: float
    rate_difference: float  # pred - gold


@dataclass
class RateDiffTable:
    entries: list[RateDiffEntry]
    top: list[RateDiffEntry] = field(default_factory=list)
    bottom: list[RateDiffEntry] = field(default_factory=list)


def rate_difference(rows: Sequence[tuple[str, bool, bool]],
                    min_count: int = 50, top_k: int = 5,
                    language: str = "en") -> RateDiffTable:
    """rows: (word, gold label, predicted label) per token."""
    stats: dict[str, list[int]] = {}
    for word, gold, pred in rows:
        w = normalize_word(word, language)
        rec = stats.setdefault(w, [0, 0, 0])  # count, gold pos, pred pos
        rec[0] += 1
        rec[1] += int(gold)
        rec[2] += int(pred)
    entries = []
    for w, (n, g, p) in stats.items():
        if n < min_count:
            continue
        entries.append(RateDiffEntry(w, n, g / n, p / n, (p - g) / n))
    entries.sort(key=lambda e: (-e.rate_difference, e.word))
    return RateDiffTable(entries, entries[:top_k],
                         sorted(entries[-top_k:], key=lambda e: (e.rate_difference,
                                                                 e.word)))


def rate_diff_tsv(table: RateDiffTable) -> str:
    lines = ["word\tcount\tgold_rate\tpred_rate\trate_difference"]
    for e in table.entries:
        lines.append("%s\t%d\t%.6f\t%.6f\t%.6f"
                     % (e.word, e.count, e.gold_rate, e.pred_rate,
                        e.rate_difference))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# frequency curves

def frequency_curve(rows: Sequence[tuple[str, bool, bool]],
                    n_bins: int = 20,
                    language: str = "en") -> list[dict[str, float]]:
    """Gold/predicted label rates over equal-population bins of z-scored log
    type frequency."""
    words = [normalize_word(w, language) for w, _, _ in rows]
    counts: dict[str, int] = {}
    for w in words:
        counts[w] = counts.get(w, 0) + 1
    logf = {w: math.log(c) for w, c in counts.items()}
    values = np.array(list(logf.values()))
    mu = float(np.mean(values))
    sd = float(np.std(values))
    z = {w: ((lf - mu) / sd if sd > 1e-12 else 0.0) for w, lf in logf.items()}

    token_z = np.array([z[w] for w in words])
    edges = np.unique(np.quantile(token_z, np.linspace(0, 1, n_bins + 1)[1:-1]))
    bins = np.searchsorted(edges, token_z, side="right")
    out = []
    for b in sorted(set(bins)):
        mask = bins == b
        out.append({
            "bin": int(b),
            "z_mean": float(np.mean(token_z[mask])),
            "gold_rate": float(np.mean([g for (_, g, _), m in zip(rows, mask) if m])),
            "pred_rate": float(np.mean([p for (_, _, p), m in zip(rows, mask) if m])),
            "count": int(np.sum(mask)),
        })
    return out


def frequency_curve_csv(curve: list[dict[str, float]]) -> str:
    lines = ["bin\tz_mean\tgold_rate\tpred_rate\tcount"]
    for row in curve:
        lines.append("%d\t%.6f\t%.6f\t%.6f\t%d"
                     % (row["bin"], row["z_mean"], row["gold_rate"],
                        row["pred_rate"], row["count"]))
    return "\n".join(lines) + "\n"

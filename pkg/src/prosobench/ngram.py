"""Interpolated Kneser-Ney n-gram model for token-level surprisal.

A small, exactly specified surprisal producer: fixed discount, continuation
counts at the lower orders, rare words (count < cutoff) mapped to UNK, and
utterance-boundary padding.  Probabilities are in base 2 everywhere.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import FitError

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"


@dataclass(frozen=True)
class SurprisalRecord:
    speaker: str
    utterance_index: int
    token_index: int
    word: str
    surprisal: float  # bits


class NgramModel:
    def __init__(self, order: int = 3, discount: float = 0.75,
                 unk_cutoff: int = 2):
        if order < 1:
            raise ValueError("order must be >= 1")
        if not 0.0 < discount < 1.0:
            raise ValueError("discount must be in (0, 1)")
        self.order = order
        self.discount = discount
        self.unk_cutoff = unk_cutoff
        self.vocab: set[str] = set()
        self._unigram: Counter = Counter()          # order-1 models only
        self._top: dict[tuple, Counter] = {}        # raw highest-order counts
        self._cont: dict[int, dict[tuple, Counter]] = {}  # continuation counts

    # -- training ---------------------------------------------------------

    def _map(self, word: str) -> str:
        if word in (BOS, EOS):
            return word
        return word if word in self.vocab else UNK

    def fit(self, utterances: Sequence[Sequence[str]]) -> "NgramModel":
        raw = Counter(w for utt in utterances for w in utt)
        if not raw:
            raise FitError("empty training corpus")
        self.vocab = {w for w, c in raw.items() if c >= self.unk_cutoff}
        n = self.order

        if n == 1:
            for utt in utterances:
                self._unigram.update(self._map(w) for w in utt)
            return self

        ngram_types: dict[int, set[tuple]] = {m: set() for m in range(2, n + 1)}
        for utt in utterances:
            padded = [BOS] * (n - 1) + [self._map(w) for w in utt] + [EOS]
            for i in range(n - 1, len(padded)):
                ctx = tuple(padded[i - n + 1:i])
                self._top.setdefault(ctx, Counter())[padded[i]] += 1
            for m in range(2, n + 1):
                for i in range(m - 1, len(padded)):
                    if padded[i] == BOS:
                        continue  # nothing predicts the padding symbol
                    ngram_types[m].add(tuple(padded[i - m + 1:i + 1]))
        for m in range(1, n):
            table: dict[tuple, Counter] = {}
            for gram in ngram_types[m + 1]:
                table.setdefault(gram[1:-1], Counter())[gram[-1]] += 1
            self._cont[m] = table
        return self

    # -- probabilities ------------------------------------------------------

    def prediction_vocab(self) -> set[str]:
        return self.vocab | {UNK, EOS}

    def prob(self, word: str, context: Sequence[str]) -> float:
        """p(word | context); short histories are padded with BOS."""
        if self.order == 1:
            ctx = ()
        else:
            padded = [BOS] * (self.order - 1) + [self._map(w) for w in context]
            ctx = tuple(padded[-(self.order - 1):])
        return self._p(self.order, ctx, self._map(word))

    def _p(self, m: int, ctx: tuple, w: str) -> float:
        D = self.discount
        if m == 1:
            if self.order == 1:
                total = sum(self._unigram.values())
                return self._unigram.get(w, 0) / total
            counter = self._cont[1].get((), Counter())
            total = sum(counter.values())
            if total == 0:
                return 1.0 / len(self.prediction_vocab())
            lam = D * len(counter) / total
            return (max(counter.get(w, 0) - D, 0.0) / total
                    + lam / len(self.prediction_vocab()))
        table = self._top if m == self.order else self._cont[m]
        counter = table.get(ctx[-(m - 1):] if m > 1 else ())
        if counter is None:
            return self._p(m - 1, ctx, w)
        total = sum(counter.values())
        lam = D * len(counter) / total
        return max(counter.get(w, 0) - D, 0.0) / total + lam * self._p(m - 1, ctx, w)

    # -- scoring ------------------------------------------------------------

    def utterance_surprisal(self, words: Sequence[str]) -> list[float]:
        """Per-word surprisal in bits (-log2 p)."""
        history = [BOS] * (self.order - 1)
        out = []
        for w in words:
            p = self.prob(w, history)
            out.append(-math.log2(p) if p > 0 else math.inf)
            history.append(w)
        return out


def train(utterances: Sequence[Sequence[str]], order: int = 3,
          discount: float = 0.75, unk_cutoff: int = 2) -> NgramModel:
    return NgramModel(order, discount, unk_cutoff).fit(utterances)


def surprisal(model: NgramModel,
              utterance: Sequence[str],
              speaker: str = "",
              utterance_index: int = 0) -> list[SurprisalRecord]:
    bits = model.utterance_surprisal(utterance)
    return [SurprisalRecord(speaker, utterance_index, i, w, s)
            for i, (w, s) in enumerate(zip(utterance, bits))]


def perplexity(model: NgramModel,
               utterances: Sequence[Sequence[str]]) -> float:
    """2^(mean per-token surprisal in bits)."""
    bits = [s for utt in utterances for s in model.utterance_surprisal(utt)]
    if not bits:
        raise FitError("empty evaluation set")
    return 2.0 ** (sum(bits) / len(bits))


def surprisal_tsv(records: Sequence[SurprisalRecord]) -> str:
    lines = ["speaker\tutt\tidx\tword\tsurprisal"]
    for r in records:
        lines.append("%s\t%d\t%d\t%s\t%.6f"
                     % (r.speaker, r.utterance_index, r.token_index,
                        r.word, r.surprisal))
    return "\n".join(lines) + "\n"

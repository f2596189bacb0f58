"""Raw-text loading and genre mixing."""

from __future__ import annotations

from collections import Counter
from typing import Sequence


def load_utterances(text: str) -> list[list[str]]:
    """One utterance per line, whitespace tokenized."""
    return [line.split() for line in text.splitlines() if line.split()]


def token_count(utterances: Sequence[Sequence[str]]) -> int:
    return sum(len(u) for u in utterances)


def word_frequencies(utterances: Sequence[Sequence[str]]) -> Counter:
    return Counter(w for u in utterances for w in u)


def _clip(utterances: Sequence[Sequence[str]], budget: int) -> list[list[str]]:
    """Whole utterances up to the budget; the boundary utterance is cut."""
    out = []
    used = 0
    for utt in utterances:
        if used >= budget:
            break
        take = list(utt[:budget - used])
        out.append(take)
        used += len(take)
    return out


def mix_fifty_fifty(a: Sequence[Sequence[str]],
                    b: Sequence[Sequence[str]]) -> list[list[str]]:
    """Concatenate the two sources trimmed to equal token counts."""
    budget = min(token_count(a), token_count(b))
    return _clip(a, budget) + _clip(b, budget)

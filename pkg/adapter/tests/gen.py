"""Synthetic text and benchmark builders shared across the adapter tests."""

from __future__ import annotations

import random

VOCAB = ["w%d" % i for i in range(40)]

POS_WORDS = ["pos%d" % i for i in range(8)]
NEG_WORDS = ["neg%d" % i for i in range(16)]


def random_utterances(n, length=8, seed=0, vocab=None):
    rng = random.Random(seed)
    vocab = vocab or VOCAB
    return [[rng.choice(vocab) for _ in range(length)] for _ in range(n)]


def separable_sentences(n, seed=0, positive_rate=0.3):
    """Sentences whose tags are a deterministic function of word identity."""
    rng = random.Random(seed)
    sents = []
    for _ in range(n):
        words = [rng.choice(POS_WORDS) if rng.random() < positive_rate
                 else rng.choice(NEG_WORDS) for _ in range(8)]
        tags = []
        prev = False
        for w in words:
            lab = w.startswith("pos")
            tags.append(("I" if prev else "B") if lab else "O")
            prev = lab
        sents.append((words, tags))
    return sents


def to_conll(sentences):
    return "\n\n".join("\n".join("%s\t%s" % (w, t) for w, t in zip(ws, ts))
                       for ws, ts in sentences) + "\n"

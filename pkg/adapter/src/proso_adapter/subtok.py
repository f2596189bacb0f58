"""Unigram subword tokenizer construction and word-aligned encoding."""

from __future__ import annotations

from typing import Sequence

from tokenizers import Tokenizer, models, pre_tokenizers, trainers

from .errors import ExportError
from .textdata import word_frequencies

SPECIALS = ["<s>", "</s>", "<pad>", "<unk>", "<mask>"]
BOS_ID, EOS_ID, PAD_ID, UNK_ID, MASK_ID = range(len(SPECIALS))


def build_tokenizer(utterances: Sequence[Sequence[str]],
                    vocab_size: int = 10_000,
                    min_frequency: int = 2) -> Tokenizer:
    """Train a unigram subword tokenizer.

    Words below the frequency threshold are dropped from the training
    stream, so they cannot surface as whole-word vocabulary entries.
    """
    freqs = word_frequencies(utterances)
    lines = []
    for utt in utterances:
        kept = [w for w in utt if freqs[w] >= min_frequency]
        if kept:
            lines.append(" ".join(kept))
    tokenizer = Tokenizer(models.Unigram())
    tokenizer.pre_tokenizer = pre_tokenizers.Metaspace()
    trainer = trainers.UnigramTrainer(vocab_size=vocab_size,
                                      special_tokens=SPECIALS,
                                      unk_token="<unk>",
                                      show_progress=False)
    tokenizer.train_from_iterator(lines, trainer)
    return tokenizer


def encode_words(tokenizer: Tokenizer,
                 words: Sequence[str]) -> list[list[int]]:
    """Subword ids per word; words are encoded independently so every
    subword stays attributable to exactly one word."""
    pieces = []
    for word in words:
        ids = tokenizer.encode(word).ids
        if not ids:
            raise ExportError("word %r produced no subword pieces" % word)
        pieces.append(ids)
    return pieces

"""Reader for the benchmark CoNLL fold files and prediction TSV writer."""

from __future__ import annotations

from typing import Sequence

from .errors import ExportError

TAGS = ("B", "I", "O")


def read_conll(text: str) -> list[tuple[list[str], list[str]]]:
    """Sentences of (words, tags) from TOKEN<TAB>TAG blocks."""
    sentences = []
    words: list[str] = []
    tags: list[str] = []

    def flush():
        if words:
            sentences.append((list(words), list(tags)))
            words.clear()
            tags.clear()

    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            flush()
            continue
        cols = line.split("\t")
        if len(cols) != 2 or cols[1] not in TAGS:
            raise ExportError("line %d: expected TOKEN<TAB>TAG, got %r"
                              % (lineno, line))
        words.append(cols[0])
        tags.append(cols[1])
    flush()
    return sentences


def encode_bio(labels: Sequence[bool]) -> list[str]:
    tags = []
    prev = False
    for lab in labels:
        tags.append(("I" if prev else "B") if lab else "O")
        prev = lab
    return tags


def prediction_tsv(sentences: Sequence[tuple[list[str], list[str]]]) -> str:
    """Word-level prediction TSV; provenance is synthesized the same way
    the benchmark toolkit synthesizes it when reading CoNLL (empty speaker,
    sentence index, token index)."""
    lines = ["speaker\tutt\tidx\tword\ttag"]
    for s, (words, tags) in enumerate(sentences):
        for i, (word, tag) in enumerate(zip(words, tags)):
            lines.append("\t%d\t%d\t%s\t%s" % (s, i, word, tag))
    return "\n".join(lines) + "\n"

"""BIO-tagged benchmark assembly with speaker-group folds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import AlignedCorpus
from .errors import FoldError, ParseError

Provenance = tuple[str, int, int]  # (speaker, utterance index, token index)


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    mapping: dict[str, int]  # speaker_id -> fold index

    def fold_of(self, speaker: str) -> int:
        return self.mapping[speaker]


@dataclass
class BioSentence:
    tokens: list[str]
    tags: list[str]
    provenance: list[Provenance]


@dataclass
class BioDataset:
    task: str  # "reduction" or "prominence"
    sentences: list[BioSentence] = field(default_factory=list)

    def n_tokens(self) -> int:
        return sum(len(s.tokens) for s in self.sentences)


def make_folds(corpus: AlignedCorpus, k: int = 8, seed: int = 0) -> FoldAssignment:
    counts: dict[str, int] = {}
    for tok in corpus.tokens():
        counts[tok.speaker_id] = counts.get(tok.speaker_id, 0) + 1
    return folds_from_counts(counts, k, seed)


def folds_from_counts(counts: dict[str, int], k: int = 8,
                      seed: int = 0) -> FoldAssignment:
    """Greedy balanced speaker assignment: heaviest speaker first, into the
    currently lightest fold.  Ties break by speaker id, so the result is
    deterministic regardless of seed."""
    del seed  # assignment is fully determined; kept for interface stability
    if len(counts) < k:
        raise FoldError("need >= %d speakers for %d folds, got %d"
                        % (k, k, len(counts)))
    if k < 2:
        raise FoldError("fold count must be >= 2")
    mapping: dict[str, int] = {}
    loads = [0] * k
    for speaker in sorted(counts, key=lambda s: (-counts[s], s)):
        fold = min(range(k), key=lambda f: (loads[f], f))
        mapping[speaker] = fold
        loads[fold] += counts[speaker]
    return FoldAssignment(k, mapping)


def encode_bio(labels: Sequence[bool]) -> list[str]:
    tags = []
    prev = False
    for lab in labels:
        if lab:
            tags.append("I" if prev else "B")
        else:
            tags.append("O")
        prev = lab
    return tags


def decode_bio(tags: Sequence[str]) -> list[bool]:
    return [t in ("B", "I") for t in tags]


def emit_bio(labeled_utterances: Sequence[Sequence[tuple[Provenance, str, bool]]],
             task: str) -> BioDataset:
    """labeled_utterances: per utterance, (provenance, word, bool label)."""
    dataset = BioDataset(task)
    for utt in labeled_utterances:
        if not utt:
            continue
        tags = encode_bio([lab for _, _, lab in utt])
        dataset.sentences.append(BioSentence(
            [word for _, word, _ in utt], tags, [prov for prov, _, _ in utt]))
    return dataset


def group_records(records, speaker_of=None) -> list[list[tuple[Provenance, str, bool]]]:
    """Group reduction/prominence records into utterances by (speaker, utt)."""
    utts: dict[tuple[str, int], list] = {}
    order: list[tuple[str, int]] = []
    for r in records:
        tok = r.token
        key = (tok.speaker_id, tok.utterance_index)
        if key not in utts:
            utts[key] = []
            order.append(key)
        prov = (tok.speaker_id, tok.utterance_index, tok.token_index)
        utts[key].append((prov, tok.orthography, r.label))
    return [utts[k] for k in order]


def to_conll(dataset: BioDataset) -> str:
    blocks = []
    for sent in dataset.sentences:
        blocks.append("\n".join("%s\t%s" % (tok, tag)
                                for tok, tag in zip(sent.tokens, sent.tags)))
    return "\n\n".join(blocks) + "\n"


def from_conll(text: str, task: str) -> BioDataset:
    """Parse CoNLL text; provenance is synthesized as ("", sentence, index)."""
    dataset = BioDataset(task)
    tokens: list[str] = []
    tags: list[str] = []

    def flush():
        if tokens:
            prov = [("", len(dataset.sentences), i) for i in range(len(tokens))]
            dataset.sentences.append(BioSentence(list(tokens), list(tags), prov))
            tokens.clear()
            tags.clear()

    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            flush()
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise ParseError("expected TOKEN<TAB>TAG", line=lineno)
        if cols[1] not in ("B", "I", "O"):
            raise ParseError("bad tag %r" % cols[1], line=lineno)
        tokens.append(cols[0])
        tags.append(cols[1])
    flush()
    return dataset


def split_by_fold(dataset: BioDataset, folds: FoldAssignment) -> dict[int, BioDataset]:
    out = {i: BioDataset(dataset.task) for i in range(folds.k)}
    for sent in dataset.sentences:
        speaker = sent.provenance[0][0]
        out[folds.fold_of(speaker)].sentences.append(sent)
    return out


def dataset_stats(dataset: BioDataset,
                  folds: FoldAssignment | None = None) -> dict:
    n_tokens = dataset.n_tokens()
    n_pos = sum(tag in ("B", "I") for s in dataset.sentences for tag in s.tags)
    stats = {
        "task": dataset.task,
        "n_tokens": n_tokens,
        "n_utterances": len(dataset.sentences),
        "positive_rate": n_pos / n_tokens if n_tokens else math.nan,
        "mean_utterance_length": (n_tokens / len(dataset.sentences)
                                  if dataset.sentences else math.nan),
    }
    if folds is not None:
        per_fold = {}
        warnings = []
        for i, sub in split_by_fold(dataset, folds).items():
            nt = sub.n_tokens()
            np_ = sum(tag in ("B", "I") for s in sub.sentences for tag in s.tags)
            per_fold[i] = {"n_tokens": nt,
                           "positive_rate": np_ / nt if nt else math.nan}
            if nt == 0:
                warnings.append("fold %d is empty" % i)
        stats["per_fold"] = per_fold
        if warnings:
            stats["warnings"] = warnings
    return stats


def dataset_from_rows(rows: Sequence[tuple[Provenance, str, str]],
                      task: str) -> BioDataset:
    """Rebuild a BioDataset from provenance-tagged (prov, word, tag) rows,
    grouping into utterances by (speaker, utterance index)."""
    dataset = BioDataset(task)
    current_key = None
    sent: BioSentence | None = None
    for prov, word, tag in rows:
        key = (prov[0], prov[1])
        if key != current_key:
            sent = BioSentence([], [], [])
            dataset.sentences.append(sent)
            current_key = key
        assert sent is not None
        sent.tokens.append(word)
        sent.tags.append(tag)
        sent.provenance.append(prov)
    return dataset


# gold tokens with provenance, in the same schema the prediction files use

def gold_tsv(dataset: BioDataset) -> str:
    lines = ["speaker\tutt\tidx\tword\ttag"]
    for sent in dataset.sentences:
        for (speaker, utt, idx), word, tag in zip(sent.provenance, sent.tokens,
                                                  sent.tags):
            lines.append("%s\t%d\t%d\t%s\t%s" % (speaker, utt, idx, word, tag))
    return "\n".join(lines) + "\n"

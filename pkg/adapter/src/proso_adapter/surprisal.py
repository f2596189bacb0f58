"""Word surprisal export via joint masking of each word's subwords."""

from __future__ import annotations

import math
from typing import Sequence

import torch

from .errors import ExportError
from .pretrain import Checkpoint, collate
from .subtok import BOS_ID, EOS_ID, MASK_ID, encode_words

Provenance = tuple[str, int, int]


def read_benchmark_tsv(text: str) -> list[list[tuple[Provenance, str]]]:
    """Utterances of (provenance, word) from a gold/prediction-style TSV;
    the tag column, when present, is ignored."""
    lines = text.splitlines()
    if not lines or lines[0].split("\t")[:4] != ["speaker", "utt", "idx",
                                                 "word"]:
        raise ExportError("bad benchmark TSV header: %r"
                          % (lines[0] if lines else ""))
    utterances: list[list[tuple[Provenance, str]]] = []
    current = None
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cols = line.split("\t")
        try:
            prov = (cols[0], int(cols[1]), int(cols[2]))
        except (ValueError, IndexError):
            raise ExportError("line %d: unparsable row %r" % (lineno, line))
        key = (prov[0], prov[1])
        if key != current:
            utterances.append([])
            current = key
        utterances[-1].append((prov, cols[3]))
    return utterances


def word_surprisals(model, tokenizer, words: Sequence[str],
                    max_len: int) -> list[float]:
    """Surprisal in bits per word: all subwords of the target word are
    masked jointly and each masked position is scored given the rest."""
    pieces = encode_words(tokenizer, words)
    ids = [BOS_ID]
    spans = []
    for word_ids in pieces:
        start = len(ids)
        ids.extend(word_ids)
        spans.append((start, len(ids)))
    ids.append(EOS_ID)
    if len(ids) > max_len:
        raise ExportError("utterance of %d subwords exceeds the model "
                          "window (%d)" % (len(ids), max_len))

    model.eval()
    out = []
    with torch.no_grad():
        for (start, end), word_ids in zip(spans, pieces):
            masked = list(ids)
            for p in range(start, end):
                masked[p] = MASK_ID
            tens, mask = collate([masked])
            logprobs = torch.log_softmax(
                model(input_ids=tens, attention_mask=mask).logits[0], dim=-1)
            bits = 0.0
            for p, true_id in zip(range(start, end), word_ids):
                bits -= float(logprobs[p, true_id]) / math.log(2.0)
            out.append(bits)
    return out


def export_surprisal(checkpoint: Checkpoint, benchmark_text: str) -> str:
    """Surprisal TSV in the ngram interchange schema."""
    tokenizer = checkpoint.load_tokenizer()
    model = checkpoint.load_mlm()
    max_len = model.config.max_position_embeddings - 8
    lines = ["speaker\tutt\tidx\tword\tsurprisal"]
    for utt in read_benchmark_tsv(benchmark_text):
        words = [w for _, w in utt]
        for (prov, word), bits in zip(utt, word_surprisals(model, tokenizer,
                                                           words, max_len)):
            lines.append("%s\t%d\t%d\t%s\t%.6f"
                         % (prov[0], prov[1], prov[2], word, bits))
    return "\n".join(lines) + "\n"

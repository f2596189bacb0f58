"""Token-classification fine-tuning over the 10-cell grid."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import torch

from .conll import encode_bio, prediction_tsv, read_conll
from .errors import TrainingError
from .pretrain import Checkpoint, collate
from .specs import FinetuneGrid
from .subtok import BOS_ID, EOS_ID, encode_words

log = logging.getLogger("proso_adapter")

Sentence = tuple[list[str], list[str]]


def majority_collapse(subword_positive: Sequence[bool]) -> bool:
    """Word label from its subword votes; ties classify as positive."""
    pos = sum(subword_positive)
    return pos * 2 >= len(subword_positive)


def f1_positive(gold_tags: Sequence[str], pred_tags: Sequence[str]) -> float:
    tp = fp = fn = 0
    for g, p in zip(gold_tags, pred_tags):
        gpos, ppos = g in ("B", "I"), p in ("B", "I")
        tp += gpos and ppos
        fp += ppos and not gpos
        fn += gpos and not ppos
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


@dataclass
class CellResult:
    learning_rate: float
    batch_size: int
    fold_f1: list[float]
    prediction_files: list[str]

    @property
    def mean_f1(self) -> float:
        return sum(self.fold_f1) / len(self.fold_f1)


@dataclass
class GridResult:
    cells: list[CellResult] = field(default_factory=list)

    @property
    def winner(self) -> CellResult:
        return max(self.cells,
                   key=lambda c: (c.mean_f1, -c.learning_rate, -c.batch_size))

    def to_json(self) -> dict:
        win = self.winner
        return {
            "cells": [{"learning_rate": c.learning_rate,
                       "batch_size": c.batch_size,
                       "fold_f1": c.fold_f1,
                       "mean_f1": c.mean_f1,
                       "predictions": c.prediction_files}
                      for c in self.cells],
            "winner": {"learning_rate": win.learning_rate,
                       "batch_size": win.batch_size,
                       "mean_f1": win.mean_f1},
        }


def _encode_sentences(tokenizer, sentences: Sequence[Sentence], max_len: int):
    """(input ids, per-position word index or -1, word labels) per sentence."""
    encoded = []
    for words, tags in sentences:
        pieces = encode_words(tokenizer, words)
        ids = [BOS_ID]
        owner = [-1]
        for w, word_ids in enumerate(pieces):
            for i in word_ids:
                if len(ids) >= max_len - 1:
                    break
                ids.append(i)
                owner.append(w)
        ids.append(EOS_ID)
        owner.append(-1)
        labels = [tag in ("B", "I") for tag in tags]
        encoded.append((ids, owner, labels))
    return encoded


def _subword_labels(encoded):
    """Per-position 0/1 targets (-100 on specials) for one sentence."""
    ids, owner, labels = encoded
    return [int(labels[w]) if w >= 0 else -100 for w in owner]


def _train_classifier(checkpoint: Checkpoint, encoded_train, lr: float,
                      batch_size: int, epochs: int, patience: int,
                      seed: int):
    torch.manual_seed(seed)
    model = checkpoint.load_classifier(num_labels=2)
    optimizer = torch.optim.AdamW(model.parameters(), lr=lr)
    gen = torch.Generator().manual_seed(seed)
    best_loss = math.inf
    stale = 0
    try:
        for _ in range(epochs):
            order = torch.randperm(len(encoded_train), generator=gen)
            total = 0.0
            n = 0
            model.train()
            for start in range(0, len(order), batch_size):
                batch = [encoded_train[i] for i in order[start:start + batch_size]]
                ids, mask = collate([b[0] for b in batch])
                labels = collate([_subword_labels(b) for b in batch])[0]
                labels = labels.clone()
                labels[mask == 0] = -100
                out = model(input_ids=ids, attention_mask=mask, labels=labels)
                optimizer.zero_grad()
                out.loss.backward()
                optimizer.step()
                total += float(out.loss.detach())
                n += 1
            epoch_loss = total / max(n, 1)
            if epoch_loss < best_loss - 1e-6:
                best_loss = epoch_loss
                stale = 0
            else:
                stale += 1
                if stale >= patience:
                    break
    except RuntimeError as exc:
        raise TrainingError("fine-tuning failed: %s" % exc,
                            config={"learning_rate": lr,
                                    "batch_size": batch_size})
    return model


def _predict(model, encoded_eval) -> list[list[bool]]:
    """Word-level labels via majority vote over subword predictions."""
    model.eval()
    out = []
    with torch.no_grad():
        for ids, owner, labels in encoded_eval:
            tens, mask = collate([ids])
            logits = model(input_ids=tens, attention_mask=mask).logits[0]
            votes = logits.argmax(dim=-1).tolist()
            word_labels = []
            for w in range(len(labels)):
                sub = [bool(votes[p]) for p, o in enumerate(owner) if o == w]
                # truncated words carry no subwords; default negative
                word_labels.append(majority_collapse(sub) if sub else False)
            out.append(word_labels)
    return out


def finetune_and_export(checkpoint: Checkpoint,
                        fold_texts: Sequence[str],
                        grid: FinetuneGrid,
                        out_dir,
                        epochs: int | None = None,
                        seed: int = 0) -> GridResult:
    """Train every grid cell with per-fold held-out prediction.

    For each cell and fold i the classifier trains on the other folds and
    predicts fold i; predictions are exported as word-level TSVs and scored
    with positive-class F1. The winner is the cell with the highest mean F1
    across folds.
    """
    if len(fold_texts) < 2:
        raise TrainingError("need at least 2 folds")
    folds = [read_conll(t) for t in fold_texts]
    tokenizer = checkpoint.load_tokenizer()
    max_len = checkpoint.load_mlm().config.max_position_embeddings - 8
    encoded = [_encode_sentences(tokenizer, sents, max_len)
               for sents in folds]
    run_epochs = grid.epochs if epochs is None else epochs

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = GridResult()
    for ci, (lr, bs) in enumerate(grid.cells()):
        fold_f1 = []
        files = []
        for fi in range(len(folds)):
            train_enc = [e for j, enc in enumerate(encoded) if j != fi
                         for e in enc]
            model = _train_classifier(checkpoint, train_enc, lr, bs,
                                      run_epochs, grid.patience,
                                      seed + 1000 * ci + fi)
            predicted = _predict(model, encoded[fi])
            pred_sentences = [(words, encode_bio(labels))
                              for (words, _), labels in zip(folds[fi],
                                                            predicted)]
            path = out / ("pred.cell%02d.fold%d.tsv" % (ci, fi))
            path.write_text(prediction_tsv(pred_sentences), encoding="utf-8")
            files.append(str(path))
            gold_flat = [t for _, tags in folds[fi] for t in tags]
            pred_flat = [t for _, tags in pred_sentences for t in tags]
            fold_f1.append(f1_positive(gold_flat, pred_flat))
        cell = CellResult(lr, bs, fold_f1, files)
        log.info("cell %d lr=%g bs=%d mean F1 %.3f", ci, lr, bs, cell.mean_f1)
        result.cells.append(cell)

    with open(out / "grid_log.json", "w", encoding="utf-8") as fh:
        json.dump(result.to_json(), fh, indent=2)
        fh.write("\n")
    return result

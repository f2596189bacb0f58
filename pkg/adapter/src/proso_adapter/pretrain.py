"""Masked-LM pretraining with early stopping."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import torch
from tokenizers import Tokenizer
from transformers import (RobertaConfig, RobertaForMaskedLM,
                          RobertaForTokenClassification)

from .errors import TrainingError
from .specs import PretrainSpec
from .subtok import (BOS_ID, EOS_ID, MASK_ID, PAD_ID, SPECIALS,
                     build_tokenizer, encode_words)

log = logging.getLogger("proso_adapter")

MASK_PROB = 0.15


@dataclass
class Checkpoint:
    path: Path

    @property
    def tokenizer_file(self) -> Path:
        return Path(self.path) / "tokenizer.json"

    @property
    def model_dir(self) -> Path:
        return Path(self.path) / "model"

    @property
    def log_file(self) -> Path:
        return Path(self.path) / "log.json"

    def load_tokenizer(self) -> Tokenizer:
        return Tokenizer.from_file(str(self.tokenizer_file))

    def load_mlm(self) -> RobertaForMaskedLM:
        return RobertaForMaskedLM.from_pretrained(str(self.model_dir))

    def load_classifier(self, num_labels: int = 2
                        ) -> RobertaForTokenClassification:
        return RobertaForTokenClassification.from_pretrained(
            str(self.model_dir), num_labels=num_labels)


def encode_corpus(tokenizer: Tokenizer,
                  utterances: Sequence[Sequence[str]],
                  max_len: int) -> list[list[int]]:
    seqs = []
    for utt in utterances:
        flat = [i for ids in encode_words(tokenizer, utt) for i in ids]
        seqs.append([BOS_ID] + flat[:max_len - 2] + [EOS_ID])
    return seqs


def collate(seqs: Sequence[Sequence[int]]) -> tuple[torch.Tensor, torch.Tensor]:
    width = max(len(s) for s in seqs)
    ids = torch.full((len(seqs), width), PAD_ID, dtype=torch.long)
    mask = torch.zeros((len(seqs), width), dtype=torch.long)
    for i, s in enumerate(seqs):
        ids[i, :len(s)] = torch.tensor(s, dtype=torch.long)
        mask[i, :len(s)] = 1
    return ids, mask


def mask_inputs(input_ids: torch.Tensor, attention_mask: torch.Tensor,
                vocab_size: int, generator: torch.Generator
                ) -> tuple[torch.Tensor, torch.Tensor]:
    """Standard MLM corruption: 15% selected, of which 80% masked, 10%
    random, 10% kept; labels are -100 everywhere else."""
    labels = input_ids.clone()
    maskable = (attention_mask == 1) & (input_ids != BOS_ID) \
        & (input_ids != EOS_ID)
    probs = torch.rand(input_ids.shape, generator=generator)
    selected = (probs < MASK_PROB) & maskable
    labels[~selected] = -100

    corrupted = input_ids.clone()
    roll = torch.rand(input_ids.shape, generator=generator)
    corrupted[selected & (roll < 0.8)] = MASK_ID
    randomize = selected & (roll >= 0.8) & (roll < 0.9)
    random_ids = torch.randint(len(SPECIALS), vocab_size, input_ids.shape,
                               generator=generator)
    corrupted[randomize] = random_ids[randomize]
    return corrupted, labels


def _epoch_loss(model, seqs, batch_size, vocab_size, generator, train,
                optimizer=None) -> float:
    total = 0.0
    n_batches = 0
    for start in range(0, len(seqs), batch_size):
        ids, mask = collate(seqs[start:start + batch_size])
        corrupted, labels = mask_inputs(ids, mask, vocab_size, generator)
        if (labels != -100).sum() == 0:
            continue
        out = model(input_ids=corrupted, attention_mask=mask, labels=labels)
        if train:
            optimizer.zero_grad()
            out.loss.backward()
            optimizer.step()
        total += float(out.loss.detach())
        n_batches += 1
    if n_batches == 0:
        raise TrainingError("no maskable batches in the corpus")
    return total / n_batches


def pretrain(spec: PretrainSpec,
             train_utterances: Sequence[Sequence[str]],
             dev_utterances: Sequence[Sequence[str]],
             out_dir) -> Checkpoint:
    """Train a masked LM from scratch and save a checkpoint.

    No pretrained base is reachable offline, so the encoder starts from a
    fresh initialization sized by the spec; the substitution is logged in
    the run log rather than silently assumed.
    """
    if not train_utterances or not dev_utterances:
        raise TrainingError("empty training or dev text", config=spec)
    torch.manual_seed(spec.seed)
    tokenizer = build_tokenizer(train_utterances, spec.vocab_size,
                                spec.min_frequency)
    vocab_size = tokenizer.get_vocab_size()
    config = RobertaConfig(
        vocab_size=vocab_size,
        hidden_size=spec.hidden_size,
        num_hidden_layers=spec.num_layers,
        num_attention_heads=spec.num_heads,
        intermediate_size=4 * spec.hidden_size,
        max_position_embeddings=spec.max_len + 8,
        pad_token_id=PAD_ID, bos_token_id=BOS_ID, eos_token_id=EOS_ID)
    model = RobertaForMaskedLM(config)
    init_note = ("fresh random initialization; no pretrained base weights "
                 "are available in this environment")
    log.info(init_note)

    train_seqs = encode_corpus(tokenizer, train_utterances, spec.max_len)
    dev_seqs = encode_corpus(tokenizer, dev_utterances, spec.max_len)
    optimizer = torch.optim.AdamW(model.parameters(),
                                  lr=spec.resolved_learning_rate())

    history = []
    best_loss = math.inf
    best_state = None
    stale = 0
    shuffle_gen = torch.Generator().manual_seed(spec.seed)
    try:
        for epoch in range(spec.epochs):
            order = torch.randperm(len(train_seqs), generator=shuffle_gen)
            shuffled = [train_seqs[i] for i in order]
            mask_gen = torch.Generator().manual_seed(spec.seed + epoch + 1)
            model.train()
            train_loss = _epoch_loss(model, shuffled, spec.batch_size,
                                     vocab_size, mask_gen, True, optimizer)
            model.eval()
            # fixed dev masking so epochs stay comparable
            dev_gen = torch.Generator().manual_seed(spec.seed)
            with torch.no_grad():
                dev_loss = _epoch_loss(model, dev_seqs, spec.batch_size,
                                       vocab_size, dev_gen, False)
            history.append({"epoch": epoch, "train_loss": train_loss,
                            "dev_loss": dev_loss})
            log.info("epoch %d train %.4f dev %.4f", epoch, train_loss,
                     dev_loss)
            if dev_loss < best_loss:
                best_loss = dev_loss
                best_state = {k: v.detach().clone()
                              for k, v in model.state_dict().items()}
                stale = 0
            else:
                stale += 1
                if stale >= spec.patience:
                    break
    except RuntimeError as exc:
        raise TrainingError("pretraining failed: %s" % exc, config=spec)

    if best_state is not None:
        model.load_state_dict(best_state)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tokenizer.save(str(out / "tokenizer.json"))
    model.save_pretrained(str(out / "model"))
    run_log = {
        "spec": {k: getattr(spec, k) for k in
                 ("genre", "language", "vocab_size", "min_frequency",
                  "epochs", "batch_size", "patience", "hidden_size",
                  "num_layers", "num_heads", "max_len", "seed")},
        "learning_rate": spec.resolved_learning_rate(),
        "initialization": init_note,
        "vocab_size_actual": vocab_size,
        "epochs": history,
        "best_dev_loss": best_loss,
    }
    with open(out / "log.json", "w", encoding="utf-8") as fh:
        json.dump(run_log, fh, indent=2)
        fh.write("\n")
    return Checkpoint(out)

"""Fixed hyperparameter bundles for pretraining and fine-tuning."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

GENRES = ("conversational", "written", "mixed")

# pretraining learning rate per language
PRETRAIN_LEARNING_RATES = {"en": 1e-4, "fr": 1e-4, "zh": 2e-4}


@dataclass(frozen=True)
class PretrainSpec:
    """Masked-LM pretraining configuration.

    Vocabulary size, frequency threshold, and the optimization schedule
    default to the reference values; model dimensions are deliberately
    unpinned and default to a desk-scale encoder.
    """

    genre: str = "conversational"
    language: str = "en"
    vocab_size: int = 10_000
    min_frequency: int = 2
    epochs: int = 100
    batch_size: int = 32
    patience: int = 10
    learning_rate: Optional[float] = None  # None: resolved per language
    hidden_size: int = 128
    num_layers: int = 2
    num_heads: int = 2
    max_len: int = 128
    seed: int = 0

    def __post_init__(self):
        if self.genre not in GENRES:
            raise ValueError("genre must be one of %s, got %r"
                             % (GENRES, self.genre))
        if self.learning_rate is None and \
                self.language not in PRETRAIN_LEARNING_RATES:
            raise ValueError("no default learning rate for language %r"
                             % self.language)

    def resolved_learning_rate(self) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return PRETRAIN_LEARNING_RATES[self.language]


@dataclass(frozen=True)
class FinetuneGrid:
    """Token-classification search grid; always exactly 10 cells."""

    learning_rates: tuple = (2e-5, 4e-5, 6e-5, 8e-5, 1e-4)
    batch_sizes: tuple = (32, 16)
    epochs: int = 10
    patience: int = 5

    def __post_init__(self):
        n = len(self.learning_rates) * len(self.batch_sizes)
        if n != 10:
            raise ValueError("grid must have exactly 10 cells, got %d" % n)

    def cells(self) -> list[tuple[float, int]]:
        return [(lr, bs) for lr in self.learning_rates
                for bs in self.batch_sizes]

import os
import sys

import pytest
import transformers

transformers.logging.set_verbosity_error()
transformers.logging.disable_progress_bar()

sys.path.insert(0, os.path.dirname(__file__))

from gen import random_utterances  # noqa: E402

from proso_adapter.pretrain import pretrain  # noqa: E402
from proso_adapter.specs import PretrainSpec  # noqa: E402

TINY_SPEC = PretrainSpec(epochs=5, vocab_size=150, hidden_size=32,
                         num_layers=1, num_heads=2, max_len=48,
                         batch_size=16)


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    """Small shared checkpoint for export and surprisal tests."""
    utts = random_utterances(300, seed=0)
    dev = random_utterances(30, seed=1)
    out = tmp_path_factory.mktemp("ckpt")
    return pretrain(TINY_SPEC, utts, dev, out)

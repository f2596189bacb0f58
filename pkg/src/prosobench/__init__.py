"""Toolchain turning time-aligned spontaneous-speech corpora into
token-labeled benchmarks (speech reduction, prosodic prominence) and scoring
language-model prediction files against them."""

__version__ = "0.1.0"

from .corpus import AlignedCorpus, Recording, Segment, Syllable, WordToken  # noqa: F401

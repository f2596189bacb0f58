"""Masked-LM adapter for the prosobench interchange formats."""

from .errors import AdapterError, ExportError, TrainingError
from .specs import FinetuneGrid, PretrainSpec

__version__ = "0.1.0"

__all__ = [
    "AdapterError",
    "ExportError",
    "FinetuneGrid",
    "PretrainSpec",
    "TrainingError",
    "__version__",
]

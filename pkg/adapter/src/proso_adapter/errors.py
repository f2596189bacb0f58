"""Adapter error hierarchy."""


class AdapterError(Exception):
    pass


class TrainingError(AdapterError):
    """Raised with the offending config when a run fails to train."""

    def __init__(self, message, config=None):
        super().__init__(message)
        self.config = config


class ExportError(AdapterError):
    """Tokenizer/word misalignment during export."""

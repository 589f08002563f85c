"""Exception hierarchy shared by every layer of the summarizer."""

from __future__ import annotations

from typing import Optional


class SPNetError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(SPNetError, ValueError):
    """Operand shapes do not conform."""


class DomainError(SPNetError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ContractError(SPNetError, ValueError):
    """A documented precondition was violated by the caller."""


class ConfigurationError(SPNetError, ValueError):
    """Invalid or inconsistent configuration."""


class OptimizationError(SPNetError, RuntimeError):
    """The optimizer received an unusable gradient."""


class NumericalError(SPNetError, RuntimeError):
    """Training produced a non-finite loss."""

    def __init__(self, message: str, batch_index: Optional[int] = None) -> None:
        super().__init__(message)
        self.batch_index = batch_index


class CheckpointError(SPNetError, OSError):
    """A checkpoint file could not be written or read back."""


class PrecisionMismatchError(CheckpointError):
    """Checkpoint precision differs from the active session precision."""


class CorpusError(SPNetError, ValueError):
    """A corpus record could not be processed."""


class SchemaError(CorpusError):
    """A JSONL record does not follow the documented schema."""

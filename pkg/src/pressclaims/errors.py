"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class PipelineError(Exception):
    """Base class for all domain errors raised by this package."""


class TranscriptParseError(PipelineError):
    """Transcript bytes are not valid JSON; carries the byte offset."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class SchemaError(PipelineError):
    """Transcript JSON parsed but violates the briefing schema."""


class GoldValidationError(PipelineError):
    """Gold annotation file violates the label schema."""


class VectorFormatError(PipelineError):
    """Word-vector file is malformed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class ZeroVectorError(PipelineError):
    """Cosine similarity requested for an all-out-of-vocabulary sentence."""


class TrainingError(PipelineError):
    """Baseline training preconditions not met."""


class EndpointError(PipelineError):
    """Remote classifier unreachable after retries, or returned an error."""


class WireProtocolError(PipelineError):
    """Remote response violates the inference wire protocol."""


class CredentialError(PipelineError):
    """Wikification API rejected the configured token."""


class RateLimitError(PipelineError):
    """Wikification API kept rate-limiting after backoff retries."""


class WikifyProtocolError(PipelineError):
    """Wikification API response could not be mapped to annotations."""


class CacheMissError(PipelineError):
    """Cache-only wikification requested a text that was never recorded."""


class ConfigError(PipelineError):
    """Pipeline configuration is inconsistent or out of range."""


class ConsistencyError(PipelineError):
    """Cross-stage inputs disagree (e.g. claim outside its segmentation)."""


class EvaluationError(PipelineError):
    """Predictions cannot be resolved against the gold annotations."""


class StageError(PipelineError):
    """Wraps an error with the pipeline stage it surfaced in."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause

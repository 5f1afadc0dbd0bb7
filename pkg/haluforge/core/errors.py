"""Core error types and error handling utilities for HaluForge."""

from typing import Any, Dict, Optional


class HaluForgeError(Exception):
    """Base exception class for all HaluForge errors."""

    def __init__(
        self,
        message: str,
        code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ) -> None:
        self.message = message
        self.code = code or self.__class__.__name__
        self.details = details or {}
        super().__init__(self.message)


class ValidationError(HaluForgeError):
    """Raised when a precondition or rule set fails."""
    pass


# Configuration Errors
class ConfigurationError(HaluForgeError):
    """Base class for configuration related errors."""
    pass


class InvalidConfigError(ConfigurationError):
    """Raised when configuration is invalid."""
    pass


class ConfigError(ConfigurationError):
    """Raised when a configuration field is invalid."""

    def __init__(self, field: str, reason: str) -> None:
        super().__init__(
            f"Invalid configuration field '{field}': {reason}",
            details={"field": field, "reason": reason}
        )


# Corpus Errors
class CorpusError(HaluForgeError):
    """Base class for manifest, patch and sample construction errors."""
    pass


class MalformedRowError(CorpusError):
    """Raised when a manifest row has the wrong column count."""

    def __init__(self, line_no: int, columns: int) -> None:
        super().__init__(
            f"Manifest line {line_no} has {columns} columns, expected 5",
            details={"line_no": line_no, "columns": columns}
        )


class InvalidIdError(CorpusError):
    """Raised when a CVE or CWE id violates its pattern."""

    def __init__(self, line_no: int, value: str) -> None:
        super().__init__(
            f"Manifest line {line_no}: invalid identifier '{value}'",
            details={"line_no": line_no, "value": value}
        )


class DuplicateCveError(CorpusError):
    """Raised when a manifest lists the same CVE twice."""

    def __init__(self, cve_id: str) -> None:
        super().__init__(f"Duplicate manifest entry {cve_id}",
                         details={"cve_id": cve_id})


class FetchFailedError(CorpusError):
    """Raised when a patch cannot be retrieved."""

    def __init__(self, url: str, status: Optional[int] = None,
                 reason: str = "") -> None:
        super().__init__(
            f"Fetching {url} failed (status={status}) {reason}".rstrip(),
            details={"url": url, "status": status}
        )


class EmptyPatchError(CorpusError):
    """Raised when a fetch succeeds with an empty body."""

    def __init__(self, url: str) -> None:
        super().__init__(f"Empty patch body from {url}", details={"url": url})


class NoHunksError(CorpusError):
    """Raised when a diff contains no hunk."""
    pass


class CountMismatchError(CorpusError):
    """Raised when hunk header lengths disagree with its marker counts."""

    def __init__(self, file: str, hunk_index: int, reason: str = "") -> None:
        super().__init__(
            f"Hunk {hunk_index} of {file} does not match its header {reason}".rstrip(),
            details={"file": file, "hunk_index": hunk_index}
        )


class UnbalancedBracesError(CorpusError):
    """Raised when a function body never closes."""

    def __init__(self, file_path: str, line: int) -> None:
        super().__init__(
            f"Unbalanced braces for function at {file_path}:{line}",
            details={"file_path": file_path, "line": line}
        )


class HunkAnchorMismatchError(CorpusError):
    """Raised when hunk context does not match the pre-image."""

    def __init__(self, file: str, hunk_index: int) -> None:
        super().__init__(
            f"Hunk {hunk_index} does not anchor in {file}",
            details={"file": file, "hunk_index": hunk_index}
        )


class NoTouchedFunctionError(CorpusError):
    """Raised when a patch touches no recoverable function."""

    def __init__(self, file: str) -> None:
        super().__init__(f"No touched function found in {file}",
                         details={"file": file})


class UnknownCweError(CorpusError):
    """Raised for CWE ids outside the category table."""

    def __init__(self, cwe_id: str) -> None:
        super().__init__(f"Unknown CWE {cwe_id}", details={"cwe_id": cwe_id})


# Prompt Errors
class PromptError(HaluForgeError):
    """Base class for prompt selection and rendering errors."""
    pass


class MissingDescriptionError(PromptError):
    """Raised when a vulnerable training sample has no CVE description."""

    def __init__(self, sample_id: str) -> None:
        super().__init__(f"Sample {sample_id} has no description",
                         details={"sample_id": sample_id})


class UnknownTemplateError(PromptError):
    """Raised when a prompt template file is missing."""

    def __init__(self, kind: str) -> None:
        super().__init__(f"No template for prompt kind {kind}",
                         details={"kind": kind})


# Gateway Errors
class GatewayError(HaluForgeError):
    """Base class for model backend errors."""
    pass


class TransientBackendError(GatewayError):
    """Raised for retryable backend failures (timeouts, 429, 5xx)."""
    pass


class BackendUnavailableError(GatewayError):
    """Raised when a backend keeps failing after retries."""

    def __init__(self, name: str, reason: str = "") -> None:
        super().__init__(f"Backend {name} unavailable {reason}".rstrip(),
                         details={"name": name})


class EmptyCompletionError(GatewayError):
    """Raised when a backend returns no text."""

    def __init__(self, name: str) -> None:
        super().__init__(f"Backend {name} returned an empty completion",
                         details={"name": name})


class UnparseableVerdictError(GatewayError):
    """Raised when a classifier reply matches neither verdict."""

    def __init__(self, text: str) -> None:
        super().__init__(f"Unparseable verdict: {text[:80]!r}",
                         details={"text": text})


# Selection Errors
class SelectionError(HaluForgeError):
    """Base class for embedding and split errors."""
    pass


class DimensionMismatchError(SelectionError):
    """Raised when two vectors differ in dimension."""

    def __init__(self, left: int, right: int) -> None:
        super().__init__(f"Dimension mismatch {left} != {right}",
                         details={"left": left, "right": right})


class ZeroVectorError(SelectionError):
    """Raised when an embedding has no non-zero entry."""

    def __init__(self, text_id: str) -> None:
        super().__init__(f"Zero embedding for {text_id}",
                         details={"text_id": text_id})


class MissingVectorError(SelectionError):
    """Raised when an id has no embedding."""

    def __init__(self, item_id: str) -> None:
        super().__init__(f"No vector for {item_id}", details={"id": item_id})


class InvalidFractionError(SelectionError):
    """Raised when the selection proportion is outside (0, 1]."""

    def __init__(self, p: float) -> None:
        super().__init__(f"Selection fraction {p} outside (0, 1]",
                         details={"p": p})


# Export Errors
class ExportError(HaluForgeError):
    """Base class for fine-tuning export errors."""
    pass


class MissingReportError(ExportError):
    """Raised when a selected sample lacks a report."""

    def __init__(self, sample_id: str) -> None:
        super().__init__(f"No report for {sample_id}",
                         details={"sample_id": sample_id})


class DuplicateReportError(ExportError):
    """Raised when a sample has more than one report for a backend and prompt kind."""

    def __init__(self, sample_id: str, backend_name: str, prompt_kind: str) -> None:
        super().__init__(f"Duplicate {backend_name}/{prompt_kind} report for {sample_id}",
                         details={"sample_id": sample_id, "backend_name": backend_name,
                                  "prompt_kind": prompt_kind})


class LabelMismatchError(ExportError):
    """Raised when a report label disagrees with its sample kind."""

    def __init__(self, report_id: str) -> None:
        super().__init__(f"Label of {report_id} disagrees with sample kind",
                         details={"report_id": report_id})


class UnknownFieldError(ExportError):
    """Raised when a training config override names an unknown field."""

    def __init__(self, name: str) -> None:
        super().__init__(f"Unknown training config field {name}",
                         details={"name": name})


class ShapeMismatchError(ExportError):
    """Raised when LoRA factor shapes do not conform."""
    pass


class InvalidRankError(ExportError):
    """Raised when the LoRA rank exceeds min(d, k)."""

    def __init__(self, d: int, k: int, r: int) -> None:
        super().__init__(f"Rank {r} exceeds min({d}, {k})",
                         details={"d": d, "k": k, "r": r})


# Evaluation Errors
class EvaluationError(HaluForgeError):
    """Base class for scoring errors."""
    pass


class UnknownSampleError(EvaluationError):
    """Raised when a classification has no ground truth."""

    def __init__(self, sample_id: str) -> None:
        super().__init__(f"No ground truth for {sample_id}",
                         details={"sample_id": sample_id})


class DuplicatePredictionError(EvaluationError):
    """Raised when a sample is classified twice."""

    def __init__(self, sample_id: str) -> None:
        super().__init__(f"Duplicate prediction for {sample_id}",
                         details={"sample_id": sample_id})


class EmptyEvaluationError(EvaluationError):
    """Raised when metrics are requested over zero samples."""
    pass


# Pipeline Errors
class PipelineError(HaluForgeError):
    """Base class for orchestration errors."""
    pass


class MissingStageInputError(PipelineError):
    """Raised when a stage runs before its upstream artifacts exist."""

    def __init__(self, stage: str, artifact: str) -> None:
        super().__init__(
            f"Stage '{stage}' needs {artifact}; run the upstream stage first",
            details={"stage": stage, "artifact": artifact}
        )


class VersionMismatchError(PipelineError):
    """Raised when a run directory was written by another pipeline version."""

    def __init__(self, found: str, expected: str) -> None:
        super().__init__(
            f"Run directory stamped {found}, pipeline is {expected}",
            details={"found": found, "expected": expected}
        )


class StageError(PipelineError):
    """Wraps a failure raised inside a stage."""

    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(
            f"Stage '{stage}' failed: {cause}",
            details={"stage": stage,
                     "cause": getattr(cause, "code", type(cause).__name__)}
        )


# Storage Errors
class StorageError(HaluForgeError):
    """Base class for run directory storage errors."""
    pass


class DataNotFoundError(StorageError):
    """Raised when an artifact is not found in storage."""
    pass

"""Model backends, report generation and classification."""

from .backends import (
    MockEmbeddingBackend, MockGenerator, MockKeywordClassifier, WireClassifier,
    WireEmbeddingBackend, WireGenerator, parse_verdict,
)
from .retry import RetryPolicy
from .runner import BatchResult, classify_all, classify_report, generate_all, generate_report
from .types import BackendSpec, Classification, Label, Report

__all__ = [
    "BackendSpec", "Classification", "Label", "Report", "RetryPolicy", "BatchResult",
    "generate_report", "generate_all", "classify_report", "classify_all", "parse_verdict",
    "WireGenerator", "WireClassifier", "WireEmbeddingBackend",
    "MockGenerator", "MockKeywordClassifier", "MockEmbeddingBackend",
]

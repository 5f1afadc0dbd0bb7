"""Classification scoring and result tables."""

from .report import BackendResult, render_markdown, write_metrics
from .scoring import (
    AggregateMetrics, Breakdown, ConfusionMatrix, MetricsBundle,
    aggregate_rounds, breakdown, confusion, metrics,
)

__all__ = [
    "ConfusionMatrix", "MetricsBundle", "AggregateMetrics", "Breakdown",
    "confusion", "metrics", "aggregate_rounds", "breakdown",
    "BackendResult", "render_markdown", "write_metrics",
]

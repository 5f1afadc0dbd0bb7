"""Operational metrics tracking for HaluForge runs."""

from typing import Dict, Any, List, Optional
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
import threading


class MetricType(Enum):
    """Types of metrics that can be tracked."""
    COUNTER = "counter"
    GAUGE = "gauge"
    HISTOGRAM = "histogram"


@dataclass
class MetricValue:
    """Represents a single metric measurement."""
    value: float
    timestamp: datetime = field(default_factory=datetime.now)
    labels: Dict[str, str] = field(default_factory=dict)


class PipelineMetric:
    """A named series of measurements."""

    def __init__(
        self,
        name: str,
        type: MetricType,
        description: str,
        unit: str = ""
    ):
        self.name = name
        self.type = type
        self.description = description
        self.unit = unit
        self._values: List[MetricValue] = []
        self._lock = threading.Lock()

    def record(self, value: float, **labels) -> None:
        """Record a new metric value."""
        with self._lock:
            self._values.append(MetricValue(value=value, labels=labels))

    def get_latest(self) -> Optional[MetricValue]:
        """Get the most recent metric value."""
        return self._values[-1] if self._values else None

    def get_values(self, **labels) -> List[MetricValue]:
        """Get recorded values, optionally filtered by labels."""
        with self._lock:
            values = self._values.copy()
        if not labels:
            return values
        return [
            v for v in values
            if all(v.labels.get(k) == want for k, want in labels.items())
        ]

    def total(self, **labels) -> float:
        return sum(v.value for v in self.get_values(**labels))


class MetricsRegistry:
    """Central registry for all run metrics."""

    def __init__(self):
        self._metrics: Dict[str, PipelineMetric] = {}

    def register(self, metric: PipelineMetric) -> None:
        """Register a new metric."""
        if metric.name in self._metrics:
            raise ValueError(f"Metric {metric.name} already registered")
        self._metrics[metric.name] = metric

    def get_metric(self, name: str) -> PipelineMetric:
        """Get a metric by name."""
        if name not in self._metrics:
            raise KeyError(f"Metric {name} not found")
        return self._metrics[name]

    def get_all_metrics(self) -> Dict[str, PipelineMetric]:
        """Get all registered metrics."""
        return self._metrics.copy()

    def record(self, name: str, value: float, **labels) -> None:
        """Record a value for a named metric."""
        self.get_metric(name).record(value, **labels)

    def increment(self, name: str, **labels) -> None:
        self.record(name, 1.0, **labels)


DEFAULT_METRICS = (
    ("patch_fetches", MetricType.COUNTER, "Patch fetcher invocations", ""),
    ("patch_cache_hits", MetricType.COUNTER, "Patches served from the cache", ""),
    ("backend_calls", MetricType.COUNTER, "Backend requests issued", ""),
    ("backend_retries", MetricType.COUNTER, "Backend requests retried", ""),
    ("backend_failures", MetricType.COUNTER, "Items failed after retries", ""),
    ("item_errors", MetricType.COUNTER, "Items failed outside the backend", ""),
    ("reports_over_limit", MetricType.COUNTER, "Reports above the word limit", ""),
    ("stage_latency", MetricType.HISTOGRAM, "Stage wall time", "seconds"),
)


def default_registry() -> MetricsRegistry:
    """Registry preloaded with the pipeline's counters."""
    registry = MetricsRegistry()
    for name, type_, description, unit in DEFAULT_METRICS:
        registry.register(PipelineMetric(name, type_, description, unit))
    return registry

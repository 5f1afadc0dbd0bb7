"""Stage monitoring for HaluForge runs."""

from typing import Dict, Any, Iterator
from contextlib import contextmanager
from time import perf_counter

from loguru import logger

from .metrics import MetricsRegistry


class StageMonitor:
    """Logs stage boundaries and tracks their latency."""

    def __init__(self, metrics_registry: MetricsRegistry):
        self.metrics_registry = metrics_registry

    @contextmanager
    def track(self, stage: str, **labels) -> Iterator[None]:
        """Context manager measuring one stage execution."""
        log = logger.bind(stage=stage, **labels)
        log.info("stage {} started", stage)
        start_time = perf_counter()
        status = "failed"
        try:
            yield
            status = "completed"
        finally:
            duration = perf_counter() - start_time
            self.metrics_registry.record("stage_latency", duration,
                                         stage=stage, status=status)
            if status == "completed":
                log.info("stage {} completed in {:.3f}s", stage, duration)
            else:
                log.error("stage {} failed after {:.3f}s", stage, duration)

    def summary(self) -> Dict[str, Any]:
        """Summarize every metric that has values."""
        report: Dict[str, Any] = {}
        for name, metric in self.metrics_registry.get_all_metrics().items():
            values = [v.value for v in metric.get_values()]
            if not values:
                continue
            report[name] = {
                "type": metric.type.value,
                "min": min(values),
                "max": max(values),
                "avg": sum(values) / len(values),
                "total": sum(values),
                "samples": len(values)
            }
        return report

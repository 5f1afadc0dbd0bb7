"""Report generation and classification with retries and bounded parallelism."""

import asyncio
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Awaitable, Callable, Dict, Generic, Iterable, List, Mapping, Optional, Sequence, TypeVar

from loguru import logger

from ..core.errors import (
    BackendUnavailableError, EmptyCompletionError, GatewayError, TransientBackendError,
    ValidationError,
)
from ..core.interfaces import ClassifierBackend, GeneratorBackend
from ..core.metrics import MetricsRegistry
from ..corpus.samples import Sample
from ..prompts.engine import RenderedPrompt
from .retry import RetryPolicy, call_with_retry
from .types import Classification, Label, Report

T = TypeVar("T")
R = TypeVar("R")


@dataclass
class BatchResult(Generic[T]):
    """Successes in input order, failures keyed by item id."""
    items: List[T] = field(default_factory=list)
    failures: Dict[str, Exception] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


async def _call(backend_name: str, fn: Callable[[], Awaitable[R]], retry: RetryPolicy,
                metrics: Optional[MetricsRegistry], label: str) -> R:
    def on_retry(_attempt: int) -> None:
        if metrics:
            metrics.increment("backend_retries", backend=backend_name)

    async def counted() -> R:
        if metrics:
            metrics.increment("backend_calls", backend=backend_name)
        return await fn()

    try:
        return await call_with_retry(counted, retry, label=label, on_retry=on_retry)
    except TransientBackendError as e:
        raise BackendUnavailableError(backend_name, f"after {retry.max_attempts} attempts: {e.message}") from e


async def generate_report(backend: GeneratorBackend, prompt: RenderedPrompt, sample: Sample,
                          retry: Optional[RetryPolicy] = None,
                          metrics: Optional[MetricsRegistry] = None) -> Report:
    """One report for one sample. The label comes from the sample kind only.

    Raises:
        BackendUnavailableError: still failing after retries
        EmptyCompletionError: blank completion
    """
    if prompt.sample_id and prompt.sample_id != sample.sample_id:
        raise ValidationError(f"prompt for {prompt.sample_id} used with {sample.sample_id}")
    text = await _call(backend.name, lambda: backend.complete(prompt.message),
                       retry or RetryPolicy(), metrics, f"{backend.name}/{sample.sample_id}")
    if not text or not text.strip():
        raise EmptyCompletionError(backend.name)

    report = Report(
        report_id=Report.make_id(sample.sample_id, backend.name, prompt.kind, prompt.phase),
        sample_id=sample.sample_id,
        backend_name=backend.name,
        prompt_kind=prompt.kind,
        text=text,
        label=Label.for_kind(sample.kind),
        phase=prompt.phase,
    )
    if report.over_limit:
        logger.warning("{}: {} words, over the limit", report.report_id, report.word_count)
        if metrics:
            metrics.increment("reports_over_limit", backend=backend.name)
    return report


async def _bounded(keys: Sequence[str], work: Callable[[int], Awaitable[T]],
                   max_in_flight: int, metrics: Optional[MetricsRegistry],
                   backend_name: str) -> BatchResult[T]:
    semaphore = asyncio.Semaphore(max(1, max_in_flight))

    async def one(index: int):
        async with semaphore:
            try:
                return await work(index), None
            except GatewayError as e:
                logger.error("{}: {}", keys[index], e.message)
                if metrics:
                    metrics.increment("backend_failures", backend=backend_name)
                return None, e
            except Exception as e:
                logger.opt(exception=e).error("{}: {}: {}", keys[index], type(e).__name__, e)
                if metrics:
                    metrics.increment("item_errors", backend=backend_name)
                return None, e

    outcomes = await asyncio.gather(*(one(i) for i in range(len(keys))))
    result: BatchResult[T] = BatchResult()
    for key, (item, error) in zip(keys, outcomes):
        if error is not None:
            result.failures[key] = error
        else:
            result.items.append(item)
    return result


async def generate_all(backend: GeneratorBackend, prompts: Sequence[RenderedPrompt],
                       samples: Mapping[str, Sample], max_in_flight: int = 4,
                       retry: Optional[RetryPolicy] = None,
                       metrics: Optional[MetricsRegistry] = None) -> BatchResult[Report]:
    """Generate a report per prompt, at most `max_in_flight` at a time."""
    ids = [f"{p.sample_id}|{p.phase.value}" for p in prompts]
    if len(set(ids)) != len(ids):
        raise ValidationError("prompts must be unique per sample and phase")
    policy = retry or RetryPolicy()

    async def work(index: int) -> Report:
        prompt = prompts[index]
        return await generate_report(backend, prompt, samples[prompt.sample_id], policy, metrics)

    return await _bounded(ids, work, max_in_flight, metrics, backend.name)


async def classify_report(backend: ClassifierBackend, report: Report,
                          retry: Optional[RetryPolicy] = None,
                          metrics: Optional[MetricsRegistry] = None) -> Classification:
    """Classify a report; positive means the source sample is judged vulnerable.

    Raises:
        BackendUnavailableError: still failing after retries
        UnparseableVerdictError: reply names no verdict
    """
    if not report.text.strip():
        raise ValidationError(f"report {report.report_id} has no text")
    verdict = await _call(backend.name, lambda: backend.judge(report.text),
                          retry or RetryPolicy(), metrics, f"{backend.name}/{report.report_id}")
    return Classification(
        sample_id=report.sample_id,
        predicted=Label.POSITIVE if verdict.positive else Label.NEGATIVE,
        backend_name=backend.name,
        score=verdict.score,
        report_id=report.report_id,
    )


async def classify_all(backend: ClassifierBackend, reports: Sequence[Report],
                       max_in_flight: int = 4, retry: Optional[RetryPolicy] = None,
                       metrics: Optional[MetricsRegistry] = None) -> BatchResult[Classification]:
    """Classify every report, at most `max_in_flight` at a time."""
    policy = retry or RetryPolicy()

    async def work(index: int) -> Classification:
        return await classify_report(backend, reports[index], policy, metrics)

    return await _bounded([r.report_id for r in reports], work, max_in_flight,
                          metrics, backend.name)


class JsonLinesStore(Generic[T]):
    """Append-only JSON Lines file of records with `to_dict`/`from_dict`."""

    def __init__(self, path: Path, loader: Callable[[dict], T], key: Callable[[T], str]):
        self.path = Path(path)
        self._loader = loader
        self._key = key

    def read(self) -> List[T]:
        if not self.path.exists():
            return []
        records = []
        with open(self.path, "r", encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    records.append(self._loader(json.loads(line)))
        return records

    def keys(self) -> set:
        return {self._key(record) for record in self.read()}

    def append(self, records: Iterable[T]) -> int:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        written = 0
        with open(self.path, "a", encoding="utf-8") as f:
            for record in records:
                f.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
                written += 1
        return written

    def rewrite(self, records: Iterable[T]) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w", encoding="utf-8") as f:
            for record in records:
                f.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")


def report_store(path: Path) -> JsonLinesStore[Report]:
    return JsonLinesStore(path, Report.from_dict, lambda r: r.report_id)


def classification_store(path: Path) -> JsonLinesStore[Classification]:
    return JsonLinesStore(path, Classification.from_dict,
                          lambda c: f"{c.backend_name}|{c.sample_id}")

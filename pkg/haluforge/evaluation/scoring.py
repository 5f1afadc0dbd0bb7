"""Confusion counts, metrics and cross-round aggregation."""

from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from ..core.errors import DuplicatePredictionError, EmptyEvaluationError, UnknownSampleError
from ..corpus.cwe import categorize_cwe
from ..gateway.types import Classification, Label
from ..selection.partition import CwePartition

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def complement(self) -> "ConfusionMatrix":
        """Counts after flipping every prediction."""
        return ConfusionMatrix(tp=self.fn, tn=self.fp, fp=self.tn, fn=self.tp)

    def to_dict(self) -> Dict[str, int]:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}


@dataclass(frozen=True)
class MetricsBundle:
    """Scores on the [0, 1] scale. Zero denominators give 0 and a flag."""
    accuracy: float
    precision: float
    recall: float
    f1: float
    degenerate_flags: FrozenSet[str] = frozenset()
    confusion: Optional[ConfusionMatrix] = None

    def value(self, name: str) -> float:
        return getattr(self, name)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {name: self.value(name) for name in METRIC_NAMES}
        data["degenerate_flags"] = sorted(self.degenerate_flags)
        if self.confusion is not None:
            data["confusion"] = self.confusion.to_dict()
        return data


@dataclass(frozen=True)
class MetricAggregate:
    gmean: float
    max_up: float
    max_down: float
    rounds: tuple
    flags: FrozenSet[str] = frozenset()

    def to_dict(self) -> Dict[str, Any]:
        return {"gmean": self.gmean, "max_up": self.max_up, "max_down": self.max_down,
                "rounds": list(self.rounds), "flags": sorted(self.flags)}


@dataclass(frozen=True)
class AggregateMetrics:
    per_metric: Dict[str, MetricAggregate]

    def __getattr__(self, name: str) -> MetricAggregate:
        if name in METRIC_NAMES:
            return self.per_metric[name]
        raise AttributeError(name)

    def to_dict(self) -> Dict[str, Any]:
        return {name: self.per_metric[name].to_dict() for name in METRIC_NAMES}


def confusion(classifications: Iterable[Classification],
              truth: Mapping[str, Label]) -> ConfusionMatrix:
    """Count outcomes, positive being the vulnerable class.

    Raises:
        UnknownSampleError: no truth label for a classified id
        DuplicatePredictionError: an id classified twice
    """
    seen = set()
    tp = tn = fp = fn = 0
    for item in classifications:
        if item.sample_id not in truth:
            raise UnknownSampleError(item.sample_id)
        if item.sample_id in seen:
            raise DuplicatePredictionError(item.sample_id)
        seen.add(item.sample_id)
        actual = truth[item.sample_id] is Label.POSITIVE
        predicted = item.predicted is Label.POSITIVE
        if predicted and actual:
            tp += 1
        elif predicted:
            fp += 1
        elif actual:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)


def _ratio(numerator: float, denominator: float, flag: str, flags: set) -> float:
    if denominator == 0:
        flags.add(flag)
        return 0.0
    return numerator / denominator


def metrics(cm: ConfusionMatrix) -> MetricsBundle:
    """Accuracy, precision, recall and F1 of a confusion matrix.

    Raises:
        EmptyEvaluationError: zero samples
    """
    if cm.total == 0:
        raise EmptyEvaluationError("No evaluated samples")
    flags: set = set()
    accuracy = (cm.tp + cm.tn) / cm.total
    precision = _ratio(cm.tp, cm.tp + cm.fp, "precision_zero_denominator", flags)
    recall = _ratio(cm.tp, cm.tp + cm.fn, "recall_zero_denominator", flags)
    f1 = _ratio(2 * precision * recall, precision + recall, "f1_zero_denominator", flags)
    return MetricsBundle(accuracy, precision, recall, f1, frozenset(flags), cm)


def _aggregate(values: Sequence[float]) -> MetricAggregate:
    array = np.asarray(values, dtype=np.float64)
    low, high = float(array.min()), float(array.max())
    flags = frozenset()
    if low <= 0.0:
        gmean = 0.0
        flags = frozenset({"zero_round"})
    else:
        gmean = float(np.exp(np.mean(np.log(array))))
        gmean = min(high, max(low, gmean))
    return MetricAggregate(
        gmean=gmean,
        max_up=max(0.0, high - gmean),
        max_down=max(0.0, gmean - low),
        rounds=tuple(float(v) for v in values),
        flags=flags,
    )


def aggregate_rounds(rounds: Sequence[MetricsBundle]) -> AggregateMetrics:
    """Geometric mean of each metric with its largest deviations either way."""
    if not rounds:
        raise EmptyEvaluationError("No rounds to aggregate")
    return AggregateMetrics({
        name: _aggregate([bundle.value(name) for bundle in rounds])
        for name in METRIC_NAMES
    })


@dataclass
class Breakdown:
    """Metrics per CWE category and a predictable verdict per unseen CWE."""
    per_category: Dict[str, MetricsBundle] = field(default_factory=dict)
    unseen: Dict[str, bool] = field(default_factory=dict)

    @property
    def unseen_accuracy(self) -> Optional[float]:
        if not self.unseen:
            return None
        return sum(self.unseen.values()) / len(self.unseen)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "per_category": {k: v.to_dict() for k, v in sorted(self.per_category.items())},
            "unseen": dict(sorted(self.unseen.items())),
            "unseen_accuracy": self.unseen_accuracy,
        }


def breakdown(classifications: Sequence[Classification], truth: Mapping[str, Label],
              cwe_map: Mapping[str, str], partition: CwePartition) -> Breakdown:
    """Per-category metrics and, for unseen CWEs, whether the positive was caught.

    Raises:
        UnknownCweError: a CWE outside the category table
    """
    groups: Dict[str, List[Classification]] = {}
    result = Breakdown()
    for item in classifications:
        if item.sample_id not in cwe_map:
            raise UnknownSampleError(item.sample_id)
        cwe_id = cwe_map[item.sample_id]
        groups.setdefault(categorize_cwe(cwe_id).value, []).append(item)
        if partition.is_unseen(cwe_id) and truth.get(item.sample_id) is Label.POSITIVE:
            result.unseen[cwe_id] = item.predicted is Label.POSITIVE

    for category, items in groups.items():
        result.per_category[category] = metrics(confusion(items, truth))
    return result

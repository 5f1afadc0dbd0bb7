"""metrics.json / metrics.md rendering."""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from .scoring import AggregateMetrics, Breakdown, MetricsBundle, METRIC_NAMES


@dataclass
class BackendResult:
    """Everything scored for one (backend, prompt kind)."""
    backend: str
    prompt_kind: str
    rounds: List[MetricsBundle] = field(default_factory=list)
    aggregate: Optional[AggregateMetrics] = None
    breakdowns: List[Breakdown] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "prompt_kind": self.prompt_kind,
            "rounds": [bundle.to_dict() for bundle in self.rounds],
            "aggregate": self.aggregate.to_dict() if self.aggregate else None,
            "breakdown": [b.to_dict() for b in self.breakdowns],
        }


def metrics_document(results: List[BackendResult], mode: str = "diverse") -> Dict[str, Any]:
    return {
        "mode": mode,
        "backends": {r.backend: r.to_dict() for r in sorted(results, key=lambda r: r.backend)},
    }


def dump_metrics_json(results: List[BackendResult], mode: str = "diverse") -> str:
    return json.dumps(metrics_document(results, mode), sort_keys=True, indent=2) + "\n"


def _cell(aggregate: AggregateMetrics, name: str) -> str:
    metric = aggregate.per_metric[name]
    return (f"{metric.gmean * 100:.2f} "
            f"(+{metric.max_up * 100:.2f}/-{metric.max_down * 100:.2f})")


_PROMPT_LABELS = {"to": "TO", "ro": "RO", "costar": "CO-STAR"}


def render_markdown(results: List[BackendResult]) -> str:
    """One row per backend: geometric means in percent with deviations."""
    lines = [
        "| LLM | Prompt | Accuracy | Precision | Recall | F1 |",
        "|---|---|---|---|---|---|",
    ]
    for result in sorted(results, key=lambda r: r.backend):
        if result.aggregate is None:
            continue
        cells = [_cell(result.aggregate, name) for name in METRIC_NAMES]
        prompt = _PROMPT_LABELS.get(result.prompt_kind, result.prompt_kind)
        lines.append(f"| {result.backend} | {prompt} | " + " | ".join(cells) + " |")

    unseen_rows = []
    for result in sorted(results, key=lambda r: r.backend):
        for index, part in enumerate(result.breakdowns):
            if part.unseen:
                caught = sum(part.unseen.values())
                unseen_rows.append(
                    f"| {result.backend} | {index} | {caught}/{len(part.unseen)} | "
                    f"{part.unseen_accuracy * 100:.2f} |")
    if unseen_rows:
        lines += ["", "| LLM | Round | Unseen CWEs predicted | Accuracy |",
                  "|---|---|---|---|"] + unseen_rows
    return "\n".join(lines) + "\n"


def write_metrics(run_dir: Path, results: List[BackendResult], mode: str = "diverse") -> None:
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "metrics.json").write_text(dump_metrics_json(results, mode), encoding="utf-8")
    (run_dir / "metrics.md").write_text(render_markdown(results), encoding="utf-8")

"""Fine-tuning dataset export."""

import json
from collections import Counter
from dataclasses import dataclass, asdict, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from loguru import logger

from ..core.errors import (
    DuplicateReportError, ExportError, LabelMismatchError, MissingReportError, ValidationError,
)
from ..corpus.samples import Sample
from ..gateway.types import Label, Report
from ..prompts.engine import instruction_text
from ..selection.diverse import SplitRound

REPORT_FILTER_ALL = "all"
INPUT_REPORT = "report"
INPUT_CODE = "code"


@dataclass(frozen=True)
class TrainRecord:
    instruction: str
    input: str
    output: str

    def __post_init__(self):
        if self.output not in (Label.POSITIVE.value, Label.NEGATIVE.value):
            raise ValidationError(f"output must be positive or negative, got {self.output!r}")
        if not self.input.strip():
            raise ValidationError("record input cannot be empty")

    def to_dict(self) -> Dict[str, str]:
        return asdict(self)


@dataclass
class ExportSet:
    """Records of one round with the report (or sample) id behind each."""
    round_index: int
    train: List[TrainRecord] = field(default_factory=list)
    eval: List[TrainRecord] = field(default_factory=list)
    train_ids: List[str] = field(default_factory=list)
    eval_ids: List[str] = field(default_factory=list)


def _index_reports(reports: Sequence[Report], report_filter: str) -> Dict[str, List[Report]]:
    index: Dict[str, List[Report]] = {}
    for report in reports:
        if report_filter != REPORT_FILTER_ALL and report.backend_name != report_filter:
            continue
        index.setdefault(report.sample_id, []).append(report)
    return index


def _records_for(sample_id: str, samples: Mapping[str, Sample],
                 index: Dict[str, List[Report]], combos: set, instruction: str,
                 input_source: str) -> List[Tuple[str, TrainRecord]]:
    sample = samples[sample_id]
    expected = Label.for_kind(sample.kind)
    if input_source == INPUT_CODE:
        return [(sample_id, TrainRecord(instruction, sample.text, expected.value))]

    chosen = index.get(sample_id, [])
    have = Counter((r.backend_name, r.prompt_kind) for r in chosen)
    if not chosen or set(have) != combos:
        raise MissingReportError(sample_id)
    for (backend_name, prompt_kind), count in sorted(have.items()):
        if count != 1:
            raise DuplicateReportError(sample_id, backend_name, prompt_kind.value)
    out = []
    for report in chosen:
        if report.label is not expected:
            raise LabelMismatchError(report.report_id)
        out.append((report.report_id, TrainRecord(instruction, report.text, report.label.value)))
    return out


def export_training_set(reports: Sequence[Report], split: SplitRound,
                        samples: Mapping[str, Sample], report_filter: str = REPORT_FILTER_ALL,
                        input_source: str = INPUT_REPORT,
                        instruction: Optional[str] = None,
                        eval_reports: Optional[Sequence[Report]] = None) -> ExportSet:
    """Training records for the selected ids, evaluation records for the rest.

    With `report_filter="all"` each sample contributes one record per
    (backend, prompt kind); a backend name keeps that backend's reports only.
    With `input_source="code"` each sample contributes its code once.
    Held-out records come from `eval_reports` when given, so evaluation
    text never carries the CVE description.

    Raises:
        MissingReportError: a sample lacks a report for some (backend, kind)
        DuplicateReportError: a sample has two reports for one (backend, kind)
        LabelMismatchError: a report label disagrees with its sample kind
    """
    if input_source not in (INPUT_REPORT, INPUT_CODE):
        raise ValidationError(f"unknown input source {input_source!r}")
    if not split.selected_ids:
        raise ExportError("refusing to export an empty training set",
                          details={"round_index": split.round_index})
    instruction = instruction if instruction is not None else instruction_text()
    index = _index_reports(reports, report_filter)
    combos = {(r.backend_name, r.prompt_kind) for rs in index.values() for r in rs}
    eval_index = _index_reports(eval_reports, report_filter) if eval_reports is not None else index

    result = ExportSet(round_index=split.round_index)
    for sample_id in split.selected_ids:
        for record_id, record in _records_for(sample_id, samples, index, combos,
                                              instruction, input_source):
            result.train_ids.append(record_id)
            result.train.append(record)
    for sample_id in split.held_out_ids:
        for record_id, record in _records_for(sample_id, samples, eval_index, combos,
                                              instruction, input_source):
            result.eval_ids.append(record_id)
            result.eval.append(record)
    return result


def _write_jsonl(path: Path, records: Sequence[TrainRecord]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")


def write_export(export: ExportSet, out_dir: Path, extra: Optional[Dict[str, Any]] = None) -> Path:
    """Write train.jsonl, eval.jsonl, the train.json array and manifest.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_jsonl(out_dir / "train.jsonl", export.train)
    _write_jsonl(out_dir / "eval.jsonl", export.eval)
    (out_dir / "train.json").write_text(
        json.dumps([r.to_dict() for r in export.train], sort_keys=True, indent=2,
                   ensure_ascii=False) + "\n", encoding="utf-8")
    manifest = {
        "round_index": export.round_index,
        "train_count": len(export.train),
        "eval_count": len(export.eval),
        "train_ids": export.train_ids,
        "eval_ids": export.eval_ids,
        "files": {"train": "train.jsonl", "eval": "eval.jsonl", "train_array": "train.json"},
    }
    manifest.update(extra or {})
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    logger.info("round {}: {} train / {} eval records -> {}", export.round_index,
                len(export.train), len(export.eval), out_dir)
    return out_dir

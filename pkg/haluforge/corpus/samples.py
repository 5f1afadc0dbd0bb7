"""Paired vulnerable/fixed sample construction."""

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from loguru import logger

from ..core.errors import NoTouchedFunctionError, UnbalancedBracesError
from .diff import FilePatch, Hunk, PatchDocument, apply_hunks_located
from .functions import FN_SIGNATURE, FunctionSpan, extract_functions, mask_source
from .manifest import CveEntry

PROVENANCE = "// file: {path}"
FRAGMENT_NAME = "<fragment>"


class SampleKind(str, Enum):
    VULNERABLE = "vulnerable"
    FIXED = "fixed"


@dataclass(frozen=True)
class Sample:
    """One labeled code unit built from the functions a patch touches."""
    sample_id: str
    cve_id: str
    cwe_id: str
    kind: SampleKind
    functions: Tuple[FunctionSpan, ...]
    description: str = ""

    @property
    def loc(self) -> int:
        return sum(span.line_count for span in self.functions)

    @property
    def files(self) -> List[str]:
        seen: List[str] = []
        for span in self.functions:
            if span.file_path not in seen:
                seen.append(span.file_path)
        return seen

    @property
    def text(self) -> str:
        """Function texts grouped per file, each group under a provenance line."""
        out: List[str] = []
        for path in self.files:
            out.append(PROVENANCE.format(path=path))
            out.extend(span.text for span in self.functions if span.file_path == path)
        return "\n".join(out)

    def to_dict(self) -> Dict[str, Any]:
        files = []
        for path in self.files:
            files.append({
                "path": path,
                "functions": [
                    {"name": s.name, "start_line": s.start_line,
                     "end_line": s.end_line, "text": s.text, "complete": s.complete}
                    for s in self.functions if s.file_path == path
                ],
            })
        return {
            "sample_id": self.sample_id,
            "cve_id": self.cve_id,
            "cwe_id": self.cwe_id,
            "kind": self.kind.value,
            "description": self.description,
            "files": files,
            "loc": self.loc,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Sample":
        functions = tuple(
            FunctionSpan.from_dict(fn, file_path=group["path"])
            for group in data["files"] for fn in group["functions"]
        )
        return cls(
            sample_id=data["sample_id"],
            cve_id=data["cve_id"],
            cwe_id=data["cwe_id"],
            kind=SampleKind(data["kind"]),
            functions=functions,
            description=data.get("description", ""),
        )


def sample_id_for(cve_id: str, kind: SampleKind) -> str:
    return f"{cve_id}:{'vuln' if kind is SampleKind.VULNERABLE else 'fixed'}"


def _ordered(spans: Iterable[FunctionSpan]) -> List[FunctionSpan]:
    unique = {(s.file_path, s.start_line, s.end_line): s for s in spans}
    return [unique[key] for key in sorted(unique)]


def _touched(spans: Sequence[FunctionSpan], lines: Sequence[int]) -> List[FunctionSpan]:
    return [s for s in spans if any(s.start_line <= n <= s.end_line for n in lines)]


def _full_file(file_patch: FilePatch, source: str) -> Tuple[List[FunctionSpan], List[FunctionSpan]]:
    path = file_patch.path
    post, placements = apply_hunks_located(source, file_patch.hunks, path)
    pre_spans = extract_functions(source, path)
    post_spans = extract_functions(post, path)
    vulnerable: List[FunctionSpan] = []
    fixed: List[FunctionSpan] = []

    for index, (hunk, placement) in enumerate(zip(file_patch.hunks, placements)):
        old_lines = [placement.old_index + off + 1 for off in hunk.changed_offsets(True)]
        new_lines = [placement.new_index + off + 1 for off in hunk.changed_offsets(False)]
        before = _touched(pre_spans, old_lines)
        after = _touched(post_spans, new_lines)
        if not before and not after:
            logger.warning("{} hunk {}: outside any function, skipped", path, index)
            continue
        vulnerable.extend(before)
        fixed.extend(after)
    return vulnerable, fixed


def _fragment_spans(lines: List[str], first_line: int, touched: List[int],
                    path: str, section: str) -> List[FunctionSpan]:
    """Functions of a hunk side, or the whole side as an incomplete region."""
    if not lines:
        return []
    text = "\n".join(lines)
    try:
        spans = extract_functions(text, path)
    except UnbalancedBracesError:
        spans = []
    hit = _touched(spans, [t + 1 for t in touched])
    if hit:
        shift = first_line - 1
        return [FunctionSpan(path, s.name, s.start_line + shift, s.end_line + shift,
                             s.text, complete=True) for s in hit]

    inside = [lines[t] for t in touched if lines[t].strip()]
    if inside and all(not line[0].isspace() for line in inside):
        raise NoTouchedFunctionError(path)

    match = FN_SIGNATURE.search(mask_source(text)) or FN_SIGNATURE.search(section)
    name = match.group(2) if match else FRAGMENT_NAME
    return [FunctionSpan(path, name, first_line, first_line + len(lines) - 1,
                         text, complete=False)]


def _fallback_file(file_patch: FilePatch) -> Tuple[List[FunctionSpan], List[FunctionSpan]]:
    path = file_patch.path
    vulnerable: List[FunctionSpan] = []
    fixed: List[FunctionSpan] = []
    for hunk in file_patch.hunks:
        vulnerable.extend(_fragment_spans(
            hunk.old_lines, max(1, hunk.old_start), hunk.changed_offsets(True),
            path, hunk.section))
        fixed.extend(_fragment_spans(
            hunk.new_lines, max(1, hunk.new_start), hunk.changed_offsets(False),
            path, hunk.section))
    return vulnerable, fixed


def _source_for(file_patch: FilePatch, pre_sources: Optional[Dict[str, str]]) -> Optional[str]:
    if not pre_sources:
        return None
    for key in (file_patch.path, file_patch.old_path):
        if key and key in pre_sources:
            return pre_sources[key].replace("\r\n", "\n")
    return None


def build_samples(entry: CveEntry, patch: PatchDocument,
                  pre_sources: Optional[Dict[str, str]] = None,
                  description: str = "") -> Tuple[Sample, Sample]:
    """Build the vulnerable and fixed sample of one CVE record.

    Files with a pre-image in `pre_sources` yield whole functions; the rest
    are rebuilt from hunk lines alone. Files are taken in lexicographic path
    order.

    Raises:
        HunkAnchorMismatchError: hunk context missing from a pre-image
        NoTouchedFunctionError: a side ends up with no function
    """
    vulnerable: List[FunctionSpan] = []
    fixed: List[FunctionSpan] = []

    for file_patch in sorted(patch.files, key=lambda f: f.path):
        source = _source_for(file_patch, pre_sources)
        if source is not None:
            before, after = _full_file(file_patch, source)
        else:
            before, after = _fallback_file(file_patch)
        vulnerable.extend(before)
        fixed.extend(after)

    if not vulnerable or not fixed:
        raise NoTouchedFunctionError(patch.files[0].path if patch.files else entry.cve_id)

    vuln_sample = Sample(
        sample_id=sample_id_for(entry.cve_id, SampleKind.VULNERABLE),
        cve_id=entry.cve_id,
        cwe_id=entry.cwe_id,
        kind=SampleKind.VULNERABLE,
        functions=tuple(_ordered(vulnerable)),
        description=description,
    )
    fixed_sample = Sample(
        sample_id=sample_id_for(entry.cve_id, SampleKind.FIXED),
        cve_id=entry.cve_id,
        cwe_id=entry.cwe_id,
        kind=SampleKind.FIXED,
        functions=tuple(_ordered(fixed)),
    )
    if vuln_sample.text == fixed_sample.text:
        logger.warning("{}: patch changes no code (NoChange)", entry.cve_id)
    return vuln_sample, fixed_sample


def touched_hunks(patch: PatchDocument) -> List[Hunk]:
    """All hunks of a patch in the order samples list their files."""
    return [h for f in sorted(patch.files, key=lambda f: f.path) for h in f.hunks]


class SampleStore:
    """JSON Lines store of samples."""

    def __init__(self, path: Path):
        self.path = Path(path)

    def exists(self) -> bool:
        return self.path.exists()

    def write(self, samples: Iterable[Sample]) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w", encoding="utf-8") as f:
            for sample in samples:
                f.write(json.dumps(sample.to_dict(), sort_keys=True) + "\n")

    def read(self) -> List[Sample]:
        samples = []
        with open(self.path, "r", encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    samples.append(Sample.from_dict(json.loads(line)))
        return samples

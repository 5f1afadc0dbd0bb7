"""Corpus census."""

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

from .cwe import categorize_cwe
from .manifest import CveEntry
from .samples import Sample, SampleKind


@dataclass(frozen=True)
class DatasetStats:
    """Corpus size figures.

    `functions_from_sources` is False when any vulnerable sample was rebuilt
    from hunk lines only; function and LOC totals are then lower bounds.
    """
    n_records: int = 0
    n_samples: int = 0
    n_functions: int = 0
    n_loc: int = 0
    n_cwes: int = 0
    n_programs: int = 0
    per_cwe_counts: Dict[str, int] = field(default_factory=dict)
    per_category_counts: Dict[str, int] = field(default_factory=dict)
    functions_from_sources: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_records": self.n_records,
            "n_samples": self.n_samples,
            "n_functions": self.n_functions,
            "n_loc": self.n_loc,
            "n_cwes": self.n_cwes,
            "n_programs": self.n_programs,
            "per_cwe_counts": dict(sorted(self.per_cwe_counts.items())),
            "per_category_counts": dict(sorted(self.per_category_counts.items())),
            "functions_from_sources": self.functions_from_sources,
        }


def census(samples: Sequence[Sample], entries: Sequence[CveEntry]) -> DatasetStats:
    """Count records, functions, lines, CWEs and programs.

    Functions are counted per vulnerable sample; a function shared by two
    records counts twice. Each record stands for a vulnerable and a fixed
    sample whether or not they were extracted yet.
    """
    vulnerable = [s for s in samples if s.kind is SampleKind.VULNERABLE]
    per_cwe = Counter(entry.cwe_id for entry in entries)
    per_category = Counter(categorize_cwe(entry.cwe_id).value for entry in entries)
    spans = [span for sample in vulnerable for span in sample.functions]

    return DatasetStats(
        n_records=len(entries),
        n_samples=2 * len(entries),
        n_functions=len(spans),
        n_loc=sum(span.line_count for span in spans),
        n_cwes=len(per_cwe),
        n_programs=len({entry.program.strip() for entry in entries}),
        per_cwe_counts=dict(per_cwe),
        per_category_counts=dict(per_category),
        functions_from_sources=bool(spans) and all(span.complete for span in spans),
    )


def format_census(stats: DatasetStats) -> str:
    """Plain-text table for the terminal."""
    functions = str(stats.n_functions)
    loc = str(stats.n_loc)
    if not stats.functions_from_sources:
        functions += " (skipped: sources not cached)"
        loc += " (skipped: sources not cached)"
    rows: List[str] = [
        f"records    {stats.n_records}",
        f"samples    {stats.n_samples}",
        f"functions  {functions}",
        f"loc        {loc}",
        f"cwes       {stats.n_cwes}",
        f"programs   {stats.n_programs}",
        "",
        "per CWE:",
    ]
    ranked = sorted(stats.per_cwe_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    rows.extend(f"  {cwe:<10} {count}" for cwe, count in ranked)
    rows.append("")
    rows.append("per category:")
    rows.extend(f"  {name:<18} {count}"
                for name, count in sorted(stats.per_category_counts.items()))
    return "\n".join(rows)

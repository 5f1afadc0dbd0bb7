"""Seen/unseen CWE partition."""

from collections import Counter
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Sequence

from ..corpus.manifest import CveEntry


@dataclass(frozen=True)
class CwePartition:
    """CWEs with one record are unseen; the rest are seen."""
    seen_cwes: FrozenSet[str]
    unseen_cwes: FrozenSet[str]

    def is_unseen(self, cwe_id: str) -> bool:
        return cwe_id in self.unseen_cwes

    def to_dict(self) -> Dict[str, List[str]]:
        return {"seen_cwes": sorted(self.seen_cwes), "unseen_cwes": sorted(self.unseen_cwes)}


def partition_unseen_cwe(entries: Sequence[CveEntry]) -> CwePartition:
    counts = Counter(entry.cwe_id for entry in entries)
    unseen = frozenset(cwe for cwe, count in counts.items() if count == 1)
    seen = frozenset(cwe for cwe, count in counts.items() if count > 1)
    return CwePartition(seen_cwes=seen, unseen_cwes=unseen)

"""CVE manifest ingestion, patch parsing and sample construction."""

from .census import DatasetStats, census, format_census
from .cwe import CweCategory, categorize_cwe
from .diff import Hunk, FilePatch, PatchDocument, apply_hunks, parse_unified_diff, reverse_hunks
from .fetch import FixturePatchFetcher, HttpPatchFetcher, PatchCache, fetch_all, fetch_patch
from .functions import FunctionSpan, extract_functions
from .manifest import CveEntry, parse_manifest
from .samples import Sample, SampleKind, SampleStore, build_samples

__all__ = [
    "CveEntry", "parse_manifest",
    "Hunk", "FilePatch", "PatchDocument", "parse_unified_diff", "apply_hunks", "reverse_hunks",
    "FunctionSpan", "extract_functions",
    "Sample", "SampleKind", "SampleStore", "build_samples",
    "CweCategory", "categorize_cwe",
    "DatasetStats", "census", "format_census",
    "HttpPatchFetcher", "FixturePatchFetcher", "PatchCache", "fetch_patch", "fetch_all",
]

"""Unified diff parsing and hunk application."""

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from loguru import logger

from ..core.errors import CountMismatchError, HunkAnchorMismatchError, NoHunksError

HUNK_HEADER = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@ ?(.*)$")
GIT_HEADER = re.compile(r"^diff --git a/(\S+) b/(\S+)")
BARE_PATH = re.compile(r"^[\w.\-]+(?:/[\w.\-]+)+$|^[\w\-]+\.\w+$")


class LineMarker(str, Enum):
    """Leading marker of a hunk body line."""
    CONTEXT = " "
    REMOVED = "-"
    ADDED = "+"


@dataclass(frozen=True)
class Hunk:
    """One contiguous changed region of a file."""
    old_start: int
    old_len: int
    new_start: int
    new_len: int
    lines: Tuple[Tuple[LineMarker, str], ...]
    section: str = ""

    def count(self, marker: LineMarker) -> int:
        return sum(1 for m, _ in self.lines if m is marker)

    @property
    def removed(self) -> int:
        return self.count(LineMarker.REMOVED)

    @property
    def added(self) -> int:
        return self.count(LineMarker.ADDED)

    @property
    def old_lines(self) -> List[str]:
        return [t for m, t in self.lines if m is not LineMarker.ADDED]

    @property
    def new_lines(self) -> List[str]:
        return [t for m, t in self.lines if m is not LineMarker.REMOVED]

    @property
    def is_consistent(self) -> bool:
        context = self.count(LineMarker.CONTEXT)
        return (context + self.removed == self.old_len
                and context + self.added == self.new_len)

    @property
    def is_noop(self) -> bool:
        return self.removed == 0 and self.added == 0

    def changed_offsets(self, old_side: bool = True) -> List[int]:
        """Offsets, within one side's block, of the lines this hunk touches.

        Removed (or added) lines on that side; for a one-sided change the
        neighbouring line at the insertion point; for a pure-context hunk
        every line of the block.
        """
        own = LineMarker.REMOVED if old_side else LineMarker.ADDED
        other = LineMarker.ADDED if old_side else LineMarker.REMOVED
        offsets: List[int] = []
        insertion: List[int] = []
        position = 0
        for marker, _ in self.lines:
            if marker is other:
                insertion.append(position)
                continue
            if marker is own:
                offsets.append(position)
            position += 1
        block_len = position
        if offsets:
            return offsets
        if block_len == 0:
            return []
        if insertion:
            points = {max(0, min(block_len - 1, p - 1 if p > 0 else 0))
                      for p in insertion}
            return sorted(points)
        return list(range(block_len))

    def reversed(self) -> "Hunk":
        swap = {LineMarker.REMOVED: LineMarker.ADDED,
                LineMarker.ADDED: LineMarker.REMOVED,
                LineMarker.CONTEXT: LineMarker.CONTEXT}
        return Hunk(self.new_start, self.new_len, self.old_start, self.old_len,
                    tuple((swap[m], t) for m, t in self.lines), self.section)


@dataclass(frozen=True)
class FilePatch:
    """The hunks of one file."""
    path: str
    hunks: Tuple[Hunk, ...]
    old_path: str = ""


@dataclass(frozen=True)
class PatchDocument:
    """A parsed patch: one or more file sections."""
    cve_id: str
    files: Tuple[FilePatch, ...]
    raw_text: str = field(repr=False, default="")

    def file(self, path: str) -> Optional[FilePatch]:
        for file_patch in self.files:
            if file_patch.path == path:
                return file_patch
        return None


@dataclass(frozen=True)
class Placement:
    """Where a hunk landed: 0-based block starts in the old and new text."""
    old_index: int
    new_index: int


def _strip_prefix(path: str) -> str:
    path = path.split("\t", 1)[0].strip()
    if path.startswith(("a/", "b/")):
        return path[2:]
    return path


def _is_file_header(lines: Sequence[str], i: int) -> bool:
    return (lines[i].startswith("--- ") and i + 1 < len(lines)
            and lines[i + 1].startswith("+++ "))


def _read_hunk(lines: Sequence[str], i: int, match: "re.Match",
               path: str, index: int) -> Tuple[Hunk, int]:
    old_start = int(match.group(1))
    old_len = int(match.group(2)) if match.group(2) is not None else 1
    new_start = int(match.group(3))
    new_len = int(match.group(4)) if match.group(4) is not None else 1
    old_left, new_left = old_len, new_len
    body: List[Tuple[LineMarker, str]] = []
    n = len(lines)
    j = i + 1

    while old_left > 0 or new_left > 0:
        if j >= n or (j == n - 1 and lines[j] == ""):
            raise CountMismatchError(path, index, "(hunk truncated)")
        line = lines[j]
        if line.startswith("\\"):
            j += 1
            continue
        if HUNK_HEADER.match(line):
            raise CountMismatchError(path, index, "(hunk shorter than header)")
        # Some tools strip the single space of blank context lines.
        marker_char, text = (line[0], line[1:]) if line else (" ", "")
        if marker_char == " ":
            old_left -= 1
            new_left -= 1
            marker = LineMarker.CONTEXT
        elif marker_char == "-":
            old_left -= 1
            marker = LineMarker.REMOVED
        elif marker_char == "+":
            new_left -= 1
            marker = LineMarker.ADDED
        else:
            raise CountMismatchError(path, index, f"(bad marker {marker_char!r})")
        if old_left < 0 or new_left < 0:
            raise CountMismatchError(path, index, "(hunk longer than header)")
        body.append((marker, text))
        j += 1

    while j < n and lines[j].startswith("\\"):
        j += 1
    if j < n:
        trailing = lines[j]
        if trailing.startswith((" ", "+")) or (
                trailing.startswith("-") and trailing != "-- "
                and not _is_file_header(lines, j)):
            raise CountMismatchError(path, index, "(hunk longer than header)")

    hunk = Hunk(old_start, old_len, new_start, new_len, tuple(body),
                match.group(5).strip())
    return hunk, j


def parse_unified_diff(raw: str, cve_id: str = "") -> PatchDocument:
    """Parse a unified diff (git format-patch output included).

    Commit metadata, prose and diffstat before or between file sections are
    skipped. A hunk with no `---`/`+++` header takes its path from the last
    `diff --git` line or from a bare path line above it.

    Raises:
        NoHunksError: no hunk found
        CountMismatchError: hunk body disagrees with its header
    """
    lines = raw.replace("\r\n", "\n").split("\n")
    files: List[Tuple[str, str, List[Hunk]]] = []
    current: Optional[Tuple[str, str, List[Hunk]]] = None
    pending_path = ""
    i = 0

    while i < len(lines):
        line = lines[i]
        git = GIT_HEADER.match(line)
        if git:
            pending_path = git.group(2)
            current = None
            i += 1
            continue
        if _is_file_header(lines, i):
            old_path = _strip_prefix(lines[i][4:])
            new_path = _strip_prefix(lines[i + 1][4:])
            path = new_path if new_path != "/dev/null" else old_path
            current = (path, old_path, [])
            files.append(current)
            i += 2
            continue
        header = HUNK_HEADER.match(line)
        if header:
            if current is None:
                current = (pending_path, pending_path, [])
                files.append(current)
            hunk, i = _read_hunk(lines, i, header, current[0], len(current[2]))
            current[2].append(hunk)
            continue
        if current is None and BARE_PATH.match(line.strip()):
            pending_path = line.strip()
        i += 1

    file_patches = tuple(
        FilePatch(path=path, hunks=tuple(hunks), old_path=old_path)
        for path, old_path, hunks in files if hunks
    )
    if not file_patches:
        raise NoHunksError("Patch contains no hunks",
                           details={"cve_id": cve_id})

    logger.debug("{}: parsed {} file(s), {} hunk(s)", cve_id or "patch",
                 len(file_patches), sum(len(f.hunks) for f in file_patches))
    return PatchDocument(cve_id=cve_id, files=file_patches, raw_text=raw)


def _locate(source: List[str], block: List[str], expected: int,
            floor: int) -> Optional[int]:
    """Nearest position >= floor where block occurs, preferring `expected`."""
    size = len(block)
    if size == 0:
        return max(floor, min(expected, len(source)))
    limit = len(source) - size
    if limit < floor:
        return None
    best: Optional[int] = None
    for position in range(floor, limit + 1):
        if source[position:position + size] == block:
            if best is None or abs(position - expected) < abs(best - expected):
                best = position
            if position > expected:
                break
    return best


def apply_hunks_located(text: str, hunks: Sequence[Hunk],
                        path: str = "") -> Tuple[str, List[Placement]]:
    """Apply hunks in order, returning the new text and where each landed.

    Each hunk is tried at its stated line (adjusted by the drift of earlier
    hunks), then at the nearest offset where its old side matches.

    Raises:
        HunkAnchorMismatchError: a hunk's old side matches nowhere
    """
    source = text.split("\n")
    out: List[str] = []
    placements: List[Placement] = []
    cursor = 0
    drift = 0

    for index, hunk in enumerate(hunks):
        start = hunk.old_start if hunk.old_len == 0 else hunk.old_start - 1
        expected = max(0, start + drift)
        position = _locate(source, hunk.old_lines, expected, cursor)
        if position is None:
            raise HunkAnchorMismatchError(path, index)
        out.extend(source[cursor:position])
        placements.append(Placement(old_index=position, new_index=len(out)))
        out.extend(hunk.new_lines)
        cursor = position + len(hunk.old_lines)
        drift = position - start
    out.extend(source[cursor:])
    return "\n".join(out), placements


def apply_hunks(text: str, hunks: Sequence[Hunk], path: str = "") -> str:
    """Apply hunks to text."""
    return apply_hunks_located(text, hunks, path)[0]


def reverse_hunks(hunks: Sequence[Hunk]) -> List[Hunk]:
    """Hunks that undo `hunks`."""
    return [hunk.reversed() for hunk in hunks]

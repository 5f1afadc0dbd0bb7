"""Lightweight Rust function extraction.

Functions are found by scanning for `fn <name>` signatures and matching the
body braces on a masked copy of the source in which comments, string, byte
string, raw string and char literals are blanked out. Newlines survive the
masking so offsets and line numbers are shared with the original text.
"""

import re
from bisect import bisect_right
from dataclasses import dataclass, asdict
from typing import Any, Dict, List, Optional

from loguru import logger

from ..core.errors import UnbalancedBracesError

FN_SIGNATURE = re.compile(r"\bfn\s+(r#)?([A-Za-z_][A-Za-z0-9_]*)")
QUALIFIER_PREFIX = re.compile(
    r"^\s*(?:(?:pub(?:\s*\([^)]*\))?|const|async|unsafe|default|"
    r"extern(?:\s+\"[^\"]*\")?)\s+)*$"
)


@dataclass(frozen=True)
class FunctionSpan:
    """A function lifted out of a source file, lines 1-based inclusive.

    `complete` is False for regions rebuilt from hunk context alone, which
    need not contain a whole function.
    """
    file_path: str
    name: str
    start_line: int
    end_line: int
    text: str
    complete: bool = True

    @property
    def line_count(self) -> int:
        return self.end_line - self.start_line + 1

    def overlaps(self, first: int, last: int) -> bool:
        return self.start_line <= last and first <= self.end_line

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], file_path: str = "") -> "FunctionSpan":
        return cls(
            file_path=data.get("file_path", file_path),
            name=data["name"],
            start_line=int(data["start_line"]),
            end_line=int(data["end_line"]),
            text=data["text"],
            complete=bool(data.get("complete", True)),
        )


def _blank(chars: List[str], start: int, end: int) -> None:
    for k in range(start, min(end, len(chars))):
        if chars[k] != "\n":
            chars[k] = " "


def _raw_string_end(source: str, i: int) -> Optional[int]:
    """If a raw string starts at i (the `r`), return the index past its end."""
    j = i + 1
    hashes = 0
    while j < len(source) and source[j] == "#":
        hashes += 1
        j += 1
    if j >= len(source) or source[j] != '"':
        return None
    closing = '"' + "#" * hashes
    end = source.find(closing, j + 1)
    return len(source) if end < 0 else end + len(closing)


def mask_source(source: str) -> str:
    """Blank out comments and literals, keeping length and newlines."""
    chars = list(source)
    n = len(source)
    i = 0
    while i < n:
        c = source[i]
        nxt = source[i + 1] if i + 1 < n else ""

        if c == "/" and nxt == "/":
            end = source.find("\n", i)
            end = n if end < 0 else end
            _blank(chars, i, end)
            i = end
            continue

        if c == "/" and nxt == "*":
            # block comments nest in Rust
            depth = 1
            j = i + 2
            while j < n and depth:
                if source.startswith("/*", j):
                    depth += 1
                    j += 2
                elif source.startswith("*/", j):
                    depth -= 1
                    j += 2
                else:
                    j += 1
            _blank(chars, i, j)
            i = j
            continue

        prev = source[i - 1] if i > 0 else ""
        ident_before = prev.isalnum() or prev == "_"

        if not ident_before and (c == "r" or (c == "b" and nxt == "r")):
            r_at = i if c == "r" else i + 1
            end = _raw_string_end(source, r_at)
            if end is not None:
                _blank(chars, i, end)
                i = end
                continue

        if c == '"' or (c == "b" and nxt == '"' and not ident_before):
            j = i + (2 if c == "b" else 1)
            while j < n:
                if source[j] == "\\":
                    j += 2
                    continue
                if source[j] == '"':
                    j += 1
                    break
                j += 1
            _blank(chars, i, j)
            i = j
            continue

        if c == "'" or (c == "b" and nxt == "'" and not ident_before):
            q = i if c == "'" else i + 1
            if q + 1 < n and source[q + 1] == "\\":
                end = source.find("'", q + 2)
                if source.startswith("\\'", q + 1):
                    end = source.find("'", q + 3)
                if end >= 0:
                    _blank(chars, i, end + 1)
                    i = end + 1
                    continue
            elif q + 2 < n and source[q + 2] == "'" and source[q + 1] != "\n":
                _blank(chars, i, q + 3)
                i = q + 3
                continue
            # a lifetime or label such as 'a
            i = q + 1
            continue

        i += 1
    return "".join(chars)


class _LineIndex:
    """Offset to 1-based line lookup."""

    def __init__(self, text: str):
        self.starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def line_of(self, offset: int) -> int:
        return bisect_right(self.starts, offset)


def _body_open(masked: str, start: int) -> Optional[int]:
    """Offset of the body `{` after a signature, None for a bodiless decl."""
    depth = 0
    for j in range(start, len(masked)):
        ch = masked[j]
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif depth <= 0 and ch == ";":
            return None
        elif depth <= 0 and ch == "{":
            return j
        elif depth <= 0 and ch == "}":
            return None
    return None


def _body_close(masked: str, open_at: int) -> Optional[int]:
    depth = 0
    for j in range(open_at, len(masked)):
        ch = masked[j]
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return j
    return None


def _block_opener(lines: List[str], k: int, floor: int) -> Optional[int]:
    """Opening line of the block comment ending on line k, if it is a doc comment."""
    m = k
    while m > floor:
        text = lines[m - 1]
        if m < k and "*/" in text:
            return None
        if "/*" in text:
            opener = text.strip()
            if opener.startswith(("/**", "/*!")) and not opener.startswith("/**/"):
                return m
            return None
        m -= 1
    return None


def _leading_line(lines: List[str], masked_lines: List[str], fn_line: int,
                  fn_column: int, floor: int = 0) -> int:
    """First line of the span: qualifiers, then attributes and doc comments.

    The span never reaches back to `floor` or above.
    """
    start = fn_line
    prefix = lines[fn_line - 1][:fn_column]
    if not QUALIFIER_PREFIX.match(prefix):
        return start

    k = start - 1
    while k > floor:
        stripped = lines[k - 1].strip()
        if stripped.startswith("///") or stripped.startswith("#["):
            start = k
            k -= 1
            continue
        if stripped.endswith("*/"):
            opener = _block_opener(lines, k, floor)
            if opener is None:
                break
            start = opener
            k = opener - 1
            continue
        if stripped.endswith("]"):
            # tail of a multi-line attribute
            balance = 0
            m = k
            while m > floor:
                text = masked_lines[m - 1]
                balance += text.count("]") - text.count("[")
                if lines[m - 1].strip().startswith("#[") and balance <= 0:
                    break
                m -= 1
            if m > floor and lines[m - 1].strip().startswith("#["):
                start = m
                k = m - 1
                continue
        break
    return start


def extract_functions(source: str, file_path: str) -> List[FunctionSpan]:
    """Extract the top-level functions of a Rust source text or fragment.

    Spans are sorted by start line and never overlap; a function nested in
    another is reported only as part of its parent.

    Raises:
        UnbalancedBracesError: a signature's body never closes
    """
    source = source.replace("\r\n", "\n")
    masked = mask_source(source)
    lines = source.split("\n")
    masked_lines = masked.split("\n")
    index = _LineIndex(source)
    spans: List[FunctionSpan] = []
    position = 0

    while True:
        match = FN_SIGNATURE.search(masked, position)
        if match is None:
            break
        fn_offset = match.start()
        open_at = _body_open(masked, match.end())
        if open_at is None:
            position = match.end()
            continue
        close_at = _body_close(masked, open_at)
        fn_line = index.line_of(fn_offset)
        if close_at is None:
            raise UnbalancedBracesError(file_path, fn_line)

        fn_column = fn_offset - index.starts[fn_line - 1]
        floor = spans[-1].end_line if spans else 0
        start_line = _leading_line(lines, masked_lines, fn_line, fn_column, floor)
        end_line = index.line_of(close_at)
        spans.append(FunctionSpan(
            file_path=file_path,
            name=match.group(2),
            start_line=start_line,
            end_line=end_line,
            text="\n".join(lines[start_line - 1:end_line]),
        ))
        position = close_at + 1

    logger.debug("{}: {} function(s)", file_path, len(spans))
    return spans


def enclosing_functions(spans: List[FunctionSpan], lines: List[int]) -> List[FunctionSpan]:
    """Spans containing any of the given 1-based lines, in span order."""
    return [span for span in spans
            if any(span.start_line <= line <= span.end_line for line in lines)]

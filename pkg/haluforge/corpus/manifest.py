"""CVE manifest parsing."""

import csv
import io
import re
from dataclasses import dataclass, asdict
from typing import Dict, List

from loguru import logger

from ..core.errors import DuplicateCveError, InvalidIdError, MalformedRowError

MANIFEST_COLUMNS = ("cve_id", "cwe_id", "program", "version_note", "patch_url")

CVE_PATTERN = re.compile(r"^CVE-\d{4}-\d{4,}$")
CWE_PATTERN = re.compile(r"^CWE-\d+$")
URL_PATTERN = re.compile(r"^[a-zA-Z][a-zA-Z0-9+.-]*://\S+$")


@dataclass(frozen=True)
class CveEntry:
    """One manifest row."""
    cve_id: str
    cwe_id: str
    program: str
    version_note: str
    patch_url: str

    def to_dict(self) -> Dict[str, str]:
        return asdict(self)


def parse_manifest(text: str) -> List[CveEntry]:
    """Parse a comma-delimited manifest with a mandatory header row.

    Rows keep their order. Blank lines are ignored.

    Raises:
        MalformedRowError: wrong column count or header
        InvalidIdError: CVE/CWE pattern or patch URL violation
        DuplicateCveError: a cve_id seen twice
    """
    reader = csv.reader(io.StringIO(text.replace("\r\n", "\n")),
                        delimiter=",", quotechar='"', doublequote=True,
                        escapechar=None, skipinitialspace=False)
    entries: List[CveEntry] = []
    seen = set()
    header_seen = False

    for row in reader:
        line_no = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if not header_seen:
            if tuple(cell.strip() for cell in row) != MANIFEST_COLUMNS:
                raise MalformedRowError(line_no, len(row))
            header_seen = True
            continue
        if len(row) != len(MANIFEST_COLUMNS):
            raise MalformedRowError(line_no, len(row))

        cve_id, cwe_id, program, version_note, patch_url = (c.strip() for c in row)
        if not CVE_PATTERN.match(cve_id):
            raise InvalidIdError(line_no, cve_id)
        if not CWE_PATTERN.match(cwe_id):
            raise InvalidIdError(line_no, cwe_id)
        if not URL_PATTERN.match(patch_url):
            raise InvalidIdError(line_no, patch_url)
        if cve_id in seen:
            raise DuplicateCveError(cve_id)
        seen.add(cve_id)

        entries.append(CveEntry(cve_id, cwe_id, program, version_note, patch_url))

    logger.debug("parsed {} manifest entries", len(entries))
    return entries


def format_manifest(entries: List[CveEntry]) -> str:
    """Serialize entries back into manifest text."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(MANIFEST_COLUMNS)
    for entry in entries:
        writer.writerow([getattr(entry, column) for column in MANIFEST_COLUMNS])
    return buffer.getvalue()

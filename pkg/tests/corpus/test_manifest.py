import pytest
from pathlib import Path
from haluforge.corpus.manifest import CveEntry, format_manifest, parse_manifest
from haluforge.core.errors import DuplicateCveError, InvalidIdError, MalformedRowError

SHIPPED = Path(__file__).parents[2] / "data" / "manifest.csv"
HEADER = "cve_id,cwe_id,program,version_note,patch_url\n"
ROW = ("CVE-2018-1000657,CWE-119,standard library in rust,before 1.22.0,"
       "https://github.com/rust-lang/rust/commit/f71b37bc28326e272a37b938e835d4f99113eec2\n")


def test_parse_single_row():
    entries = parse_manifest(HEADER + ROW)
    assert entries == [CveEntry(
        cve_id="CVE-2018-1000657",
        cwe_id="CWE-119",
        program="standard library in rust",
        version_note="before 1.22.0",
        patch_url="https://github.com/rust-lang/rust/commit/f71b37bc28326e272a37b938e835d4f99113eec2",
    )]


def test_quoted_program_with_comma():
    row = ('CVE-2021-0001,CWE-416,"tokio, runtime",1.0,'
           "https://github.com/tokio-rs/tokio/commit/abc\n")
    assert parse_manifest(HEADER + row)[0].program == "tokio, runtime"


def test_blank_lines_and_crlf_are_ignored():
    entries = parse_manifest((HEADER + "\n" + ROW + "\n").replace("\n", "\r\n"))
    assert len(entries) == 1


def test_wrong_column_count():
    with pytest.raises(MalformedRowError) as exc:
        parse_manifest(HEADER + "CVE-2018-1000657,CWE-119,rust\n")
    assert exc.value.details["line_no"] == 2


def test_missing_header():
    with pytest.raises(MalformedRowError):
        parse_manifest(ROW)


@pytest.mark.parametrize("row", [
    ROW.replace("CVE-2018-1000657", "CVE-18-1"),
    ROW.replace("CWE-119", "CWE119"),
    ROW.replace("https://github.com", "github.com"),
])
def test_invalid_ids(row):
    with pytest.raises(InvalidIdError):
        parse_manifest(HEADER + row)


def test_duplicate_cve():
    with pytest.raises(DuplicateCveError):
        parse_manifest(HEADER + ROW + ROW)


def test_format_round_trip():
    entries = parse_manifest(SHIPPED.read_text(encoding="utf-8"))
    assert parse_manifest(format_manifest(entries)) == entries


def test_shipped_manifest():
    entries = parse_manifest(SHIPPED.read_text(encoding="utf-8"))
    assert len(entries) == 81
    assert entries[0].cve_id == "CVE-2015-20001"
    assert any(e.cve_id == "CVE-2018-1000657" and e.cwe_id == "CWE-119" for e in entries)

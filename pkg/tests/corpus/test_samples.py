import pytest
from loguru import logger

from haluforge.core.errors import HunkAnchorMismatchError, NoTouchedFunctionError
from haluforge.corpus.diff import apply_hunks, parse_unified_diff
from haluforge.corpus.manifest import CveEntry
from haluforge.corpus.samples import (
    Sample, SampleKind, SampleStore, build_samples, sample_id_for, touched_hunks,
)
from tests.conftest import FIXTURES, VECDEQUE_CVE, VECDEQUE_PATH


def _entry(cve_id, cwe_id="CWE-119"):
    return CveEntry(cve_id, cwe_id, "some crate", "", f"https://example.com/{cve_id}")


def _mock_patch(cve_id):
    text = (FIXTURES / "mock_corpus" / "patches" / f"{cve_id}.patch").read_text(encoding="utf-8")
    return parse_unified_diff(text, cve_id)


@pytest.fixture
def vecdeque_samples(vecdeque_entry, vecdeque_patch, vecdeque_source):
    patch = parse_unified_diff(vecdeque_patch, VECDEQUE_CVE)
    return build_samples(vecdeque_entry, patch, {VECDEQUE_PATH: vecdeque_source},
                         description="VecDeque::reserve corrupts memory.")


def test_full_file_samples(vecdeque_samples):
    vuln, fixed = vecdeque_samples
    assert vuln.sample_id == "CVE-2018-1000657:vuln"
    assert fixed.sample_id == "CVE-2018-1000657:fixed"
    assert vuln.kind is SampleKind.VULNERABLE and fixed.kind is SampleKind.FIXED
    assert vuln.cwe_id == fixed.cwe_id == "CWE-119"

    assert [s.name for s in vuln.functions] == ["reserve"]
    assert [s.name for s in fixed.functions] == ["reserve"]
    span = vuln.functions[0]
    assert (span.start_line, span.end_line, span.complete) == (66, 85, True)
    assert vuln.loc == 20
    assert "if new_cap > self.capacity() {" in vuln.text
    assert "if new_cap > old_cap {" in fixed.text
    assert vuln.text.startswith("// file: src/liballoc/vec_deque.rs\n")


def test_description_on_vulnerable_side_only(vecdeque_samples):
    vuln, fixed = vecdeque_samples
    assert vuln.description == "VecDeque::reserve corrupts memory."
    assert fixed.description == ""


def test_patch_maps_vulnerable_span_onto_fixed(vecdeque_samples, vecdeque_patch):
    vuln, fixed = vecdeque_samples
    hunks = touched_hunks(parse_unified_diff(vecdeque_patch))
    assert apply_hunks(vuln.functions[0].text, hunks) == fixed.functions[0].text


def test_anchor_mismatch_with_wrong_source(vecdeque_entry, vecdeque_patch):
    patch = parse_unified_diff(vecdeque_patch)
    with pytest.raises(HunkAnchorMismatchError):
        build_samples(vecdeque_entry, patch, {VECDEQUE_PATH: "fn other() {}\n"})


def test_fallback_complete_function():
    vuln, fixed = build_samples(_entry("CVE-2015-20001"), _mock_patch("CVE-2015-20001"))
    span = vuln.functions[0]
    assert (span.name, span.start_line, span.end_line, span.complete) == ("sift_up", 520, 527, True)
    assert fixed.functions[0].end_line == 528
    assert "hole.move_to(parent);" in fixed.text


def test_fallback_incomplete_region():
    vuln, fixed = build_samples(_entry("CVE-2020-35870", "CWE-416"), _mock_patch("CVE-2020-35870"))
    span = vuln.functions[0]
    assert span.name == "attach"
    assert not span.complete
    assert (span.start_line, span.end_line) == (60, 65)
    assert "ptr::null()" in vuln.text
    assert "None" in fixed.text


def test_top_level_change_has_no_function():
    patch = parse_unified_diff(
        "--- a/src/lib.rs\n+++ b/src/lib.rs\n@@ -1,2 +1,2 @@\n"
        "-use std::ptr;\n+use core::ptr;\n const A: u8 = 1;\n")
    with pytest.raises(NoTouchedFunctionError):
        build_samples(_entry("CVE-2021-00001"), patch)


def test_sample_id_for():
    assert sample_id_for("CVE-2019-16882", SampleKind.FIXED) == "CVE-2019-16882:fixed"


def test_store_round_trip(tmp_path, vecdeque_samples):
    store = SampleStore(tmp_path / "samples.jsonl")
    assert not store.exists()
    store.write(vecdeque_samples)
    loaded = store.read()
    assert loaded == list(vecdeque_samples)
    assert isinstance(loaded[0], Sample)


@pytest.fixture
def logged_warnings():
    messages = []
    handler = logger.add(messages.append, level="WARNING", format="{message}")
    yield messages
    logger.remove(handler)


def test_context_only_patch_changes_nothing(logged_warnings):
    source = "fn a() {\n    1\n}\n"
    patch = parse_unified_diff(
        "--- a/src/lib.rs\n+++ b/src/lib.rs\n@@ -1,3 +1,3 @@\n"
        " fn a() {\n     1\n }\n")
    vuln, fixed = build_samples(_entry("CVE-2021-00002"), patch, {"src/lib.rs": source})
    assert vuln.text == fixed.text
    assert [s.name for s in vuln.functions] == ["a"]
    assert any("NoChange" in str(m) for m in logged_warnings)


def test_multi_hunk_spans_ordered_by_file_then_line():
    sources = {
        "src/a.rs": "fn p() {\n    1\n}\n\nfn q() {\n    2\n}\n",
        "src/b.rs": "fn x() {\n    1\n}\n",
    }
    patch = parse_unified_diff(
        "--- a/src/b.rs\n+++ b/src/b.rs\n@@ -2,1 +2,1 @@\n-    1\n+    10\n"
        "--- a/src/a.rs\n+++ b/src/a.rs\n"
        "@@ -2,1 +2,1 @@\n-    1\n+    11\n"
        "@@ -6,1 +6,1 @@\n-    2\n+    22\n")
    vuln, fixed = build_samples(_entry("CVE-2021-00003"), patch, sources)
    for sample in (vuln, fixed):
        assert [(s.file_path, s.name) for s in sample.functions] == [
            ("src/a.rs", "p"), ("src/a.rs", "q"), ("src/b.rs", "x")]
    assert vuln.files == ["src/a.rs", "src/b.rs"]
    assert "    22" in fixed.text and "    22" not in vuln.text


def test_sibling_const_left_out_of_sample():
    source = ("/// A\nfn a() {\n}\n/// The limit\nconst LIMIT: usize = 8;\n\n"
              "fn b() {\n    LIMIT\n}\n")
    patch = parse_unified_diff(
        "--- a/src/lib.rs\n+++ b/src/lib.rs\n@@ -8,1 +8,1 @@\n"
        "-    LIMIT\n+    LIMIT + 1\n")
    vuln, fixed = build_samples(_entry("CVE-2021-00004"), patch, {"src/lib.rs": source})
    span = vuln.functions[0]
    assert (span.name, span.start_line, span.end_line) == ("b", 7, 9)
    assert "const LIMIT" not in vuln.text
    assert "const LIMIT" not in fixed.text

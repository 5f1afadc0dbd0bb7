import pytest

from haluforge.core.errors import UnbalancedBracesError
from haluforge.corpus.functions import (
    FunctionSpan, enclosing_functions, extract_functions, mask_source,
)
from tests.conftest import VECDEQUE_PATH

TRICKY = '''fn a() {
    let s = "}";
    // }
    /* { /* nested } */ } */
    let c = '{';
    let r = r#"}"#;
    let b = b'}';
}
fn b<'a>(x: &'a str) -> &'a str {
    x
}
'''


def test_mask_keeps_layout():
    masked = mask_source(TRICKY)
    assert len(masked) == len(TRICKY)
    assert masked.count("\n") == TRICKY.count("\n")
    assert masked.count("{") == 2
    assert masked.count("}") == 2
    assert "'a str" in masked


def test_literals_and_comments_do_not_count():
    spans = extract_functions(TRICKY, "src/lib.rs")
    assert [(s.name, s.start_line, s.end_line) for s in spans] == [("a", 1, 8), ("b", 9, 11)]
    assert spans[0].text.startswith("fn a() {")
    assert spans[1].text.endswith("}")


def test_vecdeque_functions(vecdeque_source):
    spans = extract_functions(vecdeque_source, VECDEQUE_PATH)
    assert [s.name for s in spans] == [
        "count", "cap", "handle_cap_increase", "capacity", "reserve", "len"]
    by_name = {s.name: s for s in spans}
    # leading attributes and doc comments belong to the span
    assert (by_name["count"].start_line, by_name["count"].end_line) == (19, 23)
    assert (by_name["cap"].start_line, by_name["cap"].end_line) == (26, 35)
    assert (by_name["reserve"].start_line, by_name["reserve"].end_line) == (66, 85)
    assert by_name["reserve"].text.startswith("    /// Reserves capacity")
    assert by_name["reserve"].line_count == 20
    assert all(s.complete for s in spans)


def test_nested_function_reported_with_parent():
    source = "fn outer() {\n    fn inner() {}\n    inner();\n}\n"
    spans = extract_functions(source, "x.rs")
    assert [(s.name, s.start_line, s.end_line) for s in spans] == [("outer", 1, 4)]


def test_bodiless_declaration_skipped():
    source = "trait T {\n    fn required(&self);\n    fn provided(&self) {}\n}\n"
    spans = extract_functions(source, "x.rs")
    assert [(s.name, s.start_line) for s in spans] == [("provided", 3)]


def test_multi_line_attribute():
    source = '#[cfg(all(\n    feature = "std",\n))]\npub fn gated() {}\n'
    spans = extract_functions(source, "x.rs")
    assert spans[0].start_line == 1
    assert spans[0].end_line == 4


def test_raw_identifier():
    spans = extract_functions("pub fn r#type() -> u8 { 0 }\n", "x.rs")
    assert spans[0].name == "type"


def test_unbalanced_body():
    with pytest.raises(UnbalancedBracesError) as exc:
        extract_functions("fn broken() {\n    if x {\n", "x.rs")
    assert exc.value.details == {"file_path": "x.rs", "line": 1}


def test_crlf_normalized():
    spans = extract_functions("fn f() {\r\n    1\r\n}\r\n", "x.rs")
    assert spans[0].text == "fn f() {\n    1\n}"


def test_enclosing_and_overlap(vecdeque_source):
    spans = extract_functions(vecdeque_source, VECDEQUE_PATH)
    hit = enclosing_functions(spans, [79, 200])
    assert [s.name for s in hit] == ["reserve"]
    assert hit[0].overlaps(80, 100)
    assert not hit[0].overlaps(86, 90)


def test_span_from_dict_defaults():
    span = FunctionSpan.from_dict(
        {"name": "f", "start_line": 1, "end_line": 2, "text": "fn f() {\n}"}, file_path="a.rs")
    assert span.file_path == "a.rs"
    assert span.complete


def test_plain_block_comment_does_not_pull_in_previous_function():
    source = ("/** doc for a */\nfn a() {\n    1\n}\n"
              "/* plain comment */\nfn b() {\n    2\n}\n")
    spans = extract_functions(source, "x.rs")
    assert [(s.name, s.start_line, s.end_line) for s in spans] == [("a", 1, 4), ("b", 6, 8)]
    assert "fn a" not in spans[1].text


def test_multiline_block_doc_comment_is_leading():
    source = "fn a() {\n}\n/**\n * Doc for b.\n */\nfn b() {\n}\n/*! inner */\nfn c() {\n}\n"
    spans = extract_functions(source, "x.rs")
    assert [(s.name, s.start_line) for s in spans] == [("a", 1), ("b", 3), ("c", 8)]


def test_leading_lines_stop_at_previous_span():
    source = "fn a() {\n} /** doc */\nfn b() {\n}\n"
    spans = extract_functions(source, "x.rs")
    assert [(s.name, s.start_line, s.end_line) for s in spans] == [("a", 1, 2), ("b", 3, 4)]


def test_sibling_const_is_not_leading():
    source = "/// A\nfn a() {\n}\n/// The limit\nconst LIMIT: usize = 8;\n\nfn b() {\n}\n"
    spans = extract_functions(source, "x.rs")
    assert [(s.name, s.start_line, s.end_line) for s in spans] == [("a", 1, 3), ("b", 7, 8)]
    assert "LIMIT" not in spans[1].text

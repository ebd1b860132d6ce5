from __future__ import annotations

import json
from datetime import date

import pytest

from depscope.errors import (
    DuplicateGa,
    DuplicateVersion,
    EmptyAffectedSet,
    EmptyInput,
    MalformedRow,
    MalformedTreeLine,
    SchemaViolation,
)
from depscope.ingest import (
    load_release_history,
    load_vuln_kb,
    parse_tree_json,
    parse_tree_text,
    render_tree_json,
)
from depscope.model import Ga, Gav, Scope

from conftest import SAMPLE_KB_JSON, SAMPLE_TREE_JSON, SAMPLE_TREE_TEXT


# --- tree text -----------------------------------------------------------------


def test_parse_root_only():
    tree = parse_tree_text("com.acme:m:1.0\n")
    assert tree.root.gav == Gav("com.acme", "m", "1.0")
    assert tree.root.children == ()


def test_parse_sample_tree_structure(sample_tree):
    root = sample_tree.root
    assert root.gav == Gav("com.acme", "app-core", "1.0")
    assert [c.gav.artifact_id for c in root.children] == [
        "app-util", "http-client", "stream-core",
    ]
    http_client = root.children[1]
    assert [c.gav.artifact_id for c in http_client.children] == ["io-buffers"]
    stream_core = root.children[2]
    assert stream_core.children[0].gav.artifact_id == "stream-codec"
    assert stream_core.children[0].children[0].gav.artifact_id == "compress"
    assert all(node.scope is Scope.COMPILE for node, _ in sample_tree.nodes())


def test_parse_strips_info_prefix():
    prefixed = "".join(f"[INFO] {line}\n" for line in SAMPLE_TREE_TEXT.splitlines())
    assert parse_tree_text(prefixed) == parse_tree_text(SAMPLE_TREE_TEXT)


def test_parse_accepts_crlf_and_blank_lines():
    doc = "com.acme:m:1.0\r\n\r\n+- g:a:jar:1:test\r\n"
    tree = parse_tree_text(doc)
    assert tree.root.children[0].scope is Scope.TEST


def test_parse_scope_variants():
    doc = (
        "com.acme:m:1.0\n"
        "+- g:a:jar:1:runtime\n"
        "+- g2:b:jar:1:exotic\n"
        "+- g3:c:1\n"
    )
    tree = parse_tree_text(doc)
    assert [c.scope for c in tree.root.children] == [
        Scope.RUNTIME, Scope.UNKNOWN, Scope.COMPILE,
    ]


def test_parse_rejects_orphan_depth():
    doc = "com.acme:m:1.0\n|  +- g:a:jar:1:compile\n"
    with pytest.raises(MalformedTreeLine) as exc:
        parse_tree_text(doc)
    assert exc.value.line_no == 2


def test_parse_rejects_bad_indent_width():
    doc = "com.acme:m:1.0\n +- g:a:jar:1:compile\n"
    with pytest.raises(MalformedTreeLine):
        parse_tree_text(doc)


def test_parse_rejects_indented_first_line():
    with pytest.raises(MalformedTreeLine):
        parse_tree_text("+- com.acme:m:1.0\n")


def test_parse_rejects_second_root():
    with pytest.raises(MalformedTreeLine):
        parse_tree_text("com.acme:m:1.0\ncom.other:n:1.0\n")


def test_parse_rejects_bad_coordinate():
    with pytest.raises(MalformedTreeLine):
        parse_tree_text("com.acme:m:1.0\n+- g:a:jar:1\n")


def test_parse_rejects_duplicate_library():
    doc = "com.acme:m:1.0\n+- g:a:jar:1:compile\n+- g:a:jar:2:compile\n"
    with pytest.raises(DuplicateGa) as exc:
        parse_tree_text(doc)
    assert exc.value.ga == Ga("g", "a")


def test_parse_empty_input():
    with pytest.raises(EmptyInput):
        parse_tree_text("\n\n")


# --- tree JSON -------------------------------------------------------------------


def test_parse_json_root_only():
    tree = parse_tree_json('{"root":{"gav":"com.acme:m1:1.0","scope":"compile","children":[]}}')
    assert tree.root.gav == Gav("com.acme", "m1", "1.0")
    assert tree.root.children == ()
    assert tree.analysis_time is None


def test_json_and_text_forms_agree(sample_tree):
    assert parse_tree_json(SAMPLE_TREE_JSON) == sample_tree


def test_parse_json_analysis_time():
    doc = json.dumps(
        {
            "analysis_time": "2018-06-01",
            "root": {"gav": "g:a:1", "scope": "compile", "children": []},
        }
    )
    assert parse_tree_json(doc).analysis_time == date(2018, 6, 1)


def test_parse_json_bad_scope_pointer():
    doc = json.dumps(
        {
            "root": {
                "gav": "g:a:1",
                "scope": "compile",
                "children": [{"gav": "g2:b:1", "scope": "testt", "children": []}],
            }
        }
    )
    with pytest.raises(SchemaViolation) as exc:
        parse_tree_json(doc)
    assert exc.value.pointer == "/root/children/0/scope"


def test_parse_json_rejects_unknown_key():
    doc = '{"root":{"gav":"g:a:1","scope":"compile","children":[],"extra":1}}'
    with pytest.raises(SchemaViolation):
        parse_tree_json(doc)


def test_parse_json_rejects_non_compile_root():
    doc = '{"root":{"gav":"g:a:1","scope":"runtime","children":[]}}'
    with pytest.raises(SchemaViolation) as exc:
        parse_tree_json(doc)
    assert exc.value.pointer == "/root/scope"


def test_parse_json_rejects_duplicate_library():
    doc = json.dumps(
        {
            "root": {
                "gav": "g:root:1",
                "scope": "compile",
                "children": [
                    {"gav": "g2:a:1", "scope": "compile", "children": []},
                    {"gav": "g2:a:2", "scope": "compile", "children": []},
                ],
            }
        }
    )
    with pytest.raises(SchemaViolation) as exc:
        parse_tree_json(doc)
    assert exc.value.pointer == "/root/children/1/gav"


def test_tree_json_round_trip(sample_tree):
    rendered = render_tree_json(sample_tree)
    assert parse_tree_json(rendered) == sample_tree
    assert render_tree_json(parse_tree_json(rendered)) == rendered


def test_parse_tree_dispatches_on_format(sample_tree):
    from depscope.ingest import TreeFormat, parse_tree

    text_doc = parse_tree(SAMPLE_TREE_TEXT, "mvn_text")
    json_doc = parse_tree(SAMPLE_TREE_JSON, TreeFormat.BOM_JSON)
    assert text_doc.source_format is TreeFormat.MVN_TEXT
    assert json_doc.source_format is TreeFormat.BOM_JSON
    assert text_doc.tree == json_doc.tree == sample_tree


def test_parse_tree_text_tolerates_trailing_whitespace():
    tree = parse_tree_text("com.acme:m:1.0   \n+- g:a:jar:1:compile  \n")
    assert tree.root.children[0].gav == Gav("g", "a", "1")


# --- release histories ------------------------------------------------------------


def test_load_history_two_releases_ordered():
    doc = (
        "group_id,artifact_id,version,release_date\n"
        "commons-logging,commons-logging,1.1.2,2013-03-16\n"
        "commons-logging,commons-logging,1.1.1,2007-11-26\n"
    )
    histories = load_release_history(doc)
    history = histories[Ga("commons-logging", "commons-logging")]
    assert [r.version for r in history.releases] == ["1.1.1", "1.1.2"]
    assert history.last_release.released == date(2013, 3, 16)


def test_load_history_single_row():
    doc = "group_id,artifact_id,version,release_date\ng,a,1.0,2020-01-01\n"
    histories = load_release_history(doc)
    assert len(histories[Ga("g", "a")].releases) == 1


def test_load_history_duplicate_version():
    doc = (
        "group_id,artifact_id,version,release_date\n"
        "g,a,1.0,2020-01-01\n"
        "g,a,1.0,2020-02-01\n"
    )
    with pytest.raises(DuplicateVersion):
        load_release_history(doc)


def test_load_history_tie_dates_keep_file_order():
    doc = (
        "group_id,artifact_id,version,release_date\n"
        "g,a,1.0b,2020-01-01\n"
        "g,a,1.0a,2020-01-01\n"
    )
    history = load_release_history(doc)[Ga("g", "a")]
    assert [r.version for r in history.releases] == ["1.0b", "1.0a"]


def test_load_history_bad_header():
    with pytest.raises(MalformedRow) as exc:
        load_release_history("group,artifact,version,date\n")
    assert exc.value.line_no == 1


def test_load_history_malformed_row_line_number():
    doc = "group_id,artifact_id,version,release_date\ng,a,1.0,2020-01-01\ng,a,2.0\n"
    with pytest.raises(MalformedRow) as exc:
        load_release_history(doc)
    assert exc.value.line_no == 3


def test_load_history_bad_date():
    doc = "group_id,artifact_id,version,release_date\ng,a,1.0,01/02/2020\n"
    with pytest.raises(MalformedRow):
        load_release_history(doc)


def test_load_history_accepts_crlf():
    doc = "group_id,artifact_id,version,release_date\r\ng,a,1.0,2020-01-01\r\n"
    assert Ga("g", "a") in load_release_history(doc)


# --- vulnerability KB ----------------------------------------------------------------


def test_load_kb_expands_versions():
    records = load_vuln_kb(SAMPLE_KB_JSON)
    assert [r.vuln_id for r in records] == ["VULN-0001", "VULN-0002"]
    assert records[0].affected == frozenset({Gav("org.webkit", "http-client", "2.3")})


def test_load_kb_multiple_versions_expand():
    doc = json.dumps(
        [{"id": "V1", "affected": [{"group": "g", "artifact": "a", "versions": ["1.0", "1.1"]}]}]
    )
    records = load_vuln_kb(doc)
    assert records[0].affected == frozenset({Gav("g", "a", "1.0"), Gav("g", "a", "1.1")})


def test_load_kb_empty_versions():
    doc = json.dumps([{"id": "V1", "affected": [{"group": "g", "artifact": "a", "versions": []}]}])
    with pytest.raises(EmptyAffectedSet) as exc:
        load_vuln_kb(doc)
    assert exc.value.vuln_id == "V1"


def test_load_kb_empty_affected():
    doc = json.dumps([{"id": "V1", "affected": []}])
    with pytest.raises(EmptyAffectedSet):
        load_vuln_kb(doc)


def test_load_kb_schema_pointer():
    doc = json.dumps([{"id": "V1", "affected": [{"group": "g", "artifact": "a"}]}])
    with pytest.raises(SchemaViolation) as exc:
        load_vuln_kb(doc)
    assert exc.value.pointer == "/0/affected/0"


def test_load_kb_rejects_non_array():
    with pytest.raises(SchemaViolation):
        load_vuln_kb('{"id": "V1"}')

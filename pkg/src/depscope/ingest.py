"""Parsers for the three external inputs.

* dependency trees, either as the text dump of a resolved-tree listing or as
  the BoM JSON interchange format,
* release histories as CSV,
* the vulnerability knowledge base as JSON.

All parsers are pure functions from document text to model values.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from datetime import date
from enum import Enum

from depscope.errors import (
    DuplicateGa,
    DuplicateVersion,
    EmptyAffectedSet,
    EmptyInput,
    MalformedRow,
    MalformedTreeLine,
    SchemaViolation,
)
from depscope.model import (
    DependencyNode,
    DependencyTree,
    Ga,
    Gav,
    Release,
    ReleaseHistory,
    Scope,
    VulnerabilityRecord,
)


class TreeFormat(str, Enum):
    MVN_TEXT = "mvn_text"
    BOM_JSON = "bom_json"


@dataclass(frozen=True)
class TreeDocument:
    source_format: TreeFormat
    tree: DependencyTree


def parse_tree(doc: str, source_format: TreeFormat | str) -> TreeDocument:
    """Parse a tree document in either supported encoding."""
    fmt = TreeFormat(source_format)
    if fmt is TreeFormat.BOM_JSON:
        return TreeDocument(fmt, parse_tree_json(doc))
    return TreeDocument(fmt, parse_tree_text(doc))


# --- tree text ---------------------------------------------------------------

_INFO_PREFIX = "[INFO] "
_INDENT_UNITS = ("+- ", "\\- ", "|  ", "   ")
_BRANCH_UNITS = ("+- ", "\\- ")
_SCOPE_BY_VALUE = {s.value: s for s in Scope if s is not Scope.UNKNOWN}


class _NodeBuilder:
    __slots__ = ("gav", "scope", "children")

    def __init__(self, gav: Gav, scope: Scope):
        self.gav = gav
        self.scope = scope
        self.children: list[_NodeBuilder] = []

    def freeze(self) -> DependencyNode:
        return DependencyNode(self.gav, self.scope, tuple(c.freeze() for c in self.children))


def _parse_coordinate(text: str, line_no: int, is_root: bool) -> tuple[Gav, Scope]:
    if not text or any(ch.isspace() for ch in text):
        raise MalformedTreeLine(line_no, f"bad coordinate {text!r}")
    segments = text.split(":")
    if any(not s for s in segments):
        raise MalformedTreeLine(line_no, f"empty segment in {text!r}")
    if len(segments) == 3:
        return Gav(segments[0], segments[1], segments[2]), Scope.COMPILE
    if is_root and len(segments) == 4:
        return Gav(segments[0], segments[1], segments[3]), Scope.COMPILE
    if not is_root and len(segments) == 5:
        scope = _SCOPE_BY_VALUE.get(segments[4], Scope.UNKNOWN)
        return Gav(segments[0], segments[1], segments[3]), scope
    raise MalformedTreeLine(line_no, f"wrong segment count in {text!r}")


def parse_tree_text(text: str) -> DependencyTree:
    """Parse the text dump of a resolved dependency tree.

    The first content line is the root coordinate (``g:a:v`` or
    ``g:a:packaging:v``). Every other line carries indentation built from
    three-character units drawn from ``+- ``, ``\\- ``, ``|  `` and three
    spaces, the last unit being a branch marker, followed by a coordinate.
    Node depth is the unit count; the parent is the nearest preceding node
    one level up. A leading ``[INFO] `` per line is stripped, so both raw
    dumps and log captures parse.
    """
    root: _NodeBuilder | None = None
    seen: set[Ga] = set()
    # stack of (depth, builder) for ancestor resolution
    stack: list[tuple[int, _NodeBuilder]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw
        if line.startswith(_INFO_PREFIX):
            line = line[len(_INFO_PREFIX) :]
        elif line.strip() == "[INFO]":
            line = ""
        line = line.rstrip()
        if not line:
            continue

        pos = 0
        units: list[str] = []
        while line[pos : pos + 3] in _INDENT_UNITS:
            units.append(line[pos : pos + 3])
            pos += 3
        coordinate = line[pos:]
        depth = len(units)
        if units and units[-1] not in _BRANCH_UNITS:
            raise MalformedTreeLine(line_no, "indentation does not end with a branch marker")

        if root is None:
            if depth != 0:
                raise MalformedTreeLine(line_no, "first content line must be the unindented root")
            gav, scope = _parse_coordinate(coordinate, line_no, is_root=True)
            root = _NodeBuilder(gav, scope)
            seen.add(gav.ga)
            stack = [(0, root)]
            continue

        if depth == 0:
            raise MalformedTreeLine(line_no, "second root line")
        gav, scope = _parse_coordinate(coordinate, line_no, is_root=False)
        if gav.ga in seen:
            raise DuplicateGa(gav.ga)
        while stack and stack[-1][0] >= depth:
            stack.pop()
        if not stack or stack[-1][0] != depth - 1:
            raise MalformedTreeLine(line_no, f"no parent at depth {depth - 1}")
        node = _NodeBuilder(gav, scope)
        stack[-1][1].children.append(node)
        stack.append((depth, node))
        seen.add(gav.ga)

    if root is None:
        raise EmptyInput()
    return DependencyTree(root.freeze())


# --- tree JSON ---------------------------------------------------------------

_JSON_SCOPES = {s.value: s for s in Scope if s is not Scope.UNKNOWN}


def _require_keys(obj: dict, allowed: set[str], required: set[str], pointer: str) -> None:
    for key in required:
        if key not in obj:
            raise SchemaViolation(pointer, f"missing key {key!r}")
    for key in obj:
        if key not in allowed:
            raise SchemaViolation(pointer, f"unexpected key {key!r}")


def _parse_json_node(obj, pointer: str, seen: set[Ga]) -> DependencyNode:
    if not isinstance(obj, dict):
        raise SchemaViolation(pointer, "node must be an object")
    _require_keys(obj, {"gav", "scope", "children"}, {"gav", "scope", "children"}, pointer)
    gav_text = obj["gav"]
    if not isinstance(gav_text, str):
        raise SchemaViolation(f"{pointer}/gav", "must be a string")
    segments = gav_text.split(":")
    if len(segments) != 3 or any(not s for s in segments):
        raise SchemaViolation(f"{pointer}/gav", f"not a g:a:v coordinate: {gav_text!r}")
    gav = Gav(segments[0], segments[1], segments[2])
    if gav.ga in seen:
        raise SchemaViolation(f"{pointer}/gav", f"duplicate library {gav.ga}")
    seen.add(gav.ga)
    scope_text = obj["scope"]
    if scope_text not in _JSON_SCOPES:
        raise SchemaViolation(f"{pointer}/scope", f"not a valid scope: {scope_text!r}")
    children_obj = obj["children"]
    if not isinstance(children_obj, list):
        raise SchemaViolation(f"{pointer}/children", "must be an array")
    children = tuple(
        _parse_json_node(child, f"{pointer}/children/{i}", seen)
        for i, child in enumerate(children_obj)
    )
    return DependencyNode(gav, _JSON_SCOPES[scope_text], children)


_ISO_DATE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


def _parse_iso_date(text, pointer: str) -> date:
    if not isinstance(text, str) or not _ISO_DATE.match(text):
        raise SchemaViolation(pointer, f"not a YYYY-MM-DD date: {text!r}")
    try:
        return date.fromisoformat(text)
    except ValueError as exc:
        raise SchemaViolation(pointer, str(exc)) from None


def parse_tree_json(doc: str) -> DependencyTree:
    """Parse the BoM JSON interchange form of a dependency tree."""
    try:
        data = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("", f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise SchemaViolation("", "document root must be an object")
    _require_keys(data, {"analysis_time", "root"}, {"root"}, "")
    analysis_time = None
    if "analysis_time" in data:
        analysis_time = _parse_iso_date(data["analysis_time"], "/analysis_time")
    root = _parse_json_node(data["root"], "/root", set())
    if root.scope is not Scope.COMPILE:
        raise SchemaViolation("/root/scope", "root scope must be compile")
    return DependencyTree(root, analysis_time)


def _node_to_dict(node: DependencyNode) -> dict:
    return {
        "gav": str(node.gav),
        "scope": node.scope.value,
        "children": [_node_to_dict(child) for child in node.children],
    }


def render_tree_json(tree: DependencyTree) -> str:
    """Canonical BoM JSON rendering; inverse of :func:`parse_tree_json`."""
    data: dict = {"root": _node_to_dict(tree.root)}
    if tree.analysis_time is not None:
        data["analysis_time"] = tree.analysis_time.isoformat()
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


# --- release histories -------------------------------------------------------

_HISTORY_HEADER = ["group_id", "artifact_id", "version", "release_date"]


def load_release_history(doc: str) -> dict[Ga, ReleaseHistory]:
    """Load release histories from CSV keyed by library.

    Rows are grouped by library and sorted ascending by date; equal dates
    keep file order. Header must be exactly
    ``group_id,artifact_id,version,release_date``.
    """
    reader = csv.reader(io.StringIO(doc))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(1, "missing header") from None
    if header != _HISTORY_HEADER:
        raise MalformedRow(1, f"bad header {header!r}")

    rows: dict[Ga, list[Release]] = {}
    seen: set[tuple[Ga, str]] = set()
    for row in reader:
        line_no = reader.line_num
        if len(row) != 4:
            raise MalformedRow(line_no, f"expected 4 fields, got {len(row)}")
        group, artifact, version, date_text = row
        if not group or not artifact or not version:
            raise MalformedRow(line_no, "empty field")
        if not _ISO_DATE.match(date_text):
            raise MalformedRow(line_no, f"bad date {date_text!r}")
        try:
            released = date.fromisoformat(date_text)
        except ValueError:
            raise MalformedRow(line_no, f"bad date {date_text!r}") from None
        ga = Ga(group, artifact)
        if (ga, version) in seen:
            raise DuplicateVersion(ga, version)
        seen.add((ga, version))
        rows.setdefault(ga, []).append(Release(version, released))

    return {
        ga: ReleaseHistory(ga, tuple(sorted(releases, key=lambda r: r.released)))
        for ga, releases in rows.items()
    }


def render_release_history(histories: dict[Ga, ReleaseHistory]) -> str:
    """Inverse of :func:`load_release_history`, libraries in sorted order."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_HISTORY_HEADER)
    for ga in sorted(histories):
        for release in histories[ga].releases:
            writer.writerow([ga.group_id, ga.artifact_id, release.version, release.released.isoformat()])
    return out.getvalue()


# --- vulnerability knowledge base --------------------------------------------


def _require_nonempty_str(value, pointer: str) -> str:
    if not isinstance(value, str) or not value:
        raise SchemaViolation(pointer, "must be a non-empty string")
    return value


def load_vuln_kb(doc: str) -> list[VulnerabilityRecord]:
    """Load the vulnerability knowledge base.

    The document is an array of ``{"id", "affected"}`` records; each
    affected entry names a library and the versions it applies to, and is
    expanded into explicit instances.
    """
    try:
        data = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("", f"invalid JSON: {exc}") from None
    if not isinstance(data, list):
        raise SchemaViolation("", "document root must be an array")

    records = []
    for i, entry in enumerate(data):
        pointer = f"/{i}"
        if not isinstance(entry, dict):
            raise SchemaViolation(pointer, "record must be an object")
        _require_keys(entry, {"id", "affected"}, {"id", "affected"}, pointer)
        vuln_id = _require_nonempty_str(entry["id"], f"{pointer}/id")
        affected_obj = entry["affected"]
        if not isinstance(affected_obj, list):
            raise SchemaViolation(f"{pointer}/affected", "must be an array")
        if not affected_obj:
            raise EmptyAffectedSet(vuln_id)
        affected: set[Gav] = set()
        for j, lib in enumerate(affected_obj):
            lib_pointer = f"{pointer}/affected/{j}"
            if not isinstance(lib, dict):
                raise SchemaViolation(lib_pointer, "entry must be an object")
            _require_keys(lib, {"group", "artifact", "versions"}, {"group", "artifact", "versions"}, lib_pointer)
            group = _require_nonempty_str(lib["group"], f"{lib_pointer}/group")
            artifact = _require_nonempty_str(lib["artifact"], f"{lib_pointer}/artifact")
            versions = lib["versions"]
            if not isinstance(versions, list):
                raise SchemaViolation(f"{lib_pointer}/versions", "must be an array")
            if not versions:
                raise EmptyAffectedSet(vuln_id)
            for k, version in enumerate(versions):
                _require_nonempty_str(version, f"{lib_pointer}/versions/{k}")
                affected.add(Gav(group, artifact, version))
        records.append(VulnerabilityRecord(vuln_id, frozenset(affected)))
    return records

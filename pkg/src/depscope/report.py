"""Per-tree scan results and corpus-level aggregate reports.

A scan produces one census row per dependency (every non-root node of the
unfiltered tree) plus the vulnerable paths. Aggregation folds scan results
into pure cross-tabulated counts; percentages exist only at render time.
Census-shaped tables count per instance, path tables count per
(instance, vulnerability) pair — the two senses of "vulnerable dependency"
are kept apart and named explicitly.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, replace
from datetime import date
from typing import Iterable, Mapping, Sequence

from depscope.analysis import (
    AnnotatedTree,
    classify_responsibility,
    extract_vulnerable_paths,
    filter_non_deployed,
    group_path,
    match_vulnerabilities,
)
from depscope.errors import MissingHistory, SchemaViolation
from depscope.lifecycle import SmoothingConfig, detect_via_halted, lifecycle_status
from depscope.model import (
    DependencyTree,
    Ga,
    Gav,
    InstanceStatus,
    LibraryStatus,
    ReleaseHistory,
    Responsibility,
    VulnerabilityRecord,
    VulnerablePath,
    same_project,
)

_VULN_AXES = ("vuln", "safe")
_POSITION_AXES = ("direct", "transitive")
_RESP_AXES = ("own", "direct", "transitive")
_LIFE_AXES = ("halted", "outdated", "up_to_date")


def _all_cell_keys() -> tuple[str, ...]:
    keys: list[str] = []
    for row in ("deployed", "all"):
        keys += [f"{row}/{v}/{p}" for v in _VULN_AXES for p in _POSITION_AXES]
    keys += [f"grouped/{v}/{r}" for v in _VULN_AXES for r in _RESP_AXES]
    keys += [f"lifecycle/{v}/{s}" for v in _VULN_AXES for s in _LIFE_AXES]
    keys += [f"via_halted/{v}/{s}" for v in _VULN_AXES for s in _LIFE_AXES]
    keys += [f"paths/{stage}/{r}" for stage in ("grouped", "ungrouped") for r in _RESP_AXES]
    keys += ["unknown_history", "trees", "trees_include_non_deployed"]
    return tuple(keys)


CELL_KEYS: tuple[str, ...] = _all_cell_keys()


@dataclass(frozen=True)
class CensusRow:
    """Flags for one dependency (a non-root node of the unfiltered tree)."""

    gav: Gav
    depth: int
    direct: bool
    deployed: bool
    vuln_ids: tuple[str, ...]
    own: bool
    responsibility: Responsibility  # grouped classification of the node's chain
    library_status: LibraryStatus
    instance_status: InstanceStatus
    via_halted: bool
    unknown_history: bool

    @property
    def vulnerable(self) -> bool:
        return bool(self.vuln_ids)


@dataclass(frozen=True)
class ScanResult:
    """Everything the analysis of one tree produced."""

    root: Gav
    analysis_time: date
    include_non_deployed: bool
    paths: tuple[VulnerablePath, ...]
    census: tuple[CensusRow, ...]

    def deployed_gavs(self) -> set[Gav]:
        out = {row.gav for row in self.census if row.deployed}
        out.add(self.root)
        return out

    def has_deployed_finding(self) -> bool:
        deployed = self.deployed_gavs()
        return any(path.raw_path[0] in deployed for path in self.paths)


@dataclass(frozen=True)
class AggregateReport:
    """Cross-tabulated counts over any number of scan results.

    Merging is plain cell-wise addition, so partial aggregates may be
    combined in any order.
    """

    cells: Mapping[str, int]

    def __post_init__(self):
        full = {key: 0 for key in CELL_KEYS}
        for key, value in self.cells.items():
            if key not in full:
                raise ValueError(f"unknown cell {key!r}")
            full[key] = int(value)
        object.__setattr__(self, "cells", full)

    def get(self, key: str) -> int:
        return self.cells[key]

    def merge(self, other: "AggregateReport") -> "AggregateReport":
        return AggregateReport(
            {key: self.cells[key] + other.cells[key] for key in CELL_KEYS}
        )


def scan(
    tree: DependencyTree,
    kb: Sequence[VulnerabilityRecord],
    histories: Mapping[Ga, ReleaseHistory],
    *,
    time: date | None = None,
    cfg: SmoothingConfig | None = None,
    lenient: bool = False,
    include_non_deployed: bool = False,
) -> ScanResult:
    """Run the full pipeline on one tree.

    Vulnerability matching runs after the deployment filter, so non-deployed
    vulnerable instances never produce paths; ``include_non_deployed``
    re-runs the matching before the filter, flagging non-deployed instances
    in the census and extracting their paths as well.

    ``time`` defaults to the tree's own analysis date when present, else
    today.
    """
    cfg = cfg or SmoothingConfig()
    resolved_time = time or tree.analysis_time or date.today()
    if include_non_deployed:
        annotated = match_vulnerabilities(tree, kb)
    else:
        annotated = match_vulnerabilities(filter_non_deployed(tree), kb)
    return census(
        tree,
        annotated,
        histories,
        resolved_time,
        cfg,
        lenient=lenient,
        include_non_deployed=include_non_deployed,
    )


def census(
    tree: DependencyTree,
    annotated: AnnotatedTree,
    histories: Mapping[Ga, ReleaseHistory],
    time: date,
    cfg: SmoothingConfig,
    *,
    lenient: bool = False,
    include_non_deployed: bool = False,
) -> ScanResult:
    """Fill every per-dependency flag and finalize the vulnerable paths.

    ``tree`` is the unfiltered tree; ``annotated`` carries the vulnerability
    matching for whichever tree the report mode dictates. In strict mode a
    library without release history raises :class:`MissingHistory`; with
    ``lenient`` it is counted as alive/up-to-date and flagged
    ``unknown_history``.
    """
    root_gav = tree.root.gav
    if annotated.tree.root.gav != root_gav:
        raise ValueError("annotated tree does not match the scanned tree")

    filtered = filter_non_deployed(tree)
    deployed = {node.gav for node, _ in filtered.nodes()}
    deployed_vulnerable = {
        gav: ids for gav, ids in annotated.vulnerable.items() if gav in deployed
    }
    via_halted = detect_via_halted(
        AnnotatedTree(filtered, deployed_vulnerable), histories, time, cfg, lenient=lenient
    )
    chains = tree.ancestor_chains()

    rows = []
    for node, depth in tree.nodes():
        if depth == 0:
            continue
        gav = node.gav
        history = histories.get(gav.ga)
        if history is None:
            if not lenient:
                raise MissingHistory(gav.ga)
            lib_status = LibraryStatus.ALIVE
            inst_status = InstanceStatus.UP_TO_DATE
            unknown = True
        else:
            status = lifecycle_status(gav, history, time, cfg)
            lib_status = status.library_status
            inst_status = status.instance_status
            unknown = False
        rows.append(
            CensusRow(
                gav=gav,
                depth=depth,
                direct=depth == 1,
                deployed=gav in deployed,
                vuln_ids=tuple(sorted(annotated.vulnerable.get(gav, ()))),
                own=same_project(gav, root_gav),
                responsibility=classify_responsibility(group_path(chains[gav]), root_gav),
                library_status=lib_status,
                instance_status=inst_status,
                via_halted=gav in via_halted,
                unknown_history=unknown,
            )
        )

    paths = []
    for path in extract_vulnerable_paths(annotated):
        grouped = tuple(group_path(path.raw_path))
        paths.append(
            replace(
                path,
                grouped_path=grouped,
                responsibility=classify_responsibility(grouped, root_gav),
                via_halted=path.raw_path[0] in via_halted,
            )
        )

    return ScanResult(
        root=root_gav,
        analysis_time=time,
        include_non_deployed=include_non_deployed,
        paths=tuple(paths),
        census=tuple(rows),
    )


def _lifecycle_bucket(row: CensusRow) -> str:
    if row.library_status is LibraryStatus.HALTED:
        return "halted"
    if row.instance_status is InstanceStatus.OUTDATED:
        return "outdated"
    return "up_to_date"


def aggregate(results: Iterable[ScanResult]) -> AggregateReport:
    """Fold scan results into cross-tabulated counts."""
    counts = {key: 0 for key in CELL_KEYS}
    for result in results:
        counts["trees"] += 1
        if result.include_non_deployed:
            counts["trees_include_non_deployed"] += 1
        for row in result.census:
            vuln = "vuln" if row.vulnerable else "safe"
            position = "direct" if row.direct else "transitive"
            counts[f"all/{vuln}/{position}"] += 1
            if row.unknown_history:
                counts["unknown_history"] += 1
            if not row.deployed:
                continue
            counts[f"deployed/{vuln}/{position}"] += 1
            counts[f"grouped/{vuln}/{row.responsibility.value}"] += 1
            bucket = _lifecycle_bucket(row)
            counts[f"lifecycle/{vuln}/{bucket}"] += 1
            if row.via_halted:
                counts[f"via_halted/{vuln}/{bucket}"] += 1
        for path in result.paths:
            counts[f"paths/grouped/{path.responsibility.value}"] += 1
            ungrouped = classify_responsibility(path.raw_path, result.root)
            counts[f"paths/ungrouped/{ungrouped.value}"] += 1
    return AggregateReport(counts)


# --- rendering ----------------------------------------------------------------


def _bool(value: bool) -> str:
    return "true" if value else "false"


def _pct(numerator: int, denominator: int) -> str:
    if denominator == 0:
        return "n/a"
    return f"{100.0 * numerator / denominator:.1f}%"


def _table(header: list[str], rows: list[list[str]], indent: str = "  ") -> list[str]:
    widths = [len(cell) for cell in header]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    lines = []
    for cells in [header] + rows:
        padded = [cells[0].ljust(widths[0])] + [
            cell.rjust(width) for cell, width in zip(cells[1:], widths[1:])
        ]
        lines.append(indent + "  ".join(padded).rstrip())
    return lines


def _result_text(result: ScanResult) -> str:
    deployed_rows = [row for row in result.census if row.deployed]
    halted = sum(1 for row in deployed_rows if row.library_status is LibraryStatus.HALTED)
    via = sum(1 for row in deployed_rows if row.via_halted)
    vulnerable = sum(1 for row in result.census if row.vulnerable)
    mode = "including non-deployed" if result.include_non_deployed else "deployed-only"
    lines = [
        f"tree {result.root}",
        f"  analysis time: {result.analysis_time.isoformat()}  mode: {mode}",
        f"  dependencies: {len(result.census)} "
        f"(deployed {len(deployed_rows)}, vulnerable {vulnerable}, "
        f"halted {halted}, via-halted {via})",
        f"  vulnerable paths: {len(result.paths)}",
    ]
    for path in result.paths:
        marker = ", via halted" if path.via_halted else ""
        lines.append(
            f"    - {path.vuln_id} in {path.raw_path[0]} [{path.responsibility.value}{marker}]"
        )
        lines.append("      grouped: " + " -> ".join(str(g) for g in path.grouped_path))
        lines.append("      full:    " + " -> ".join(str(g) for g in path.raw_path))
    return "\n".join(lines) + "\n"


def _aggregate_text(report: AggregateReport) -> str:
    c = report.get
    lines = [f"aggregate report over {c('trees')} tree(s)"]
    if c("trees_include_non_deployed"):
        lines[0] += f" ({c('trees_include_non_deployed')} scanned including non-deployed)"
    lines.append("")

    lines.append("scope filtering (dependency instances)")
    header = ["", "safe:direct", "safe:transitive", "vuln:direct", "vuln:transitive"]
    rows = []
    for label, key in (("deployed", "deployed"), ("all", "all")):
        rows.append(
            [label]
            + [str(c(f"{key}/{v}/{p}")) for v in _VULN_AXES[::-1] for p in _POSITION_AXES]
        )
    lines += _table(header, rows)
    lines.append("")

    lines.append("project grouping (deployed dependency instances)")
    header = [
        "",
        "safe:direct", "safe:transitive", "safe:own", "safe:3rd-party",
        "vuln:direct", "vuln:transitive", "vuln:own", "vuln:3rd-party",
    ]
    grouped_row = ["grouped"]
    ungrouped_row = ["ungrouped"]
    for v in ("safe", "vuln"):
        direct = c(f"grouped/{v}/direct")
        transitive = c(f"grouped/{v}/transitive")
        own = c(f"grouped/{v}/own")
        grouped_row += [str(direct), str(transitive), str(own), str(direct + transitive)]
        ungrouped_row += [
            str(c(f"deployed/{v}/direct")),
            str(c(f"deployed/{v}/transitive")),
            "n/a",
            "n/a",
        ]
    lines += _table(header, [grouped_row, ungrouped_row])
    lines.append("")

    lines.append("lifecycle (deployed dependency instances)")
    header = [
        "",
        "safe:halted", "safe:outdated", "safe:up-to-date",
        "vuln:halted", "vuln:outdated", "vuln:up-to-date",
    ]
    rows = []
    for label, key in (("via-halted", "via_halted"), ("all", "lifecycle")):
        rows.append(
            [label]
            + [str(c(f"{key}/{v}/{s}")) for v in ("safe", "vuln") for s in _LIFE_AXES]
        )
    lines += _table(header, rows)
    lines.append("")

    lines.append("vulnerable paths (per instance-vulnerability pair)")
    header = ["", "own", "direct", "transitive", "controlled"]
    rows = []
    for stage in ("grouped", "ungrouped"):
        own = c(f"paths/{stage}/own")
        direct = c(f"paths/{stage}/direct")
        transitive = c(f"paths/{stage}/transitive")
        total = own + direct + transitive
        rows.append(
            [stage, str(own), str(direct), str(transitive),
             f"{own + direct} ({_pct(own + direct, total)})"]
        )
    lines += _table(header, rows)
    lines.append("")

    all_vuln = sum(c(f"all/vuln/{p}") for p in _POSITION_AXES)
    deployed_vuln = sum(c(f"deployed/vuln/{p}") for p in _POSITION_AXES)
    deployed_total = sum(c(f"deployed/{v}/{p}") for v in _VULN_AXES for p in _POSITION_AXES)
    halted_total = sum(c(f"lifecycle/{v}/halted") for v in _VULN_AXES)
    controlled_grouped = c("grouped/vuln/own") + c("grouped/vuln/direct")
    lines.append("shares")
    lines.append(
        f"  non-deployed among vulnerable instances: "
        f"{_pct(all_vuln - deployed_vuln, all_vuln)} ({all_vuln - deployed_vuln} of {all_vuln})"
    )
    lines.append(
        f"  controlled by developers, grouped (of deployed vulnerable): "
        f"{_pct(controlled_grouped, deployed_vuln)} ({controlled_grouped} of {deployed_vuln})"
    )
    lines.append(
        f"  controlled by developers, ungrouped (of deployed vulnerable): "
        f"{_pct(c('deployed/vuln/direct'), deployed_vuln)} ({c('deployed/vuln/direct')} of {deployed_vuln})"
    )
    lines.append(
        f"  halted among deployed instances: "
        f"{_pct(halted_total, deployed_total)} ({halted_total} of {deployed_total})"
    )
    if c("unknown_history"):
        lines.append(f"  instances without release history: {c('unknown_history')}")
    return "\n".join(lines) + "\n"


_CENSUS_CSV_HEADER = [
    "root", "gav", "group_id", "artifact_id", "version", "depth", "direct",
    "deployed", "vulnerable", "vuln_ids", "own", "responsibility",
    "library_status", "instance_status", "via_halted", "unknown_history",
]


def _results_csv(results: Sequence[ScanResult]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_CENSUS_CSV_HEADER)
    for result in results:
        for row in result.census:
            writer.writerow(
                [
                    str(result.root), str(row.gav), row.gav.group_id,
                    row.gav.artifact_id, row.gav.version, row.depth,
                    _bool(row.direct), _bool(row.deployed), _bool(row.vulnerable),
                    ";".join(row.vuln_ids), _bool(row.own),
                    row.responsibility.value, row.library_status.value,
                    row.instance_status.value, _bool(row.via_halted),
                    _bool(row.unknown_history),
                ]
            )
    return out.getvalue()


def _aggregate_csv(report: AggregateReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["cell", "count"])
    for key in CELL_KEYS:
        writer.writerow([key, report.get(key)])
    return out.getvalue()


def _result_to_dict(result: ScanResult) -> dict:
    return {
        "analysis_time": result.analysis_time.isoformat(),
        "census": [
            {
                "gav": str(row.gav),
                "depth": row.depth,
                "direct": row.direct,
                "deployed": row.deployed,
                "vuln_ids": list(row.vuln_ids),
                "own": row.own,
                "responsibility": row.responsibility.value,
                "library_status": row.library_status.value,
                "instance_status": row.instance_status.value,
                "via_halted": row.via_halted,
                "unknown_history": row.unknown_history,
            }
            for row in result.census
        ],
        "include_non_deployed": result.include_non_deployed,
        "paths": [
            {
                "vuln_id": path.vuln_id,
                "raw_path": [str(g) for g in path.raw_path],
                "grouped_path": [str(g) for g in path.grouped_path],
                "responsibility": path.responsibility.value,
                "via_halted": path.via_halted,
            }
            for path in result.paths
        ],
        "root": str(result.root),
    }


def render(obj, format: str = "text") -> str:
    """Render a scan result, a list of scan results, or an aggregate report.

    All formats are deterministic: rendering the same value twice yields
    byte-identical output.
    """
    if format not in ("text", "csv", "json"):
        raise ValueError(f"unknown format {format!r}")
    if isinstance(obj, AggregateReport):
        if format == "text":
            return _aggregate_text(obj)
        if format == "csv":
            return _aggregate_csv(obj)
        return json.dumps({"cells": dict(obj.cells)}, indent=2, sort_keys=True) + "\n"
    results = [obj] if isinstance(obj, ScanResult) else list(obj)
    if format == "text":
        return "\n".join(_result_text(result) for result in results)
    if format == "csv":
        return _results_csv(results)
    if isinstance(obj, ScanResult):
        return json.dumps(_result_to_dict(obj), indent=2, sort_keys=True) + "\n"
    return json.dumps([_result_to_dict(r) for r in results], indent=2, sort_keys=True) + "\n"


# --- report JSON round trip -----------------------------------------------------


def _parse_gav_field(text, pointer: str) -> Gav:
    if not isinstance(text, str):
        raise SchemaViolation(pointer, "must be a string")
    segments = text.split(":")
    if len(segments) != 3 or any(not s for s in segments):
        raise SchemaViolation(pointer, f"not a g:a:v coordinate: {text!r}")
    return Gav(*segments)


def _enum_field(enum_cls, value, pointer: str):
    try:
        return enum_cls(value)
    except ValueError:
        raise SchemaViolation(pointer, f"invalid value {value!r}") from None


def _result_from_dict(data, pointer: str = "") -> ScanResult:
    if not isinstance(data, dict):
        raise SchemaViolation(pointer, "scan result must be an object")
    for key in ("root", "analysis_time", "include_non_deployed", "paths", "census"):
        if key not in data:
            raise SchemaViolation(pointer, f"missing key {key!r}")
    root = _parse_gav_field(data["root"], f"{pointer}/root")
    try:
        analysis_time = date.fromisoformat(data["analysis_time"])
    except (TypeError, ValueError):
        raise SchemaViolation(f"{pointer}/analysis_time", "not a YYYY-MM-DD date") from None
    paths = []
    for i, entry in enumerate(data["paths"]):
        p = f"{pointer}/paths/{i}"
        paths.append(
            VulnerablePath(
                raw_path=tuple(_parse_gav_field(g, f"{p}/raw_path") for g in entry["raw_path"]),
                grouped_path=tuple(
                    _parse_gav_field(g, f"{p}/grouped_path") for g in entry["grouped_path"]
                ),
                vuln_id=entry["vuln_id"],
                responsibility=_enum_field(Responsibility, entry["responsibility"], f"{p}/responsibility"),
                via_halted=bool(entry["via_halted"]),
            )
        )
    census_rows = []
    for i, entry in enumerate(data["census"]):
        p = f"{pointer}/census/{i}"
        census_rows.append(
            CensusRow(
                gav=_parse_gav_field(entry["gav"], f"{p}/gav"),
                depth=int(entry["depth"]),
                direct=bool(entry["direct"]),
                deployed=bool(entry["deployed"]),
                vuln_ids=tuple(entry["vuln_ids"]),
                own=bool(entry["own"]),
                responsibility=_enum_field(Responsibility, entry["responsibility"], f"{p}/responsibility"),
                library_status=_enum_field(LibraryStatus, entry["library_status"], f"{p}/library_status"),
                instance_status=_enum_field(InstanceStatus, entry["instance_status"], f"{p}/instance_status"),
                via_halted=bool(entry["via_halted"]),
                unknown_history=bool(entry["unknown_history"]),
            )
        )
    return ScanResult(
        root=root,
        analysis_time=analysis_time,
        include_non_deployed=bool(data["include_non_deployed"]),
        paths=tuple(paths),
        census=tuple(census_rows),
    )


def parse_scan_results_json(doc: str) -> list[ScanResult]:
    """Parse a scan result object or array as rendered by :func:`render`."""
    try:
        data = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("", f"invalid JSON: {exc}") from None
    if isinstance(data, list):
        return [_result_from_dict(entry, f"/{i}") for i, entry in enumerate(data)]
    return [_result_from_dict(data)]


def parse_aggregate_json(doc: str) -> AggregateReport:
    try:
        data = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("", f"invalid JSON: {exc}") from None
    if not isinstance(data, dict) or "cells" not in data or not isinstance(data["cells"], dict):
        raise SchemaViolation("", "expected an object with a 'cells' mapping")
    try:
        return AggregateReport(data["cells"])
    except ValueError as exc:
        raise SchemaViolation("/cells", str(exc)) from None

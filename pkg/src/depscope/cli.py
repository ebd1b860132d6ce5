"""Command-line entry point.

Subcommands:

* ``scan``     analyze one tree file or a directory of tree files
* ``report``   aggregate previously scanned JSON results
* ``simulate`` run the synthetic-project methodology comparison
* ``status``   print the release-cadence status of every library in a history file

Exit codes: 0 success, 1 any error, 2 when a scan finds a vulnerable
deployed path (CI-friendly). All configuration is via flags; no environment
variables are read.
"""

from __future__ import annotations

import argparse
import sys
from datetime import date
from pathlib import Path

from depscope.errors import DepscopeError, InputFileError
from depscope.ingest import TreeFormat, load_release_history, load_vuln_kb, parse_tree
from depscope.lifecycle import (
    SmoothingConfig,
    expected_release_date,
    last_release_interval,
    library_status,
)
from depscope.model import DependencyTree
from depscope.report import aggregate, parse_scan_results_json, render, scan
from depscope.simulate import SimulationConfig, SimulationPool, render_simulation, simulate


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is reserved for findings
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _date_arg(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a YYYY-MM-DD date: {text!r}") from None


def _add_smoothing_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=0.6,
                        help="smoothing factor in (0,1) (default 0.6)")
    parser.add_argument("--default-interval-days", type=int, default=90,
                        help="assumed release interval for short histories (default 90)")
    parser.add_argument("--min-releases", type=int, default=3,
                        help="releases needed before the smoothed interval is used (default 3)")
    parser.add_argument("--time", type=_date_arg, default=None,
                        help="analysis date YYYY-MM-DD (default: tree analysis time, else today)")


def _smoothing(args) -> SmoothingConfig:
    return SmoothingConfig(
        alpha=args.alpha,
        default_interval_days=args.default_interval_days,
        min_releases=args.min_releases,
    )


def _read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


def _load_tree(path: Path) -> DependencyTree:
    fmt = TreeFormat.BOM_JSON if path.suffix == ".json" else TreeFormat.MVN_TEXT
    try:
        return parse_tree(_read(path), fmt).tree
    except DepscopeError as exc:
        raise InputFileError(path, exc) from exc


def _load_trees(path: Path) -> list[DependencyTree]:
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix in (".txt", ".json"))
        if not files:
            raise DepscopeError(f"no .txt or .json tree files in {path}")
        return [_load_tree(p) for p in files]
    return [_load_tree(path)]


def _load_histories(path: Path):
    try:
        return load_release_history(_read(path))
    except DepscopeError as exc:
        raise InputFileError(path, exc) from exc


def _load_kb(path: Path):
    try:
        return load_vuln_kb(_read(path))
    except DepscopeError as exc:
        raise InputFileError(path, exc) from exc


def _cmd_scan(args) -> int:
    histories = _load_histories(args.history)
    kb = _load_kb(args.kb)
    trees = _load_trees(args.tree)
    results = [
        scan(
            tree,
            kb,
            histories,
            time=args.time,
            cfg=_smoothing(args),
            lenient=args.lenient_history,
            include_non_deployed=args.include_non_deployed,
        )
        for tree in trees
    ]
    results.sort(key=lambda r: str(r.root))
    output = results[0] if not args.tree.is_dir() else results
    sys.stdout.write(render(output, args.format))
    return 2 if any(r.has_deployed_finding() for r in results) else 0


def _cmd_report(args) -> int:
    files = sorted(p for p in args.input.iterdir() if p.suffix == ".json")
    if not files:
        raise DepscopeError(f"no .json scan results in {args.input}")
    results = []
    for path in files:
        try:
            results.extend(parse_scan_results_json(_read(path)))
        except DepscopeError as exc:
            raise InputFileError(path, exc) from exc
    sys.stdout.write(render(aggregate(results), args.format))
    return 0


def _cmd_simulate(args) -> int:
    pool = SimulationPool(
        trees=tuple(_load_trees(args.trees)),
        histories=_load_histories(args.history),
        kb=tuple(_load_kb(args.kb)),
    )
    cfg = SimulationConfig(
        projects=args.projects,
        deps_per_project=args.deps,
        seed=args.seed,
        smoothing=_smoothing(args),
        time=args.time,
        lenient=args.lenient_history,
    )
    outcomes = simulate(pool, cfg)
    sys.stdout.write(render_simulation(outcomes, cfg, args.format))
    return 0


def _cmd_status(args) -> int:
    histories = _load_histories(args.history)
    cfg = _smoothing(args)
    time = args.time or date.today()
    rows = []
    for ga in sorted(histories):
        history = histories[ga]
        rows.append(
            {
                "library": str(ga),
                "releases": len(history.releases),
                "last_release": history.last_release.released.isoformat(),
                "interval_days": round(last_release_interval(history, cfg), 3),
                "expected_release": expected_release_date(history, cfg).isoformat(),
                "status": library_status(history, time, cfg).value,
            }
        )
    if args.format == "json":
        import json

        sys.stdout.write(json.dumps({"time": time.isoformat(), "libraries": rows},
                                    indent=2, sort_keys=True) + "\n")
    elif args.format == "csv":
        import csv
        import io

        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["library", "releases", "last_release", "interval_days",
                         "expected_release", "status"])
        for row in rows:
            writer.writerow([row["library"], row["releases"], row["last_release"],
                             row["interval_days"], row["expected_release"], row["status"]])
        sys.stdout.write(out.getvalue())
    else:
        sys.stdout.write(f"status at {time.isoformat()}\n")
        for row in rows:
            sys.stdout.write(
                f"  {row['library']}: {row['status']} "
                f"(releases {row['releases']}, last {row['last_release']}, "
                f"expected next {row['expected_release']})\n"
            )
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="depscope",
                     description="dependency tree vulnerability and lifecycle analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    p_scan = sub.add_parser("scan", help="analyze a tree file or a directory of trees")
    p_scan.add_argument("--tree", type=Path, required=True,
                        help="tree file (.txt or .json) or directory of tree files")
    p_scan.add_argument("--history", type=Path, required=True,
                        help="release history CSV")
    p_scan.add_argument("--kb", type=Path, required=True,
                        help="vulnerability knowledge base JSON")
    p_scan.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p_scan.add_argument("--lenient-history", action="store_true",
                        help="treat libraries without history as alive instead of failing")
    p_scan.add_argument("--include-non-deployed", action="store_true",
                        help="match vulnerabilities before the deployment filter")
    _add_smoothing_flags(p_scan)
    p_scan.set_defaults(func=_cmd_scan)

    p_report = sub.add_parser("report", help="aggregate scan results from JSON files")
    p_report.add_argument("--input", type=Path, required=True,
                          help="directory of scan-result .json files")
    p_report.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p_report.set_defaults(func=_cmd_report)

    p_sim = sub.add_parser("simulate", help="compare methodologies on synthetic projects")
    p_sim.add_argument("--trees", type=Path, required=True,
                       help="directory of pool tree files")
    p_sim.add_argument("--history", type=Path, required=True)
    p_sim.add_argument("--kb", type=Path, required=True)
    p_sim.add_argument("--projects", type=int, default=100)
    p_sim.add_argument("--deps", type=int, default=12,
                       help="direct dependencies per synthetic project (default 12)")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sim.add_argument("--lenient-history", action="store_true")
    _add_smoothing_flags(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_status = sub.add_parser("status", help="lifecycle status of every library in a history file")
    p_status.add_argument("--history", type=Path, required=True)
    p_status.add_argument("--format", choices=("text", "csv", "json"), default="text")
    _add_smoothing_flags(p_status)
    p_status.set_defaults(func=_cmd_status)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DepscopeError, OSError, ValueError) as exc:
        print(f"depscope: error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()

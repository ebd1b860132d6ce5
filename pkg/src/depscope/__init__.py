"""depscope: dependency-tree vulnerability and lifecycle analysis."""

from depscope.analysis import (
    AnnotatedTree,
    classify_responsibility,
    extract_vulnerable_paths,
    filter_non_deployed,
    group_path,
    match_vulnerabilities,
)
from depscope.ingest import (
    TreeDocument,
    TreeFormat,
    load_release_history,
    load_vuln_kb,
    parse_tree,
    parse_tree_json,
    parse_tree_text,
    render_release_history,
    render_tree_json,
)
from depscope.lifecycle import (
    SmoothingConfig,
    detect_via_halted,
    expected_release_date,
    instance_status,
    last_release_interval,
    library_status,
    lifecycle_status,
    release_intervals,
)
from depscope.model import (
    DependencyNode,
    DependencyTree,
    Ga,
    Gav,
    InstanceStatus,
    LibraryStatus,
    LifecycleStatus,
    Release,
    ReleaseHistory,
    Responsibility,
    Scope,
    VulnerabilityRecord,
    VulnerablePath,
    parse_gav,
    render_gav,
    same_project,
)
from depscope.report import (
    AggregateReport,
    CensusRow,
    ScanResult,
    aggregate,
    census,
    parse_aggregate_json,
    parse_scan_results_json,
    render,
    scan,
)
from depscope.simulate import (
    ProjectOutcome,
    SimulationConfig,
    SimulationPool,
    project_tree,
    render_simulation,
    simulate,
)

__version__ = "0.1.0"

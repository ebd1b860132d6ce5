"""Tree post-processing: scope filtering, vulnerability annotation, path
extraction, project grouping and responsibility attribution."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from depscope.model import (
    DependencyNode,
    DependencyTree,
    Gav,
    Responsibility,
    VulnerabilityRecord,
    VulnerablePath,
    same_project,
)


@dataclass(frozen=True)
class AnnotatedTree:
    """A tree plus the vulnerability ids found on its nodes.

    In the default pipeline the tree is the deployed-only (filtered) tree;
    the include-non-deployed report mode annotates the unfiltered tree
    instead. Keys of ``vulnerable`` always occur in ``tree``.
    """

    tree: DependencyTree
    vulnerable: Mapping[Gav, frozenset[str]]


def filter_non_deployed(tree: DependencyTree) -> DependencyTree:
    """Drop every test- or provided-scoped node together with its subtree.

    In a resolved tree the children of a non-deployed node exist only to
    serve it, so the whole subtree goes. The root is never removed. Sibling
    order is preserved; the operation is idempotent.
    """

    def rebuild(node: DependencyNode) -> DependencyNode:
        kept = tuple(rebuild(c) for c in node.children if c.scope.deployed)
        return DependencyNode(node.gav, node.scope, kept)

    return DependencyTree(rebuild(tree.root), tree.analysis_time)


def match_vulnerabilities(
    tree: DependencyTree, kb: Iterable[VulnerabilityRecord]
) -> AnnotatedTree:
    """Annotate tree nodes with the vulnerability ids affecting them.

    Only instances present in the tree are annotated; the root itself may be
    flagged.
    """
    present = tree.gavs()
    vulnerable: dict[Gav, set[str]] = {}
    for record in kb:
        for gav in record.affected:
            if gav in present:
                vulnerable.setdefault(gav, set()).add(record.vuln_id)
    return AnnotatedTree(tree, {g: frozenset(ids) for g, ids in vulnerable.items()})


def extract_vulnerable_paths(annotated: AnnotatedTree) -> list[VulnerablePath]:
    """One path per (vulnerable node, vulnerability id) pair, ungrouped.

    The raw path runs from the vulnerable instance up to the root inclusive.
    Paths are ordered by the depth-first position of the vulnerable node,
    then by vulnerability id. ``grouped_path`` is left equal to the raw path
    and the responsibility reflects the raw chain; grouping refines both.
    """
    root = annotated.tree.root.gav
    chains = annotated.tree.ancestor_chains()
    paths = []
    for node, _ in annotated.tree.nodes():
        ids = annotated.vulnerable.get(node.gav)
        if not ids:
            continue
        raw = chains[node.gav]
        for vuln_id in sorted(ids):
            paths.append(
                VulnerablePath(
                    raw_path=raw,
                    grouped_path=raw,
                    vuln_id=vuln_id,
                    responsibility=classify_responsibility(raw, root),
                    via_halted=False,
                )
            )
    return paths


def group_path(raw_path: Sequence[Gav]) -> list[Gav]:
    """Collapse same-project members of a path onto the one nearest the
    vulnerable instance.

    Scanning from position 0 upward, each element is dropped when it shares
    a project with an already-kept element (the anchor for its project is
    therefore the first-encountered, vulnerable-closest member — this also
    resolves the non-transitivity of the dot-boundary prefix rule
    deterministically). Members need not be adjacent to be grouped. The
    first element is always preserved and the operation is idempotent.
    """
    kept: list[Gav] = []
    for gav in raw_path:
        if any(same_project(anchor, gav) for anchor in kept):
            continue
        kept.append(gav)
    return kept


def classify_responsibility(grouped_path: Sequence[Gav], root: Gav) -> Responsibility:
    """Attribute a path: own code, a direct dependency, or transitive.

    A path whose vulnerable instance shares a project with the root is own
    code regardless of length (a vulnerable root is the length-1 case). A
    two-element grouped path means the fix is one version bump away, hence
    direct; anything longer is controlled by another project upstream.
    """
    if same_project(grouped_path[0], root):
        return Responsibility.OWN
    if len(grouped_path) == 2:
        return Responsibility.DIRECT
    return Responsibility.TRANSITIVE

"""Core domain model: coordinates, dependency trees, release histories, vulnerabilities.

All types are immutable values; every operation in the package is a pure
function over them.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from enum import Enum
from typing import Iterator

from depscope.errors import DuplicateGa, MalformedCoordinate


class Scope(str, Enum):
    """Dependency scope as declared in a resolved tree.

    ``unknown`` covers scope strings outside the standard set; such
    dependencies are treated as deployed because the non-deployed set is
    enumerated (test, provided), not inferred.
    """

    COMPILE = "compile"
    PROVIDED = "provided"
    RUNTIME = "runtime"
    TEST = "test"
    SYSTEM = "system"
    IMPORT = "import"
    UNKNOWN = "unknown"

    @property
    def deployed(self) -> bool:
        """True when instances with this scope ship with the released artifact."""
        return self not in NON_DEPLOYED_SCOPES


NON_DEPLOYED_SCOPES = frozenset({Scope.TEST, Scope.PROVIDED})


def _check_segment(name: str, value: str) -> None:
    if not isinstance(value, str) or not value:
        raise ValueError(f"{name} must be a non-empty string")
    if ":" in value:
        raise ValueError(f"{name} must not contain ':'")


@dataclass(frozen=True, order=True)
class Ga:
    """A library: group and artifact, across all versions."""

    group_id: str
    artifact_id: str

    def __post_init__(self):
        _check_segment("group_id", self.group_id)
        _check_segment("artifact_id", self.artifact_id)

    def __str__(self) -> str:
        return f"{self.group_id}:{self.artifact_id}"


@dataclass(frozen=True, order=True)
class Gav:
    """A library instance: group, artifact and version."""

    group_id: str
    artifact_id: str
    version: str

    def __post_init__(self):
        _check_segment("group_id", self.group_id)
        _check_segment("artifact_id", self.artifact_id)
        _check_segment("version", self.version)

    @property
    def ga(self) -> Ga:
        return Ga(self.group_id, self.artifact_id)

    def __str__(self) -> str:
        return f"{self.group_id}:{self.artifact_id}:{self.version}"


def parse_gav(text: str) -> Gav:
    """Parse ``g:a:v`` or the tree-dump form ``g:a:packaging:v:scope``.

    The five-segment form yields the coordinate projection only; the scope
    segment is interpreted by the tree parser, not here.
    """
    segments = text.split(":")
    if len(segments) == 3:
        group, artifact, version = segments
    elif len(segments) == 5:
        group, artifact, _, version, _ = segments
    else:
        raise MalformedCoordinate(text)
    if not group or not artifact or not version:
        raise MalformedCoordinate(text)
    return Gav(group, artifact, version)


def render_gav(gav: Gav) -> str:
    """Inverse of :func:`parse_gav` for the three-segment form."""
    return str(gav)


def _group_of(value) -> str:
    return value if isinstance(value, str) else value.group_id


def same_project(a, b) -> bool:
    """Whether two group ids (or Ga/Gav carriers) name the same project.

    Groups are the same project when equal or when one is a dot-boundary
    prefix of the other (``org.apache.activemq`` vs
    ``org.apache.activemq.tooling``). Plain string prefixes do not match:
    ``com.foo`` and ``com.foobar`` are distinct projects.
    """
    ga, gb = _group_of(a), _group_of(b)
    if ga == gb:
        return True
    return ga.startswith(gb + ".") or gb.startswith(ga + ".")


@dataclass(frozen=True)
class DependencyNode:
    """One library instance in a resolved tree, with the scope of its edge."""

    gav: Gav
    scope: Scope
    children: tuple[DependencyNode, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


@dataclass(frozen=True)
class DependencyTree:
    """A resolved dependency tree: acyclic, each library appears once.

    Depth-1 children of the root are the direct dependencies; every deeper
    node is transitive. ``analysis_time`` carries the reference date of the
    analysis when the source document provides one.
    """

    root: DependencyNode
    analysis_time: date | None = None

    def __post_init__(self):
        if self.root.scope is not Scope.COMPILE:
            raise ValueError("tree root must have compile scope")
        seen: set[Ga] = set()
        for node, _ in self.nodes():
            ga = node.gav.ga
            if ga in seen:
                raise DuplicateGa(ga)
            seen.add(ga)

    def nodes(self) -> Iterator[tuple[DependencyNode, int]]:
        """Depth-first preorder walk yielding (node, depth)."""
        stack: list[tuple[DependencyNode, int]] = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            yield node, depth
            for child in reversed(node.children):
                stack.append((child, depth + 1))

    def gavs(self) -> set[Gav]:
        return {node.gav for node, _ in self.nodes()}

    def ancestor_chains(self) -> dict[Gav, tuple[Gav, ...]]:
        """For every node, the chain from the node up to the root, inclusive."""
        chains: dict[Gav, tuple[Gav, ...]] = {}

        def walk(node: DependencyNode, above: tuple[Gav, ...]) -> None:
            chain = (node.gav,) + above
            chains[node.gav] = chain
            for child in node.children:
                walk(child, chain)

        walk(self.root, ())
        return chains


@dataclass(frozen=True, order=True)
class Release:
    version: str
    released: date


@dataclass(frozen=True)
class ReleaseHistory:
    """Dated release sequence of one library, ascending by release date.

    Equal dates keep their input order; the interval between them is zero
    days.
    """

    library: Ga
    releases: tuple[Release, ...]

    def __post_init__(self):
        object.__setattr__(self, "releases", tuple(self.releases))
        if not self.releases:
            raise ValueError(f"history of {self.library} has no releases")
        dates = [r.released for r in self.releases]
        if any(b < a for a, b in zip(dates, dates[1:])):
            raise ValueError(f"history of {self.library} is not sorted by date")

    @property
    def last_release(self) -> Release:
        return self.releases[-1]

    def release_date_of(self, version: str) -> date | None:
        for release in self.releases:
            if release.version == version:
                return release.released
        return None


@dataclass(frozen=True)
class VulnerabilityRecord:
    """One known vulnerability and the library instances it affects."""

    vuln_id: str
    affected: frozenset[Gav]

    def __post_init__(self):
        if not self.vuln_id:
            raise ValueError("vulnerability id must be non-empty")
        object.__setattr__(self, "affected", frozenset(self.affected))
        if not self.affected:
            raise ValueError(f"vulnerability {self.vuln_id} affects no instances")


class Responsibility(str, Enum):
    """Who can act on a vulnerable path: the project itself (own), a direct
    version bump (direct), or another project upstream (transitive)."""

    OWN = "own"
    DIRECT = "direct"
    TRANSITIVE = "transitive"


class LibraryStatus(str, Enum):
    HALTED = "halted"
    ALIVE = "alive"


class InstanceStatus(str, Enum):
    OUTDATED = "outdated"
    UP_TO_DATE = "up_to_date"


@dataclass(frozen=True)
class VulnerablePath:
    """Chain from a vulnerable instance up to the analyzed root.

    ``raw_path`` is the full ancestor chain; ``grouped_path`` is the
    same chain after same-project members collapse onto the one nearest the
    vulnerable instance.
    """

    raw_path: tuple[Gav, ...]
    grouped_path: tuple[Gav, ...]
    vuln_id: str
    responsibility: Responsibility
    via_halted: bool

    def __post_init__(self):
        object.__setattr__(self, "raw_path", tuple(self.raw_path))
        object.__setattr__(self, "grouped_path", tuple(self.grouped_path))
        if not self.raw_path:
            raise ValueError("raw_path must be non-empty")
        if self.grouped_path[0] != self.raw_path[0]:
            raise ValueError("grouping must preserve the vulnerable instance")


@dataclass(frozen=True)
class LifecycleStatus:
    """Release-cadence verdict for one library instance at analysis time."""

    library_status: LibraryStatus
    instance_status: InstanceStatus
    expected_release_date: date

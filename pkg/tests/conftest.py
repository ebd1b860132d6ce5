"""Shared fixtures: the worked-example tree, release histories, a halted-direct
fixture, a random tree generator for oracle tests, and a synthetic simulation
pool."""

from __future__ import annotations

import json
import random
from datetime import date, timedelta

import pytest

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
from depscope.simulate import SimulationPool

ANALYSIS_TIME = date(2018, 6, 1)

# Seven-node tree: the root and an own library share a project, one direct
# dependency brings a transitive one, another direct dependency brings two
# levels of its own project plus a third-party leaf.
SAMPLE_TREE_TEXT = """\
com.acme:app-core:jar:1.0
+- com.acme:app-util:jar:1.0:compile
+- org.webkit:http-client:jar:2.3:compile
|  \\- org.tinyio:io-buffers:jar:0.9:compile
\\- org.dataflow:stream-core:jar:5.1:compile
   \\- org.dataflow:stream-codec:jar:5.1:compile
      \\- org.ziplib:compress:jar:1.4:compile
"""

SAMPLE_TREE_JSON = json.dumps(
    {
        "root": {
            "gav": "com.acme:app-core:1.0",
            "scope": "compile",
            "children": [
                {"gav": "com.acme:app-util:1.0", "scope": "compile", "children": []},
                {
                    "gav": "org.webkit:http-client:2.3",
                    "scope": "compile",
                    "children": [
                        {"gav": "org.tinyio:io-buffers:0.9", "scope": "compile", "children": []}
                    ],
                },
                {
                    "gav": "org.dataflow:stream-core:5.1",
                    "scope": "compile",
                    "children": [
                        {
                            "gav": "org.dataflow:stream-codec:5.1",
                            "scope": "compile",
                            "children": [
                                {
                                    "gav": "org.ziplib:compress:1.4",
                                    "scope": "compile",
                                    "children": [],
                                }
                            ],
                        }
                    ],
                },
            ],
        }
    }
)

SAMPLE_KB_JSON = json.dumps(
    [
        {
            "id": "VULN-0001",
            "affected": [
                {"group": "org.webkit", "artifact": "http-client", "versions": ["2.3"]}
            ],
        },
        {
            "id": "VULN-0002",
            "affected": [
                {"group": "org.ziplib", "artifact": "compress", "versions": ["1.4"]}
            ],
        },
    ]
)

SAMPLE_GAVS = [
    Gav("com.acme", "app-core", "1.0"),
    Gav("com.acme", "app-util", "1.0"),
    Gav("org.webkit", "http-client", "2.3"),
    Gav("org.tinyio", "io-buffers", "0.9"),
    Gav("org.dataflow", "stream-core", "5.1"),
    Gav("org.dataflow", "stream-codec", "5.1"),
    Gav("org.ziplib", "compress", "1.4"),
]


def alive_history(gav: Gav, last: date = date(2018, 5, 20)) -> ReleaseHistory:
    """Monthly cadence ending in ``gav.version``; alive at ANALYSIS_TIME."""
    dates = [last - timedelta(days=d) for d in (89, 61, 30, 0)]
    versions = ["0.1", "0.2", "0.3", gav.version]
    return ReleaseHistory(gav.ga, tuple(Release(v, d) for v, d in zip(versions, dates)))


def history_csv(histories) -> str:
    lines = ["group_id,artifact_id,version,release_date"]
    for history in histories:
        for release in history.releases:
            lines.append(
                f"{history.library.group_id},{history.library.artifact_id},"
                f"{release.version},{release.released.isoformat()}"
            )
    return "\n".join(lines) + "\n"


@pytest.fixture
def sample_tree():
    from depscope.ingest import parse_tree_text

    return parse_tree_text(SAMPLE_TREE_TEXT)


@pytest.fixture
def sample_kb():
    from depscope.ingest import load_vuln_kb

    return load_vuln_kb(SAMPLE_KB_JSON)


@pytest.fixture
def sample_histories():
    return {gav.ga: alive_history(gav) for gav in SAMPLE_GAVS}


def stalled_history(ga: Ga, versions=("1.0", "2.0", "3.0")) -> ReleaseHistory:
    """Annual cadence that stopped in 2007; halted long before ANALYSIS_TIME."""
    dates = [date(2005, 11, 26), date(2006, 11, 26), date(2007, 11, 26)]
    return ReleaseHistory(ga, tuple(Release(v, d) for v, d in zip(versions, dates)))


def halted_direct_tree() -> DependencyTree:
    """Root with one halted direct dependency carrying a subtree, and one
    alive direct dependency carrying a subtree."""
    return DependencyTree(
        DependencyNode(
            Gav("com.acme", "app-core", "1.0"),
            Scope.COMPILE,
            (
                DependencyNode(
                    Gav("org.legacy", "old-parser", "3.0"),
                    Scope.COMPILE,
                    (
                        DependencyNode(
                            Gav("org.tinyio", "io-buffers", "0.9"),
                            Scope.COMPILE,
                            (DependencyNode(Gav("org.tinyio2", "io-extras", "0.2"), Scope.COMPILE),),
                        ),
                    ),
                ),
                DependencyNode(
                    Gav("org.fresh", "web-core", "7.1"),
                    Scope.COMPILE,
                    (DependencyNode(Gav("org.fresh2", "web-util", "7.1"), Scope.COMPILE),),
                ),
            ),
        )
    )


@pytest.fixture
def halted_fixture():
    tree = halted_direct_tree()
    histories = {gav.ga: alive_history(gav) for gav in tree.gavs()}
    legacy = Ga("org.legacy", "old-parser")
    histories[legacy] = stalled_history(legacy, versions=("1.0", "2.0", "3.0"))
    return tree, histories


# --- random tree cases for oracle tests ---------------------------------------

GROUP_POOL = [
    "com.alpha",
    "com.alpha.io",
    "com.alpha.io.ext",
    "com.beta",
    "com.beta.core",
    "org.gamma",
    "org.delta",
]
VULN_ID_POOL = ["VX-1", "VX-2", "VX-3"]
_ALL_SCOPES = list(Scope)


def random_tree_case(rng: random.Random):
    """A random tree of up to 12 nodes with random scopes, projects and
    vulnerability marks, plus the matching knowledge base."""
    n = rng.randint(1, 12)
    gavs = [Gav(rng.choice(GROUP_POOL), f"lib{i}", str(rng.randint(1, 3))) for i in range(n)]
    scopes = [Scope.COMPILE] + [rng.choice(_ALL_SCOPES) for _ in range(n - 1)]
    children: list[list[int]] = [[] for _ in range(n)]
    for i in range(1, n):
        children[rng.randrange(i)].append(i)

    def freeze(i: int) -> DependencyNode:
        return DependencyNode(gavs[i], scopes[i], tuple(freeze(k) for k in children[i]))

    tree = DependencyTree(freeze(0))
    affected: dict[str, set[Gav]] = {}
    for gav in gavs:
        if rng.random() < 0.35:
            for vuln_id in rng.sample(VULN_ID_POOL, rng.randint(1, 2)):
                affected.setdefault(vuln_id, set()).add(gav)
    kb = [VulnerabilityRecord(vid, frozenset(g)) for vid, g in sorted(affected.items())]
    return tree, kb


# --- synthetic simulation pool -------------------------------------------------


def build_synthetic_pool(n_libraries: int = 50, seed: int = 987654) -> SimulationPool:
    """A deterministic pool: shared project groups, mixed scopes, a blend of
    halted and alive cadences, and a sprinkling of vulnerable instances."""
    rng = random.Random(seed)
    libraries: list[tuple[Ga, list[str]]] = []
    for i in range(n_libraries):
        ga = Ga(f"org.pool{i % 11}", f"art{i}")
        versions = [f"{v}.0" for v in range(1, rng.randint(2, 4) + 1)]
        libraries.append((ga, versions))

    histories = {}
    for ga, versions in libraries:
        if rng.random() < 0.3:  # long-stalled cadence
            last = date(2008, 3, 1)
            step = 120
        else:  # recent cadence, alive at ANALYSIS_TIME
            last = date(2018, 5, 15)
            step = 40
        dates = [last - timedelta(days=step * k) for k in range(len(versions) - 1, -1, -1)]
        histories[ga] = ReleaseHistory(ga, tuple(Release(v, d) for v, d in zip(versions, dates)))

    scope_choices = [Scope.COMPILE, Scope.COMPILE, Scope.RUNTIME, Scope.TEST, Scope.PROVIDED]
    trees = []
    for index, (ga, versions) in enumerate(libraries):
        for version in versions:
            used = {index}
            children = []
            for _ in range(rng.randint(0, 3)):
                j = rng.choice([x for x in range(n_libraries) if x not in used])
                used.add(j)
                child_ga, child_versions = libraries[j]
                grand = ()
                if rng.random() < 0.4:
                    k = rng.choice([x for x in range(n_libraries) if x not in used])
                    used.add(k)
                    grand_ga, grand_versions = libraries[k]
                    grand = (
                        DependencyNode(
                            Gav(grand_ga.group_id, grand_ga.artifact_id, grand_versions[0]),
                            rng.choice(scope_choices),
                        ),
                    )
                children.append(
                    DependencyNode(
                        Gav(child_ga.group_id, child_ga.artifact_id, child_versions[0]),
                        rng.choice(scope_choices),
                        grand,
                    )
                )
            root = DependencyNode(
                Gav(ga.group_id, ga.artifact_id, version), Scope.COMPILE, tuple(children)
            )
            trees.append(DependencyTree(root))

    affected: dict[str, set[Gav]] = {}
    vuln_counter = 0
    for ga, versions in libraries:
        for version in versions:
            if rng.random() < 0.25:
                vuln_counter += 1
                vuln_id = f"VP-{vuln_counter:03d}"
                affected.setdefault(vuln_id, set()).add(
                    Gav(ga.group_id, ga.artifact_id, version)
                )
    kb = tuple(
        VulnerabilityRecord(vid, frozenset(gavs)) for vid, gavs in sorted(affected.items())
    )
    return SimulationPool(trees=tuple(trees), histories=histories, kb=kb)

"""Release-cadence model: smoothed release intervals, expected next release,
halted/alive libraries and outdated/up-to-date instances.

The model weights recent inter-release intervals most: with smoothing factor
``a``, the interval that ended ``i`` releases ago contributes with weight
``a * (1 - a) ** i``. The weights over ``n`` intervals sum to
``1 - (1 - a) ** n`` and are deliberately not renormalized, which biases the
estimate low — a conservative choice when deciding whether a library still
receives updates. Libraries with too few releases to smooth fall back to a
fixed default interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Mapping

from depscope.analysis import AnnotatedTree
from depscope.errors import MissingHistory, UnknownVersion
from depscope.model import (
    Ga,
    Gav,
    InstanceStatus,
    LibraryStatus,
    LifecycleStatus,
    ReleaseHistory,
)


@dataclass(frozen=True)
class SmoothingConfig:
    alpha: float = 0.6
    default_interval_days: int = 90
    min_releases: int = 3

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.default_interval_days <= 0:
            raise ValueError("default_interval_days must be positive")
        if self.min_releases <= 0:
            raise ValueError("min_releases must be positive")


def release_intervals(history: ReleaseHistory) -> list[int]:
    """Days between consecutive releases, oldest first; empty for one release."""
    dates = [r.released for r in history.releases]
    return [(b - a).days for a, b in zip(dates, dates[1:])]


def last_release_interval(history: ReleaseHistory, cfg: SmoothingConfig) -> float:
    """Smoothed estimate of the next inter-release interval, in days.

    Histories shorter than ``cfg.min_releases`` releases return
    ``cfg.default_interval_days`` instead of the smoothed sum.
    """
    if len(history.releases) < cfg.min_releases:
        return float(cfg.default_interval_days)
    total = 0.0
    for age, days in enumerate(reversed(release_intervals(history))):
        total += cfg.alpha * (1.0 - cfg.alpha) ** age * days
    return total


def expected_release_date(history: ReleaseHistory, cfg: SmoothingConfig) -> date:
    """Last release date plus the smoothed interval, rounded half-up to days."""
    interval = last_release_interval(history, cfg)
    return history.last_release.released + timedelta(days=math.floor(interval + 0.5))


def library_status(history: ReleaseHistory, time: date, cfg: SmoothingConfig) -> LibraryStatus:
    """Halted when the expected next release date lies strictly before ``time``."""
    if expected_release_date(history, cfg) < time:
        return LibraryStatus.HALTED
    return LibraryStatus.ALIVE


def instance_status(gav: Gav, history: ReleaseHistory, time: date) -> InstanceStatus:
    """Outdated when a strictly newer release exists and is visible at ``time``.

    Releases dated after ``time`` are invisible: an instance is judged
    against what had been published by the analysis date.
    """
    own_date = history.release_date_of(gav.version)
    if own_date is None:
        raise UnknownVersion(gav)
    for release in history.releases:
        if own_date < release.released <= time:
            return InstanceStatus.OUTDATED
    return InstanceStatus.UP_TO_DATE


def lifecycle_status(
    gav: Gav, history: ReleaseHistory, time: date, cfg: SmoothingConfig
) -> LifecycleStatus:
    return LifecycleStatus(
        library_status=library_status(history, time, cfg),
        instance_status=instance_status(gav, history, time),
        expected_release_date=expected_release_date(history, cfg),
    )


def detect_via_halted(
    annotated: AnnotatedTree,
    histories: Mapping[Ga, ReleaseHistory],
    time: date,
    cfg: SmoothingConfig,
    *,
    lenient: bool = False,
) -> set[Gav]:
    """Instances reached only through a halted direct dependency.

    Returns every node below a depth-1 node whose library is halted at
    ``time`` (the halted direct dependency itself is not included). Such
    instances cannot be refreshed by upgrading the direct dependency, since
    no new version of it will arrive. With ``lenient`` a missing history
    counts as alive instead of raising :class:`MissingHistory`.
    """
    reached: set[Gav] = set()
    for child in annotated.tree.root.children:
        history = histories.get(child.gav.ga)
        if history is None:
            if not lenient:
                raise MissingHistory(child.gav.ga)
            continue
        if library_status(history, time, cfg) is LibraryStatus.HALTED:
            stack = list(child.children)
            while stack:
                node = stack.pop()
                reached.add(node.gav)
                stack.extend(node.children)
    return reached

"""Per-(developer, repository) temporal and versatility metrics."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ._diag import warn
from .classify import CATEGORIES, ChangeCategory

SECONDS_PER_DAY = 86400.0

METRICS_HEADER = (
    "repo_id", "developer_id", "commits", "developer_versatility", "muse",
    "mean_commit_versatility", "versatility_level", "contrib_start_rel",
    "contrib_duration", "mtbc", "corrective", "perfective", "adaptive", "unclassified",
)
_FLOAT_FIELDS = ("mean_commit_versatility", "contrib_start_rel", "contrib_duration", "mtbc")


@dataclass(frozen=True)
class CommitFacts:
    """Everything the aggregation needs to know about one commit."""
    commit_id: str
    developer: str
    timestamp: int
    change_types: frozenset = frozenset()
    categories: frozenset = frozenset()


@dataclass(frozen=True)
class DeveloperMetricsRow:
    repo_id: str
    developer_id: str
    commits: int
    developer_versatility: int
    muse: int
    mean_commit_versatility: float
    versatility_level: int
    contrib_start_rel: float
    contrib_duration: float
    mtbc: float
    corrective: int = 0
    perfective: int = 0
    adaptive: int = 0
    unclassified: int = 0

    @property
    def actual_profile(self) -> dict:
        return {ChangeCategory.CORRECTIVE: self.corrective,
                ChangeCategory.PERFECTIVE: self.perfective,
                ChangeCategory.ADAPTIVE: self.adaptive}

    def actual(self, category) -> int:
        return getattr(self, ChangeCategory(category).value)

    @property
    def key(self) -> tuple[str, str]:
        return (self.repo_id, self.developer_id)


def commit_versatility(changes: Iterable) -> int:
    """Number of distinct change types among a commit's changes.

    Accepts change types or objects with a ``change_type`` attribute.
    """
    return len({getattr(c, "change_type", c) for c in changes})


def developer_versatility_measures(commit_sets: Sequence[Iterable]) -> tuple[int, int, float, int]:
    """``(developer_versatility, muse, mean_commit_versatility, versatility_level)``.

    ``commit_sets`` holds one collection of change types per commit of the
    developer; each collection is reduced to a set first.
    """
    sets = [frozenset(getattr(c, "change_type", c) for c in cs) for cs in commit_sets]
    if not sets:
        raise ValueError("a developer needs at least one commit")
    union = frozenset().union(*sets)
    sizes = [len(s) for s in sets]
    return len(union), max(sizes), sum(sizes) / len(sizes), len(set(sets))


def temporal_measures(timestamps: Sequence[float], repo_first: float,
                      repo: str = "", developer: str = "") -> tuple[float, float, float]:
    """``(contrib_start_rel, contrib_duration, mtbc)`` in fractional days."""
    if not timestamps:
        raise ValueError("a developer needs at least one commit timestamp")
    first, last, n = min(timestamps), max(timestamps), len(timestamps)
    start = (first - repo_first) / SECONDS_PER_DAY
    if start < 0:
        warn(repo, "-", f"developer {developer or '?'} commits before the repository's first commit; clamped to 0")
        start = 0.0
    duration = (last - first) / SECONDS_PER_DAY
    mtbc = duration / (n - 1) if n >= 2 else 0.0
    return start, duration, mtbc


@dataclass
class DeveloperAccumulator:
    """Mergeable per-developer state; merging is commutative and associative."""
    commits: int = 0
    union: frozenset = frozenset()
    muse: int = 0
    versatility_sum: int = 0
    distinct_sets: frozenset = frozenset()
    first: float = float("inf")
    last: float = float("-inf")
    counts: dict = field(default_factory=lambda: {c: 0 for c in CATEGORIES})
    unclassified: int = 0

    def add(self, fact: CommitFacts) -> "DeveloperAccumulator":
        s = frozenset(fact.change_types)
        self.commits += 1
        self.union |= s
        self.muse = max(self.muse, len(s))
        self.versatility_sum += len(s)
        self.distinct_sets |= {s}
        self.first = min(self.first, fact.timestamp)
        self.last = max(self.last, fact.timestamp)
        if fact.categories:
            for c in fact.categories:
                self.counts[ChangeCategory(c)] += 1
        else:
            self.unclassified += 1
        return self

    def merge(self, other: "DeveloperAccumulator") -> "DeveloperAccumulator":
        out = DeveloperAccumulator(
            commits=self.commits + other.commits,
            union=self.union | other.union,
            muse=max(self.muse, other.muse),
            versatility_sum=self.versatility_sum + other.versatility_sum,
            distinct_sets=self.distinct_sets | other.distinct_sets,
            first=min(self.first, other.first),
            last=max(self.last, other.last),
            counts={c: self.counts[c] + other.counts[c] for c in CATEGORIES},
            unclassified=self.unclassified + other.unclassified,
        )
        return out

    def row(self, repo_id: str, developer_id: str, repo_first: float) -> DeveloperMetricsRow:
        start = (self.first - repo_first) / SECONDS_PER_DAY
        if start < 0:
            warn(repo_id, "-", f"developer {developer_id} commits before the repository's first commit; clamped to 0")
            start = 0.0
        duration = (self.last - self.first) / SECONDS_PER_DAY
        return DeveloperMetricsRow(
            repo_id=repo_id,
            developer_id=developer_id,
            commits=self.commits,
            developer_versatility=len(self.union),
            muse=self.muse,
            mean_commit_versatility=self.versatility_sum / self.commits,
            versatility_level=len(self.distinct_sets),
            contrib_start_rel=start,
            contrib_duration=duration,
            mtbc=duration / (self.commits - 1) if self.commits >= 2 else 0.0,
            corrective=self.counts[ChangeCategory.CORRECTIVE],
            perfective=self.counts[ChangeCategory.PERFECTIVE],
            adaptive=self.counts[ChangeCategory.ADAPTIVE],
            unclassified=self.unclassified,
        )


def accumulate(facts: Iterable[CommitFacts]) -> dict[str, DeveloperAccumulator]:
    accs: dict[str, DeveloperAccumulator] = {}
    for f in facts:
        accs.setdefault(f.developer, DeveloperAccumulator()).add(f)
    return accs


def merge_accumulators(*parts: dict[str, DeveloperAccumulator]) -> dict[str, DeveloperAccumulator]:
    out: dict[str, DeveloperAccumulator] = {}
    for part in parts:
        for dev, acc in part.items():
            out[dev] = out[dev].merge(acc) if dev in out else acc.merge(DeveloperAccumulator())
    return out


def aggregate(repo_id: str, facts: Iterable[CommitFacts],
              repo_first: float | None = None) -> list[DeveloperMetricsRow]:
    """One row per developer with at least one commit, sorted by developer id.

    ``repo_first`` defaults to the earliest commit timestamp in ``facts``.
    """
    facts = list(facts)
    if not facts:
        return []
    if repo_first is None:
        repo_first = min(f.timestamp for f in facts)
    accs = accumulate(facts)
    return [accs[d].row(repo_id, d, repo_first) for d in sorted(accs)]


# --------------------------------------------------------------------------
# metrics.csv

def _fmt(row: DeveloperMetricsRow, name: str) -> str:
    value = getattr(row, name)
    return f"{value:.6f}" if name in _FLOAT_FIELDS else str(value)


def write_metrics(rows: Iterable[DeveloperMetricsRow], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(METRICS_HEADER)
    for row in sorted(rows, key=lambda r: r.key):
        writer.writerow([_fmt(row, n) for n in METRICS_HEADER])


def metrics_csv(rows: Iterable[DeveloperMetricsRow]) -> str:
    buf = io.StringIO()
    write_metrics(rows, buf)
    return buf.getvalue()


def read_metrics(fh) -> list[DeveloperMetricsRow]:
    reader = csv.DictReader(fh)
    missing = set(METRICS_HEADER) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"metrics table lacks columns: {', '.join(sorted(missing))}")
    rows = []
    for rec in reader:
        kw = {}
        for n in METRICS_HEADER:
            if n in ("repo_id", "developer_id"):
                kw[n] = rec[n]
            elif n in _FLOAT_FIELDS:
                kw[n] = float(rec[n])
            else:
                kw[n] = int(rec[n])
        rows.append(DeveloperMetricsRow(**kw))
    return rows

"""End-to-end mining pipeline and report tables.

ingest -> distill -> classify -> aggregate -> predict, fanned out over a
process pool.  Every reducer is order-normalised, so the written tables do
not depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ._diag import warn
from .classify import CATEGORIES, ChangeCategory, KeywordTable, categories_for
from .distill import RENAME_SIMILARITY, ParseError, SemanticChange, distill
from .metrics import CommitFacts, DeveloperMetricsRow, aggregate, write_metrics
from .model import GlmModel, MaintenanceProfile, builtin_model, predict
from .vcs import (DEFAULT_EXTENSIONS, CommitRecord, GitError, NotARepository,
                  enumerate_commits, repo_id_for, revision_pairs)

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 1.0
DEFAULT_SAMPLE_SIZE = 150


@dataclass
class PipelineConfig:
    extensions: tuple[str, ...] = DEFAULT_EXTENSIONS
    keywords: KeywordTable = field(default_factory=KeywordTable)
    multi_label: bool = False
    model: GlmModel = field(default_factory=builtin_model)
    log_floor: float | None = None
    threshold: float = DEFAULT_THRESHOLD
    jobs: int = 1
    seed: int = 0
    sample_size: int = DEFAULT_SAMPLE_SIZE
    rename_similarity: float = RENAME_SIMILARITY

    @property
    def effective_log_floor(self) -> float:
        return self.model.log_floor if self.log_floor is None else self.log_floor


# --------------------------------------------------------------------------
# per-commit work (runs in worker processes)

def distill_commit(repo_path: str, repo_id: str, commit: CommitRecord,
                   extensions: tuple[str, ...] = DEFAULT_EXTENSIONS,
                   threshold: float = RENAME_SIMILARITY) -> list[SemanticChange]:
    """All semantic changes of one commit; unparseable files are skipped."""
    changes: list[SemanticChange] = []
    for pair in revision_pairs(repo_path, commit, extensions):
        try:
            changes.extend(distill(pair, threshold))
        except ParseError as exc:
            warn(repo_id, commit.commit_id, f"{exc}; file pair skipped")
    return sorted(changes)


def _distill_task(args):
    repo_path, repo_id, commit, extensions, threshold = args
    try:
        return distill_commit(repo_path, repo_id, commit, extensions, threshold), None
    except (GitError, OSError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


@dataclass
class RepoResult:
    repo_id: str
    path: str
    commits: list[CommitRecord]
    changes: dict[str, list[SemanticChange]]
    categories: dict[str, frozenset]
    rows: list[DeveloperMetricsRow]


@dataclass
class ProjectProfile:
    repo_id: str
    actual: dict
    predicted: dict
    developer_count: int


@dataclass(frozen=True)
class AnomalyRecord:
    subject: str
    repo_id: str
    category: ChangeCategory
    actual: float
    predicted: float
    deviation_score: float
    level: str = "developer"


@dataclass
class PipelineResult:
    repos: list[RepoResult]
    rows: list[DeveloperMetricsRow]
    profiles: list[MaintenanceProfile]
    projects: list[ProjectProfile]
    anomalies: list[AnomalyRecord]
    failures: list[tuple[str, str]]

    @property
    def exit_code(self) -> int:
        return 0 if self.repos else 2


def commit_facts(repo: RepoResult) -> list[CommitFacts]:
    return [
        CommitFacts(
            commit_id=c.commit_id,
            developer=c.author.key,
            timestamp=c.timestamp,
            change_types=frozenset(ch.change_type for ch in repo.changes.get(c.commit_id, ())),
            categories=repo.categories[c.commit_id],
        )
        for c in repo.commits
    ]


def _map(func, tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, tasks, chunksize=max(1, len(tasks) // (jobs * 4))))


def _enumerate_task(path: str):
    try:
        rid = str(repo_id_for(path))
        return rid, enumerate_commits(path), None
    except (NotARepository, GitError, OSError) as exc:
        return None, None, f"{type(exc).__name__}: {exc}"


def mine_repositories(repo_paths: Sequence[str], config: PipelineConfig | None = None
                      ) -> tuple[list[RepoResult], list[tuple[str, str]]]:
    """Ingest, distill, classify and aggregate each repository."""
    config = config or PipelineConfig()
    enumerated = _map(_enumerate_task, list(repo_paths), config.jobs)

    failures: list[tuple[str, str]] = []
    tasks = []
    live = []
    for path, (rid, commits, error) in zip(repo_paths, enumerated):
        if error is not None:
            warn(path, "-", f"repository failed: {error}")
            failures.append((path, error))
            continue
        live.append((path, rid, commits))
        for c in commits:
            tasks.append((path, rid, c, tuple(config.extensions), config.rename_similarity))

    outcomes = _map(_distill_task, tasks, config.jobs)
    per_repo: dict[str, dict[str, list[SemanticChange]]] = {}
    broken: dict[str, str] = {}
    for (path, rid, commit, *_), (changes, error) in zip(tasks, outcomes):
        if error is not None:
            broken.setdefault(rid, error)
            continue
        per_repo.setdefault(rid, {})[commit.commit_id] = changes

    results = []
    for path, rid, commits in live:
        if rid in broken:
            warn(rid, "-", f"repository failed: {broken[rid]}")
            failures.append((path, broken[rid]))
            continue
        cats = {c.commit_id: categories_for(c.message, config.keywords, config.multi_label)
                for c in commits}
        repo = RepoResult(rid, path, commits, per_repo.get(rid, {}), cats, [])
        repo.rows = aggregate(rid, commit_facts(repo))
        results.append(repo)
    results.sort(key=lambda r: r.repo_id)
    failures.sort()
    return results, failures


def run_pipeline(repo_paths: Sequence[str], config: PipelineConfig | None = None,
                 out_dir: str | None = None) -> PipelineResult:
    """Run every stage and, when ``out_dir`` is given, write all report tables."""
    config = config or PipelineConfig()
    repos, failures = mine_repositories(repo_paths, config)
    rows = sorted((r for repo in repos for r in repo.rows), key=lambda r: r.key)
    floor = config.effective_log_floor
    profiles = [predict(r, config.model, floor) for r in rows]
    projects = project_profiles(rows, profiles)
    anomalies = detect_anomalies(rows, profiles, config.threshold)
    result = PipelineResult(repos, rows, profiles, projects, anomalies, failures)
    if out_dir is not None:
        write_outputs(result, out_dir, config)
    return result


# --------------------------------------------------------------------------
# project aggregation and anomalies

def _profile_index(profiles: Iterable[MaintenanceProfile]) -> dict:
    return {(p.repo_id, p.developer_id): p for p in profiles}


def aggregate_project(rows: Sequence[DeveloperMetricsRow],
                      profiles: Iterable[MaintenanceProfile]) -> ProjectProfile:
    """Sum developer actuals and count estimates of one repository."""
    repo_ids = {r.repo_id for r in rows}
    if len(repo_ids) != 1:
        raise ValueError(f"rows must come from exactly one repository, got {sorted(repo_ids)}")
    index = _profile_index(profiles)
    actual = {c: sum(r.actual(c) for r in rows) for c in CATEGORIES}
    predicted = {c: sum(index[r.key][c].count_estimate for r in rows) for c in CATEGORIES}
    return ProjectProfile(repo_ids.pop(), actual, predicted, len(rows))


def project_profiles(rows: Sequence[DeveloperMetricsRow],
                     profiles: Sequence[MaintenanceProfile]) -> list[ProjectProfile]:
    by_repo: dict[str, list[DeveloperMetricsRow]] = {}
    for r in rows:
        by_repo.setdefault(r.repo_id, []).append(r)
    return [aggregate_project(by_repo[k], profiles) for k in sorted(by_repo)]


def deviation_score(actual: float, predicted: float) -> float:
    return abs(actual - predicted) / max(predicted, 1.0)


def _sort_anomalies(records: list[AnomalyRecord]) -> list[AnomalyRecord]:
    order = {c: i for i, c in enumerate(CATEGORIES)}
    return sorted(records, key=lambda a: (-a.deviation_score, a.repo_id, a.subject,
                                          order[a.category]))


def detect_anomalies(rows: Sequence[DeveloperMetricsRow], profiles: Iterable[MaintenanceProfile],
                     threshold: float = DEFAULT_THRESHOLD) -> list[AnomalyRecord]:
    """Developer/category cells whose deviation score exceeds ``threshold``."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    index = _profile_index(profiles)
    out = []
    for r in rows:
        prof = index[r.key]
        for c in CATEGORIES:
            actual, predicted = r.actual(c), prof[c].count_estimate
            score = deviation_score(actual, predicted)
            if score > threshold:
                out.append(AnomalyRecord(r.developer_id, r.repo_id, c, actual, predicted, score))
    return _sort_anomalies(out)


def detect_project_anomalies(projects: Iterable[ProjectProfile],
                             threshold: float = DEFAULT_THRESHOLD) -> list[AnomalyRecord]:
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    out = []
    for p in projects:
        for c in CATEGORIES:
            score = deviation_score(p.actual[c], p.predicted[c])
            if score > threshold:
                out.append(AnomalyRecord(p.repo_id, p.repo_id, c, p.actual[c], p.predicted[c],
                                         score, "repository"))
    return _sort_anomalies(out)


# --------------------------------------------------------------------------
# tables

def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _f(x: float) -> str:
    return f"{x:.6f}"


def emit_plot_data(rows: Sequence[DeveloperMetricsRow], profiles: Iterable[MaintenanceProfile],
                   sample_size: int = DEFAULT_SAMPLE_SIZE, seed: int = 0, fh=None) -> str:
    """Actual vs predicted per sampled developer, one block per category.

    The sample is drawn with ``random.Random(seed)`` from rows sorted by
    (repo, developer) and re-sorted, so ``developer_index`` runs in id order.
    """
    if sample_size > len(rows):
        raise ValueError(f"sample_size {sample_size} exceeds the {len(rows)} available rows")
    ordered = sorted(rows, key=lambda r: r.key)
    picked = sorted(random.Random(seed).sample(range(len(ordered)), sample_size))
    sample = [ordered[i] for i in picked]
    index = _profile_index(profiles)
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(["developer_index", "category", "actual", "predicted"])
    for c in CATEGORIES:
        for i, r in enumerate(sample):
            w.writerow([i, c.value, r.actual(c), _f(index[r.key][c].count_estimate)])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def profiles_csv(rows: Sequence[DeveloperMetricsRow], profiles: Iterable[MaintenanceProfile]) -> str:
    index = _profile_index(profiles)
    buf = io.StringIO()
    w = _writer(buf)
    header = ["repo_id", "developer_id"]
    for c in CATEGORIES:
        header += [f"{c.value}_actual", f"{c.value}_linear_predictor", f"{c.value}_predicted"]
    w.writerow(header)
    for r in sorted(rows, key=lambda r: r.key):
        p = index[r.key]
        line = [r.repo_id, r.developer_id]
        for c in CATEGORIES:
            line += [r.actual(c), _f(p[c].linear_predictor), _f(p[c].count_estimate)]
        w.writerow(line)
    return buf.getvalue()


def projects_csv(projects: Iterable[ProjectProfile]) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(["repo_id", "developer_count"]
               + [f"{c.value}_{k}" for c in CATEGORIES for k in ("actual", "predicted")])
    for p in sorted(projects, key=lambda p: p.repo_id):
        line = [p.repo_id, p.developer_count]
        for c in CATEGORIES:
            line += [p.actual[c], _f(p.predicted[c])]
        w.writerow(line)
    return buf.getvalue()


def anomalies_csv(records: Iterable[AnomalyRecord]) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(["level", "repo_id", "subject", "category", "actual", "predicted", "deviation_score"])
    for a in records:
        w.writerow([a.level, a.repo_id, a.subject, a.category.value, a.actual,
                    _f(a.predicted), _f(a.deviation_score)])
    return buf.getvalue()


COMMITS_HEADER = ("repo_id", "commit_id", "developer_id", "timestamp", "parent_count",
                  "categories", "message")


def commits_csv(repos: Iterable[RepoResult]) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(COMMITS_HEADER)
    order = {c: i for i, c in enumerate(CATEGORIES)}
    for repo in sorted(repos, key=lambda r: r.repo_id):
        for c in repo.commits:
            cats = ";".join(x.value for x in sorted(repo.categories[c.commit_id], key=order.get))
            w.writerow([repo.repo_id, c.commit_id, c.author.key, c.timestamp, c.parent_count,
                        cats, c.message])
    return buf.getvalue()


def changes_dump(repos: Iterable[RepoResult]) -> str:
    """``<commit_id>\\t<file>\\t<change_type>\\t<entity>`` lines, one ``# repo`` section per repository."""
    lines = []
    for repo in sorted(repos, key=lambda r: r.repo_id):
        lines.append(f"# repo {repo.repo_id}")
        for c in repo.commits:
            lines.extend(ch.to_line() for ch in repo.changes.get(c.commit_id, ()))
    return "".join(line + "\n" for line in lines)


def read_changes_dump(fh) -> dict[str, dict[str, list[SemanticChange]]]:
    out: dict[str, dict[str, list[SemanticChange]]] = {}
    repo = ""
    for line in fh:
        if line.startswith("# repo "):
            repo = line[len("# repo "):].strip()
            out.setdefault(repo, {})
            continue
        if not line.strip() or line.startswith("#"):
            continue
        ch = SemanticChange.from_line(line)
        out.setdefault(repo, {}).setdefault(ch.commit_id, []).append(ch)
    return out


def rows_from_dumps(commits_fh, changes_fh) -> list[DeveloperMetricsRow]:
    """Recompute metric rows from persisted ``commits.csv`` and ``changes.tsv``."""
    changes = read_changes_dump(changes_fh)
    facts: dict[str, list[CommitFacts]] = {}
    for rec in csv.DictReader(commits_fh):
        rid = rec["repo_id"]
        types = frozenset(ch.change_type for ch in changes.get(rid, {}).get(rec["commit_id"], ()))
        cats = frozenset(ChangeCategory(x) for x in rec["categories"].split(";") if x)
        facts.setdefault(rid, []).append(CommitFacts(
            rec["commit_id"], rec["developer_id"], int(rec["timestamp"]), types, cats))
    rows = []
    for rid in sorted(facts):
        rows.extend(aggregate(rid, facts[rid]))
    return rows


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_outputs(result: PipelineResult, out_dir: str, config: PipelineConfig) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "metrics.csv"), "w", encoding="utf-8", newline="") as fh:
        write_metrics(result.rows, fh)
    _write(os.path.join(out_dir, "commits.csv"), commits_csv(result.repos))
    _write(os.path.join(out_dir, "changes.tsv"), changes_dump(result.repos))
    _write(os.path.join(out_dir, "profiles.csv"), profiles_csv(result.rows, result.profiles))
    _write(os.path.join(out_dir, "projects.csv"), projects_csv(result.projects))
    anomalies = result.anomalies + detect_project_anomalies(result.projects, config.threshold)
    _write(os.path.join(out_dir, "anomalies.csv"), anomalies_csv(anomalies))
    n = min(config.sample_size, len(result.rows))
    _write(os.path.join(out_dir, "plot.csv"),
           emit_plot_data(result.rows, result.profiles, n, config.seed))

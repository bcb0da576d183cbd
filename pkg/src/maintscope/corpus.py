"""Candidate repository selection and bulk cloning."""

from __future__ import annotations

import datetime as dt
import json
import logging
import os
import shutil
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import requests

from ._diag import warn

logger = logging.getLogger(__name__)

DEFAULT_API_URL = "https://api.github.com"
TOKEN_ENV = "MAINTSCOPE_TOKEN"


class AuthFailure(Exception):
    pass


class RateLimited(Exception):
    pass


def _date(value) -> dt.date:
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    return dt.date.fromisoformat(str(value)[:10])


@dataclass(frozen=True)
class RepoCandidate:
    full_name: str
    stars: int
    forks: int
    created_at: dt.date
    pushed_at: dt.date
    size_kb: int
    language: str
    clone_url: str

    def __post_init__(self):
        for name in ("stars", "forks", "size_kb"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        object.__setattr__(self, "created_at", _date(self.created_at))
        object.__setattr__(self, "pushed_at", _date(self.pushed_at))

    @classmethod
    def from_api(cls, item: dict) -> "RepoCandidate":
        return cls(
            full_name=item["full_name"],
            stars=int(item["stargazers_count"]),
            forks=int(item["forks_count"]),
            created_at=item["created_at"],
            pushed_at=item["pushed_at"],
            size_kb=int(item["size"]),
            language=item.get("language") or "",
            clone_url=item["clone_url"],
        )

    def to_json(self) -> str:
        d = asdict(self)
        d["created_at"] = self.created_at.isoformat()
        d["pushed_at"] = self.pushed_at.isoformat()
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "RepoCandidate":
        return cls(**json.loads(line))


@dataclass(frozen=True)
class SelectionCriteria:
    language: str = "Java"
    min_stars_exclusive: int = 100
    min_forks_exclusive: int = 60
    pushed_on_or_after: dt.date = dt.date(2016, 1, 1)
    created_before: dt.date = dt.date(2015, 1, 1)
    min_size_kb_exclusive: int = 2048
    result_cap: int = 1000

    def query(self) -> str:
        return " ".join([
            f"language:{self.language}",
            f"stars:>{self.min_stars_exclusive}",
            f"forks:>{self.min_forks_exclusive}",
            f"pushed:>={self.pushed_on_or_after.isoformat()}",
            f"created:<{self.created_before.isoformat()}",
            f"size:>{self.min_size_kb_exclusive}",
        ])


def matches(candidate: RepoCandidate, criteria: SelectionCriteria | None = None) -> bool:
    c = criteria or SelectionCriteria()
    return (
        candidate.language.casefold() == c.language.casefold()
        and candidate.stars > c.min_stars_exclusive
        and candidate.forks > c.min_forks_exclusive
        and candidate.pushed_at >= c.pushed_on_or_after
        and candidate.created_at < c.created_before
        and candidate.size_kb > c.min_size_kb_exclusive
    )


def load_candidates(path: str) -> list[RepoCandidate]:
    """Offline candidate list: one JSON object per line."""
    with open(path, encoding="utf-8") as fh:
        return [RepoCandidate.from_json(line) for line in fh if line.strip()]


def save_candidates(candidates: Iterable[RepoCandidate], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for c in candidates:
            fh.write(c.to_json() + "\n")


def _reset_delay(response: requests.Response, now: float) -> float | None:
    headers = response.headers
    if response.status_code not in (403, 429):
        return None
    if headers.get("Retry-After"):
        return max(float(headers["Retry-After"]), 0.0)
    if headers.get("X-RateLimit-Remaining") == "0":
        return max(float(headers.get("X-RateLimit-Reset", now)) - now, 0.0)
    return None


def search(criteria: SelectionCriteria | None = None, api_endpoint: str = DEFAULT_API_URL,
           auth_token: str | None = None, per_page: int = 100, max_retries: int = 3,
           session: requests.Session | None = None,
           sleep: Callable[[float], None] = time.sleep) -> list[RepoCandidate]:
    """Page through the repository search API until the cap or exhaustion.

    Every returned candidate is re-validated with :func:`matches`.
    Malformed pages end the search with the results gathered so far.
    """
    criteria = criteria or SelectionCriteria()
    token = auth_token if auth_token is not None else os.environ.get(TOKEN_ENV)
    http = session or requests.Session()
    headers = {"Accept": "application/vnd.github+json"}
    if token:
        headers["Authorization"] = f"Bearer {token}"
    url = api_endpoint.rstrip("/") + "/search/repositories"
    params = {"q": criteria.query(), "sort": "stars", "order": "desc", "per_page": per_page}

    results: list[RepoCandidate] = []
    seen = set()
    page = 1
    while len(results) < criteria.result_cap:
        attempts = 0
        while True:
            resp = http.get(url, params={**params, "page": page}, headers=headers, timeout=30)
            if resp.status_code == 401:
                raise AuthFailure(f"{url}: authentication failed")
            delay = _reset_delay(resp, time.time())
            if delay is None:
                break
            attempts += 1
            if attempts > max_retries:
                raise RateLimited(f"{url}: still rate limited after {max_retries} retries")
            logger.warning("rate limited; sleeping %.1f s", delay)
            sleep(delay)
        try:
            resp.raise_for_status()
            items = resp.json()["items"]
            page_candidates = [RepoCandidate.from_api(it) for it in items]
        except (ValueError, KeyError, TypeError, requests.HTTPError) as exc:
            warn(api_endpoint, "-", f"malformed search response on page {page}: {exc}")
            break
        for cand in page_candidates:
            if cand.full_name in seen:
                continue
            if not matches(cand, criteria):
                logger.info("dropping %s: does not meet the selection criteria", cand.full_name)
                continue
            seen.add(cand.full_name)
            results.append(cand)
            if len(results) >= criteria.result_cap:
                break
        if len(items) < per_page:
            break
        page += 1
    return results


@dataclass
class CloneReport:
    succeeded: list[str] = field(default_factory=list)
    failed: list[tuple[str, str]] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    @property
    def counts(self) -> tuple[int, int]:
        return len(self.succeeded), len(self.failed)


def clone_path(dest_dir: str, candidate: RepoCandidate) -> str:
    return os.path.join(dest_dir, candidate.full_name.replace("/", "__") + ".git")


def _is_valid_clone(path: str) -> bool:
    if not os.path.isdir(path):
        return False
    proc = subprocess.run(["git", "-C", path, "rev-parse", "--is-bare-repository"],
                          capture_output=True, text=True)
    return proc.returncode == 0 and proc.stdout.strip() == "true"


def _clone_one(candidate: RepoCandidate, dest_dir: str) -> tuple[str, str | None, bool]:
    path = clone_path(dest_dir, candidate)
    if _is_valid_clone(path):
        return candidate.full_name, None, True
    if os.path.exists(path):
        return candidate.full_name, f"{path} exists but is not a bare repository", False
    tmp = path + ".partial"
    shutil.rmtree(tmp, ignore_errors=True)
    proc = subprocess.run(
        ["git", "clone", "--bare", "--quiet", candidate.clone_url, tmp],
        capture_output=True, text=True, env={**os.environ, "GIT_TERMINAL_PROMPT": "0"})
    if proc.returncode != 0:
        shutil.rmtree(tmp, ignore_errors=True)
        return candidate.full_name, proc.stderr.strip() or f"git exited {proc.returncode}", False
    os.replace(tmp, path)
    return candidate.full_name, None, False


def clone_all(candidates: Iterable[RepoCandidate], dest_dir: str,
              parallelism: int = 4) -> CloneReport:
    """Bare-clone every candidate; failures are recorded, never raised.

    Existing valid clones are skipped and counted as succeeded.
    """
    os.makedirs(dest_dir, exist_ok=True)
    candidates = sorted(candidates, key=lambda c: c.full_name)
    report = CloneReport()
    if not candidates:
        return report
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        outcomes = list(pool.map(lambda c: _clone_one(c, dest_dir), candidates))
    for name, error, skipped in outcomes:
        if error is not None:
            warn(name, "-", f"clone failed: {error}")
            report.failed.append((name, error))
        else:
            report.succeeded.append(name)
            if skipped:
                report.skipped.append(name)
    return report

"""Git history ingestion.

Walks the first-parent history of a repository's HEAD, produces one
:class:`CommitRecord` per commit and, per commit, the before/after text of
every touched source file.  All Git access goes through the ``git``
executable so bare clones and work trees are handled the same way.
"""

from __future__ import annotations

import hashlib
import os
import subprocess
from dataclasses import dataclass, field
from typing import Iterable

from ._diag import warn

EMPTY = None  # marker for a missing side of a revision pair
NULL_SHA = "0" * 40
DEFAULT_EXTENSIONS = (".java",)


class NotARepository(Exception):
    pass


class GitError(Exception):
    pass


@dataclass(frozen=True, order=True)
class RepoId:
    id: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("RepoId must be non-empty")

    def __str__(self) -> str:
        return self.id


@dataclass(frozen=True, order=True)
class DeveloperId:
    repo: RepoId
    key: str

    def __str__(self) -> str:
        return self.key


@dataclass(frozen=True)
class CommitRecord:
    commit_id: str
    author: DeveloperId
    timestamp: int
    message: str
    parent_count: int
    parents: tuple[str, ...] = field(default=(), compare=False, repr=False)

    @property
    def is_merge(self) -> bool:
        return self.parent_count >= 2


@dataclass(frozen=True)
class RevisionPair:
    commit_id: str
    file_path: str
    before: str | None
    after: str | None

    def __post_init__(self):
        if self.before is EMPTY and self.after is EMPTY:
            raise ValueError(f"{self.file_path}: both sides of a revision pair are empty")


def _git(repo_path: str, *args: str, input: bytes | None = None) -> bytes:
    proc = subprocess.run(
        ["git", "-C", repo_path, *args],
        input=input,
        capture_output=True,
        env={**os.environ, "GIT_TERMINAL_PROMPT": "0", "LC_ALL": "C"},
    )
    if proc.returncode != 0:
        raise GitError(proc.stderr.decode("utf-8", "replace").strip())
    return proc.stdout


def check_repository(repo_path: str) -> str:
    """Return the git dir of ``repo_path`` or raise :class:`NotARepository`."""
    if not os.path.isdir(repo_path):
        raise NotARepository(repo_path)
    try:
        gitdir = _git(repo_path, "rev-parse", "--absolute-git-dir").decode().strip()
        bare = _git(repo_path, "rev-parse", "--is-bare-repository").decode().strip() == "true"
        root = gitdir if bare else _git(repo_path, "rev-parse", "--show-toplevel").decode().strip()
    except GitError as exc:
        raise NotARepository(f"{repo_path}: {exc}") from None
    # a plain directory nested inside some other work tree is not a repository of its own
    if os.path.realpath(root) != os.path.realpath(repo_path):
        raise NotARepository(repo_path)
    return gitdir


def repo_id_for(repo_path: str) -> RepoId:
    """Stable identifier for a local repository: directory name plus path digest."""
    path = os.path.realpath(repo_path)
    name = os.path.basename(path.rstrip(os.sep)) or "repo"
    if name.endswith(".git"):
        name = name[:-4] or "repo"
    digest = hashlib.sha1(path.encode("utf-8")).hexdigest()[:10]
    return RepoId(f"{name}@{digest}")


def resolve_identity(author_name: str, author_email: str, repo: RepoId,
                     commit_id: str = "") -> DeveloperId:
    """Map raw author fields to a repository-scoped developer identity.

    The key is the case-folded, trimmed email; the case-folded name is used
    when the email is empty, and ``unknown@<commit_id>`` when both are.
    """
    email = (author_email or "").strip().casefold()
    if email:
        return DeveloperId(repo, email)
    name = " ".join((author_name or "").split()).casefold()
    if name:
        return DeveloperId(repo, name)
    return DeveloperId(repo, f"unknown@{commit_id}")


_FIELD = "\x1f"
_RECORD = "\x1e"
_LOG_FORMAT = _FIELD.join(["%H", "%P", "%an", "%ae", "%at", "%B"]) + _RECORD


def enumerate_commits(repo_path: str, repo: RepoId | None = None) -> list[CommitRecord]:
    """First-parent history of HEAD, ascending by (timestamp, commit hash)."""
    check_repository(repo_path)
    repo = repo or repo_id_for(repo_path)
    try:
        _git(repo_path, "rev-parse", "--verify", "-q", "HEAD^{commit}")
    except GitError:
        warn(str(repo), "-", "empty repository (no commits on HEAD)")
        return []
    raw = _git(repo_path, "log", "--first-parent", f"--format={_LOG_FORMAT}", "HEAD")
    text = raw.decode("utf-8", "replace")
    commits = []
    for chunk in text.split(_RECORD):
        chunk = chunk.lstrip("\n")
        if not chunk:
            continue
        sha, parents, name, email, ts, message = chunk.split(_FIELD, 5)
        parent_list = tuple(parents.split())
        commits.append(CommitRecord(
            commit_id=sha,
            author=resolve_identity(name, email, repo, sha),
            timestamp=int(ts),
            message=message.rstrip("\n"),
            parent_count=len(parent_list),
            parents=parent_list,
        ))
    commits.sort(key=lambda c: (c.timestamp, c.commit_id))
    return commits


def _matches_ext(path: str, extensions: Iterable[str]) -> bool:
    return any(path.endswith(ext) for ext in extensions)


def _read_blobs(repo_path: str, shas: list[str]) -> dict[str, bytes | None]:
    """Read many blobs through a single ``git cat-file --batch`` call."""
    if not shas:
        return {}
    out = _git(repo_path, "cat-file", "--batch", input="".join(s + "\n" for s in shas).encode())
    blobs: dict[str, bytes | None] = {}
    pos = 0
    for sha in shas:
        nl = out.index(b"\n", pos)
        header = out[pos:nl].decode()
        pos = nl + 1
        if header.endswith("missing"):
            blobs[sha] = None
            continue
        _, kind, size = header.split()
        size = int(size)
        blobs[sha] = out[pos:pos + size] if kind == "blob" else None
        pos += size + 1
    return blobs


def _decode(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        return data.decode("latin-1")


def revision_pairs(repo_path: str, commit: CommitRecord,
                   extensions: Iterable[str] = DEFAULT_EXTENSIONS,
                   repo: RepoId | None = None) -> list[RevisionPair]:
    """Before/after text of each source file touched relative to the first parent."""
    if commit.is_merge:
        return []
    extensions = tuple(extensions)
    if commit.parent_count == 0:
        args = ["diff-tree", "-r", "--root", "--no-renames", "--raw", "-z", commit.commit_id]
    else:
        parent = commit.parents[0] if commit.parents else f"{commit.commit_id}^1"
        args = ["diff-tree", "-r", "--no-renames", "--raw", "-z", parent, commit.commit_id]
    fields = _git(repo_path, *args).decode("utf-8", "surrogateescape").split("\0")
    entries = []
    i = 0
    while i < len(fields):
        meta = fields[i]
        if not meta.startswith(":"):
            i += 1
            continue
        path = fields[i + 1]
        i += 2
        _, _, old_sha, new_sha, _status = meta[1:].split()
        if _matches_ext(path, extensions):
            entries.append((path, old_sha, new_sha))

    wanted = sorted({s for _, a, b in entries for s in (a, b) if s != NULL_SHA})
    blobs = _read_blobs(repo_path, wanted)
    pairs = []
    for path, old_sha, new_sha in sorted(entries):
        sides = []
        for sha in (old_sha, new_sha):
            if sha == NULL_SHA:
                sides.append(EMPTY)
            elif blobs.get(sha) is None:
                sides.append(False)
            else:
                sides.append(_decode(blobs[sha]))
        if False in sides:
            warn(str(repo or repo_id_for(repo_path)), commit.commit_id, f"unreadable blob for {path}; skipped")
            continue
        if sides[0] is EMPTY and sides[1] is EMPTY:
            continue
        pairs.append(RevisionPair(commit.commit_id, path, sides[0], sides[1]))
    return pairs

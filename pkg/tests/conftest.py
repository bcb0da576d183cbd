import os
import subprocess
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
JAVA_CORPUS = sorted((DATA / "java").glob("*.java"))
DAY = 86400
T0 = 1_500_000_000


def git(repo, *args, ts=None, name="Fixture", email="fixture@example.org"):
    env = {
        **os.environ,
        "GIT_CONFIG_NOSYSTEM": "1",
        "GIT_CONFIG_GLOBAL": os.devnull,
        "GIT_AUTHOR_NAME": name,
        "GIT_AUTHOR_EMAIL": email,
        "GIT_COMMITTER_NAME": name,
        "GIT_COMMITTER_EMAIL": email,
    }
    if ts is not None:
        env["GIT_AUTHOR_DATE"] = env["GIT_COMMITTER_DATE"] = f"@{ts} +0000"
    out = subprocess.run(["git", "-C", str(repo), "-c", "commit.gpgsign=false", *args],
                         check=True, capture_output=True, env=env)
    return out.stdout.decode().strip()


def _apply(repo: Path, files: dict):
    for rel, content in files.items():
        p = repo / rel
        if content is None:
            git(repo, "rm", "-q", rel)
        else:
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(content, encoding="utf-8")
            git(repo, "add", rel)


def make_repo(path, commits):
    """Build a repository from commit specs.

    Each spec is a dict with ``files`` ({path: text or None to delete}),
    ``message``, ``ts`` and optional ``name``/``email``.  A spec with
    ``merge`` (a files dict) commits those files on a side branch at
    ``ts - 1`` and merges it into main with ``message``.
    """
    repo = Path(path)
    repo.mkdir(parents=True, exist_ok=True)
    subprocess.run(["git", "init", "-q", "-b", "main", str(repo)], check=True)
    shas = []
    for spec in commits:
        who = {"name": spec.get("name", "Alice"), "email": spec.get("email", "alice@example.org")}
        if "merge" in spec:
            git(repo, "checkout", "-q", "-b", "side")
            _apply(repo, spec["merge"])
            git(repo, "commit", "-q", "-m", "side work", ts=spec["ts"] - 1, **who)
            git(repo, "checkout", "-q", "main")
            git(repo, "merge", "-q", "--no-ff", "side", "-m", spec["message"], ts=spec["ts"], **who)
            git(repo, "branch", "-q", "-D", "side")
        else:
            _apply(repo, spec.get("files", {}))
            git(repo, "commit", "-q", "--allow-empty", "--allow-empty-message",
                "-m", spec.get("message", ""), ts=spec["ts"], **who)
        shas.append(git(repo, "rev-parse", "HEAD"))
    return repo, shas


COUNTER_V1 = """package demo;
public class Counter {
    private int count;
    public void increment() { count++; }
}
"""
COUNTER_V2 = """package demo;
public class Counter {
    private int count;
    public void increment() { count++; log(); }
    public int get() { return count; }
}
"""
COUNTER_V3 = """package demo;
public class Counter {
    private long count;
    public void increment() { count += 1; log(); }
    public long get() { return count; }
}
"""


def alpha_commits():
    return [
        {"files": {"src/Counter.java": COUNTER_V1}, "message": "Add counter", "ts": T0},
        {"files": {"src/Counter.java": COUNTER_V2}, "message": "Fix bug in increment",
         "ts": T0 + 10 * DAY, "name": "Bob", "email": "bob@example.org"},
        {"files": {"src/Counter.java": COUNTER_V3, "README.md": "counter\n"},
         "message": "Update counter to long", "ts": T0 + 20 * DAY},
        {"files": {"src/Shape.java": (DATA / "java" / "Shape.java").read_text()},
         "message": "introduce shapes", "ts": T0 + 30 * DAY, "name": "Bob", "email": "BOB@example.org"},
    ]


def beta_commits():
    return [
        {"files": {"Queue.java": (DATA / "java" / "Queue.java").read_text()},
         "message": "initial import", "ts": T0 + 5 * DAY, "name": "Carol", "email": "Carol@X.org"},
        {"files": {"Stack.java": (DATA / "java" / "Stack.java").read_text()},
         "message": "new stack feature", "ts": T0 + 6 * DAY, "name": "carol", "email": "carol@x.org "},
        {"merge": {"Cache.java": (DATA / "java" / "Cache.java").read_text()},
         "message": "Merge branch side", "ts": T0 + 8 * DAY, "name": "Dave", "email": "dave@x.org"},
        {"files": {"Queue.java": (DATA / "java" / "Queue.java").read_text().replace("size++;", "size += 1;")},
         "message": "cleanup queue", "ts": T0 + 9 * DAY, "name": "Dave", "email": "dave@x.org"},
    ]


def gamma_commits():
    return [
        {"files": {"a/Config.java": (DATA / "java" / "Config.java").read_text(),
                   "a/Broken.java": "class Broken { void f( { }"},
         "message": "", "ts": T0, "name": "Erin", "email": ""},
        {"files": {"a/Config.java": None, "a/Validator.java": (DATA / "java" / "Validator.java").read_text()},
         "message": "Replace config with validator, closes #3", "ts": T0 + DAY,
         "name": "Erin", "email": ""},
        {"files": {"a/Broken.java": "class Broken { void f() { int x = 1; } }"},
         "message": "handle broken file", "ts": T0 + 3 * DAY, "name": "Frank", "email": "frank@y.org"},
    ]


@pytest.fixture(scope="session")
def fixture_repos(tmp_path_factory):
    base = tmp_path_factory.mktemp("repos")
    paths = []
    for name, commits in (("alpha", alpha_commits()), ("beta", beta_commits()),
                          ("gamma", gamma_commits())):
        repo, _ = make_repo(base / name, commits)
        paths.append(str(repo))
    return paths


@pytest.fixture
def repo_factory(tmp_path):
    counter = iter(range(1000))

    def build(commits, name=None):
        return make_repo(tmp_path / (name or f"repo{next(counter)}"), commits)

    return build

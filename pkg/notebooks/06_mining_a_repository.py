"""
Mining a small repository
=========================

Build a throwaway git repository with three commits and run the full
pipeline over it.
"""

import os
import subprocess
import tempfile

from maintscope import PipelineConfig, run_pipeline

work = tempfile.mkdtemp()
repo = os.path.join(work, "demo")
os.makedirs(repo)


def git(*args, when):
    env = {**os.environ, "GIT_AUTHOR_NAME": "Alice", "GIT_AUTHOR_EMAIL": "alice@example.org",
           "GIT_COMMITTER_NAME": "Alice", "GIT_COMMITTER_EMAIL": "alice@example.org",
           "GIT_AUTHOR_DATE": f"@{when} +0000", "GIT_COMMITTER_DATE": f"@{when} +0000"}
    subprocess.run(["git", "-C", repo, *args], check=True, env=env, capture_output=True)


versions = [
    ("Add counter", "class Counter { int n; void inc() { n++; } }"),
    ("Fix bug in inc", "class Counter { int n; void inc() { n++; log(); } int get() { return n; } }"),
    ("Update counter to long", "class Counter { long n; void inc() { n += 1; log(); } long get() { return n; } }"),
]
subprocess.run(["git", "init", "-q", repo], check=True)
for day, (message, source) in enumerate(versions):
    with open(os.path.join(repo, "Counter.java"), "w") as fh:
        fh.write(source)
    git("add", "Counter.java", when=1_500_000_000 + day * 86400 * 10)
    git("commit", "-q", "-m", message, when=1_500_000_000 + day * 86400 * 10)

out = os.path.join(work, "out")
result = run_pipeline([repo], PipelineConfig(), out)
print(open(os.path.join(out, "metrics.csv")).read())
print(open(os.path.join(out, "profiles.csv")).read())
print(sorted(os.listdir(out)))

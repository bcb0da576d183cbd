"""``maintscope`` command line interface."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys

from . import __version__
from .classify import CATEGORIES, KeywordTable, classify
from .corpus import (DEFAULT_API_URL, AuthFailure, RateLimited, SelectionCriteria, clone_all,
                     load_candidates, matches, save_candidates, search)
from .metrics import read_metrics, write_metrics
from .model import evaluate, fit_model, load_model, predict, split_rows
from .pipeline import (PipelineConfig, anomalies_csv, changes_dump, commits_csv,
                       detect_anomalies, detect_project_anomalies, emit_plot_data,
                       mine_repositories, profiles_csv, project_profiles, projects_csv,
                       rows_from_dumps, run_pipeline, write_outputs)

# config-file keys and how to convert their text values
_CONFIG_KEYS = {
    "jobs": int, "seed": int, "out": str, "ext": str, "keywords": str,
    "multi_label": lambda v: v.strip().lower() in ("1", "true", "yes", "on"),
    "model": str, "log_floor": float, "threshold": float, "sample_size": int,
    "api_url": str, "train_fraction": float,
}


def read_config(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SystemExit(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in _CONFIG_KEYS:
                raise SystemExit(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _CONFIG_KEYS[key](value)
    return out


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("global options")
    g.add_argument("--config", help="key = value file mirroring these flags (flags win)")
    g.add_argument("--jobs", type=int, default=1, help="worker processes (default: %(default)s)")
    g.add_argument("--seed", type=int, default=0, help="seed for splits and sampling (default: %(default)s)")
    g.add_argument("--out", default=".", help="output directory (default: %(default)s)")
    g.add_argument("--ext", default=".java",
                   help="comma-separated source extensions to distill (default: %(default)s)")
    g.add_argument("--keywords", help="keyword table override file")
    g.add_argument("--multi-label", action="store_true", help="count a commit in every matched category")
    g.add_argument("--model", default="builtin", help="'builtin' or a model JSON file (default: %(default)s)")
    g.add_argument("--log-floor", type=float, default=None,
                   help="floor applied before logging zero-able metrics (default: model's, 0.001)")
    g.add_argument("--threshold", type=float, default=1.0, help="anomaly deviation threshold (default: %(default)s)")
    g.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maintscope",
        description="Developer-level repository metrics and maintenance-activity profiles.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="find candidate repositories and optionally clone them")
    p.add_argument("--candidates", help="offline candidate list (JSON lines) instead of the search API")
    p.add_argument("--api-url", default=DEFAULT_API_URL)
    p.add_argument("--cap", type=int, default=1000, help="maximum number of repositories")
    p.add_argument("--clone", metavar="DEST", help="bare-clone the selection into DEST")

    p = sub.add_parser("ingest", help="walk repositories, write commits.csv and changes.tsv")
    p.add_argument("repos", nargs="*")

    p = sub.add_parser("classify", help="classify commit messages")
    p.add_argument("messages", nargs="*")
    p.add_argument("--commits", help="re-classify the messages of a commits.csv file")

    p = sub.add_parser("metrics", help="compute metrics.csv from repositories or dumps")
    p.add_argument("repos", nargs="*")
    p.add_argument("--from-dumps", metavar="DIR", help="recompute from DIR/commits.csv and DIR/changes.tsv")

    p = sub.add_parser("predict", help="predict profiles for a metrics table")
    p.add_argument("--metrics", required=True)

    p = sub.add_parser("fit", help="refit the model on the training split")
    p.add_argument("--metrics", required=True)
    p.add_argument("--train-fraction", type=float, default=0.9)

    p = sub.add_parser("evaluate", help="R^2 of a model on the held-out repositories")
    p.add_argument("--metrics", required=True)
    p.add_argument("--train-fraction", type=float, default=0.9)
    p.add_argument("--all", action="store_true", help="evaluate on every row, not the test split")

    p = sub.add_parser("report", help="full pipeline, or project/anomaly reports from a metrics table")
    p.add_argument("repos", nargs="*")
    p.add_argument("--metrics", help="build reports from an existing metrics table")
    p.add_argument("--sample-size", type=int, default=150)

    p = sub.add_parser("plot-data", help="actual vs predicted sample for plotting")
    p.add_argument("--metrics", required=True)
    p.add_argument("--sample-size", type=int, default=150)
    p.add_argument("--train-fraction", type=float, default=0.9)
    p.add_argument("--split", choices=("test", "all"), default="all")

    for name, sp in sub.choices.items():
        _common(sp)
    return parser


def _config(args) -> PipelineConfig:
    model = load_model(args.model)
    return PipelineConfig(
        extensions=tuple(e.strip() for e in args.ext.split(",") if e.strip()),
        keywords=KeywordTable.from_file(args.keywords) if args.keywords else KeywordTable(),
        multi_label=args.multi_label,
        model=model,
        log_floor=args.log_floor,
        threshold=args.threshold,
        jobs=max(1, args.jobs),
        seed=args.seed,
        sample_size=getattr(args, "sample_size", 150),
    )


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _load_rows(path: str):
    with open(path, encoding="utf-8", newline="") as fh:
        return read_metrics(fh)


def _summary(n_ok: int, failures) -> int:
    print(f"repositories: {n_ok} succeeded, {len(failures)} failed", file=sys.stderr)
    return 0 if n_ok else 2


def cmd_select(args) -> int:
    criteria = SelectionCriteria(result_cap=args.cap)
    if args.candidates:
        cands = [c for c in load_candidates(args.candidates) if matches(c, criteria)]
        cands = sorted(cands, key=lambda c: c.full_name)[:criteria.result_cap]
    else:
        try:
            cands = search(criteria, args.api_url)
        except (AuthFailure, RateLimited) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    os.makedirs(args.out, exist_ok=True)
    save_candidates(cands, os.path.join(args.out, "candidates.jsonl"))
    print(f"selected {len(cands)} repositories")
    if args.clone:
        report = clone_all(cands, args.clone, args.jobs)
        ok, failed = report.counts
        print(f"cloned: {ok} succeeded ({len(report.skipped)} already present), {failed} failed")
    return 0


def cmd_ingest(args) -> int:
    config = _config(args)
    repos, failures = mine_repositories(args.repos, config)
    _write(os.path.join(args.out, "commits.csv"), commits_csv(repos))
    _write(os.path.join(args.out, "changes.tsv"), changes_dump(repos))
    return _summary(len(repos), failures)


def cmd_classify(args) -> int:
    table = KeywordTable.from_file(args.keywords) if args.keywords else KeywordTable()
    mode = "multi" if args.multi_label else "single"
    messages = list(args.messages)
    if args.commits:
        with open(args.commits, encoding="utf-8", newline="") as fh:
            messages += [rec["message"] for rec in csv.DictReader(fh)]
    if not messages:
        messages = [line.rstrip("\n") for line in sys.stdin]
    for m in messages:
        result = classify(m, table, mode)
        if mode == "multi":
            label = ",".join(c.value for c in CATEGORIES if c in result) or "unclassified"
        else:
            label = result.value
        first = m.splitlines()[0] if m.strip() else ""
        print(f"{label}\t{first}")
    return 0


def cmd_metrics(args) -> int:
    path = os.path.join(args.out, "metrics.csv")
    if args.from_dumps:
        with open(os.path.join(args.from_dumps, "commits.csv"), encoding="utf-8", newline="") as c, \
             open(os.path.join(args.from_dumps, "changes.tsv"), encoding="utf-8") as ch:
            rows = rows_from_dumps(c, ch)
        os.makedirs(args.out, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            write_metrics(rows, fh)
        return 0
    config = _config(args)
    repos, failures = mine_repositories(args.repos, config)
    os.makedirs(args.out, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_metrics([r for repo in repos for r in repo.rows], fh)
    _write(os.path.join(args.out, "commits.csv"), commits_csv(repos))
    _write(os.path.join(args.out, "changes.tsv"), changes_dump(repos))
    return _summary(len(repos), failures)


def _profiles(rows, args):
    model = load_model(args.model)
    floor = model.log_floor if args.log_floor is None else args.log_floor
    return [predict(r, model, floor) for r in rows]


def cmd_predict(args) -> int:
    rows = _load_rows(args.metrics)
    _write(os.path.join(args.out, "profiles.csv"), profiles_csv(rows, _profiles(rows, args)))
    return 0


def cmd_fit(args) -> int:
    rows = _load_rows(args.metrics)
    train, test = split_rows(rows, args.train_fraction, args.seed)
    floor = 0.001 if args.log_floor is None else args.log_floor
    model = fit_model(train, log_floor=floor)
    _write(os.path.join(args.out, "model.json"), model.to_json())
    holdout = evaluate(model, test) if test else {}
    for cat, cm in model.categories.items():
        print(f"{cat.value}\ttrain_r2={cm.r2:.4f}\ttest_r2={holdout.get(cat, math.nan):.4f}\tn={cm.n_obs}")
    return 0


def cmd_evaluate(args) -> int:
    rows = _load_rows(args.metrics)
    model = load_model(args.model)
    if args.log_floor is not None:
        model.log_floor = args.log_floor
    target = rows if args.all else split_rows(rows, args.train_fraction, args.seed)[1]
    if not target:
        print("error: empty holdout", file=sys.stderr)
        return 1
    scores = evaluate(model, target)
    print(json.dumps({c.value: (None if math.isnan(v) else round(v, 6)) for c, v in scores.items()}))
    return 0


def cmd_report(args) -> int:
    config = _config(args)
    if args.metrics:
        rows = _load_rows(args.metrics)
        profiles = _profiles(rows, args)
        projects = project_profiles(rows, profiles)
        anomalies = detect_anomalies(rows, profiles, config.threshold)
        anomalies += detect_project_anomalies(projects, config.threshold)
        _write(os.path.join(args.out, "profiles.csv"), profiles_csv(rows, profiles))
        _write(os.path.join(args.out, "projects.csv"), projects_csv(projects))
        _write(os.path.join(args.out, "anomalies.csv"), anomalies_csv(anomalies))
        return 0
    result = run_pipeline(args.repos, config)
    write_outputs(result, args.out, config)
    return _summary(len(result.repos), result.failures)


def cmd_plot_data(args) -> int:
    rows = _load_rows(args.metrics)
    if args.split == "test":
        rows = split_rows(rows, args.train_fraction, args.seed)[1]
    profiles = _profiles(rows, args)
    n = min(args.sample_size, len(rows))
    _write(os.path.join(args.out, "plot.csv"), emit_plot_data(rows, profiles, n, args.seed))
    return 0


COMMANDS = {
    "select": cmd_select, "ingest": cmd_ingest, "classify": cmd_classify,
    "metrics": cmd_metrics, "predict": cmd_predict, "fit": cmd_fit,
    "evaluate": cmd_evaluate, "report": cmd_report, "plot-data": cmd_plot_data,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        defaults = read_config(known.config)
        sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
        for sp in sub.choices.values():
            valid = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in defaults.items() if k in valid})
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())

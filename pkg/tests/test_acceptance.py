"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line (visible even under
output capture) and then asserts the criterion.
"""

import dataclasses
import datetime as dt
import itertools
import math
import random
import shutil
import time

import numpy as np
import pytest

from maintscope.classify import CATEGORIES, DEFAULT_STEMS, ChangeCategory, classify
from maintscope.cli import main
from maintscope.corpus import RepoCandidate, clone_all, matches, search
from maintscope.distill import ChangeType, distill, distill_units, parse_unit
from maintscope.metrics import (CommitFacts, DeveloperMetricsRow, aggregate, commit_versatility,
                                developer_versatility_measures)
from maintscope.model import (PREDICTORS, builtin_model, evaluate, fit_model, linear_predictor,
                              ols, predict, predictor_vector, split_rows, synthetic_corpus)
from maintscope.pipeline import PipelineConfig, run_pipeline
from maintscope.vcs import RevisionPair

from conftest import JAVA_CORPUS, T0, alpha_commits, beta_commits, gamma_commits
from oracles import analytic_r2, normal_equations
from stub_api import api_item, stub_server

C, P, A = ChangeCategory.CORRECTIVE, ChangeCategory.PERFECTIVE, ChangeCategory.ADAPTIVE
CT = ChangeType


@pytest.fixture
def verdict(capsys):
    def report(number, title, ok, detail=""):
        with capsys.disabled():
            line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}"
            print("\n" + line + (f" ({detail})" if detail else ""))
        assert ok, detail or title
    return report


def test_criterion_1_worked_example(verdict):
    start = time.perf_counter()
    commit_1 = [CT.STATEMENT_INSERT, CT.STATEMENT_INSERT, CT.STATEMENT_UPDATE]
    commit_2 = [CT.STATEMENT_DELETE] * 3
    versatilities = (commit_versatility(commit_1), commit_versatility(commit_2))
    dv, muse, mean, level = developer_versatility_measures([commit_1, commit_2])
    elapsed = time.perf_counter() - start
    ok = (versatilities == (2, 1) and mean == 1.5 and dv == 3 and muse == 2 and level == 2
          and elapsed < 1.0)
    verdict(1, "worked-example exactness", ok,
            f"versatility={versatilities} mean={mean} dv={dv} muse={muse} level={level} t={elapsed:.3f}s")


TABLE = {
    C: (-0.986, 0.019, {"commits": (0.797, 0.010), "muse": (0.171, 0.010), "mtbc": (0.012, 0.002),
                        "contrib_start_rel": (0.014, 0.001), "mean_commit_versatility": (0.028, 0.009),
                        "contrib_duration": (0.030, 0.002), "developer_versatility": (-0.205, 0.010),
                        "versatility_level": (0.181, 0.012)}),
    P: (-3.092, 0.048, {"commits": (0.572, 0.020), "muse": (-0.288, 0.020), "mtbc": (-0.018, 0.004),
                        "contrib_duration": (-0.050, 0.005), "developer_versatility": (0.394, 0.025),
                        "versatility_level": (0.483, 0.025)}),
    A: (-1.462, 0.020, {"commits": (0.503, 0.015), "muse": (-0.135, 0.013),
                        "contrib_start_rel": (-0.021, 0.001), "mean_commit_versatility": (0.033, 0.013),
                        "contrib_duration": (-0.018, 0.002), "developer_versatility": (0.243, 0.013),
                        "versatility_level": (0.437, 0.017)}),
}


def test_criterion_2_builtin_model_fidelity(verdict):
    model = builtin_model()
    problems = []
    for cat, (const, const_se, preds) in TABLE.items():
        cm = model[cat]
        if (cm.constant, cm.constant_std_error) != (const, const_se):
            problems.append(f"{cat.value} constant")
        got = {k: (v.coefficient, v.std_error) for k, v in cm.predictors.items()}
        if got != preds:
            problems.append(f"{cat.value} predictors")
    verdict(2, "built-in model fidelity", not problems, ", ".join(problems))


def test_criterion_3_prediction_arithmetic(verdict):
    unit = dict(commits=1, developer_versatility=1, muse=1, mean_commit_versatility=1.0,
                versatility_level=1, contrib_start_rel=0.9, contrib_duration=0.9, mtbc=1.0)
    row = DeveloperMetricsRow("r", "d", **unit)
    prof = predict(row)
    lps = (prof.corrective.linear_predictor, prof.perfective.linear_predictor,
           prof.adaptive.linear_predictor)
    ten = predict(dataclasses.replace(row, commits=10)).corrective.linear_predictor
    ok = lps == (-0.986, -3.092, -1.462) and abs(ten - 0.849157) <= 1e-6
    verdict(3, "prediction arithmetic", ok, f"unit={lps} commits10={ten:.9f} expected 0.849157±1e-6")


FIXTURE_MESSAGES = [spec["message"] for spec in alpha_commits() + beta_commits() + gamma_commits()] + [
    "Fix issue #42 in parser", "Refactor connection pooling", "Add support for TLS",
    "Bump version number", "fix by adding retry", "prefix table rendering",
]

CLASSIFY_EXAMPLES = [
    ("Fix issue #42 in parser", C), ("Refactor connection pooling", P), ("Add support for TLS", A),
    ("Bump version number", ChangeCategory.UNCLASSIFIED), ("fix by adding retry", C),
    ("prefix table rendering", ChangeCategory.UNCLASSIFIED),
]


def test_criterion_4_classifier_suite(verdict):
    stems_ok = all(classify(stem) is cat for cat in CATEGORIES for stem in DEFAULT_STEMS[cat])
    n_stems = sum(len(DEFAULT_STEMS[c]) for c in CATEGORIES)
    examples_ok = all(classify(m) is want for m, want in CLASSIFY_EXAMPLES)
    rng = random.Random(4)
    mismatches = 0
    for _ in range(1000):
        msg = rng.choice(FIXTURE_MESSAGES)
        mutated = "".join(ch.upper() if rng.random() < 0.5 else ch.lower() for ch in msg)
        mismatches += classify(mutated) is not classify(msg)
    ok = stems_ok and n_stems == 28 and examples_ok and mismatches == 0
    verdict(4, "classifier suite", ok,
            f"stems={n_stems} ok={stems_ok} examples={examples_ok} case_mismatches={mismatches}/1000")


def test_criterion_5_synthetic_recovery(verdict):
    start = time.perf_counter()
    sigma = 0.3
    rows, responses, truth = synthetic_corpus(builtin_model(), n_rows=5000, n_repos=200,
                                              sigma=sigma, seed=0)
    train, test = split_rows(rows, 0.9, seed=0)
    position = {r.key: i for i, r in enumerate(rows)}
    train_idx = [position[r.key] for r in train]
    test_idx = [position[r.key] for r in test]
    fitted = fit_model(train, responses={c: responses[c][train_idx] for c in responses})
    holdout = evaluate(fitted, test, {c: responses[c][test_idx] for c in responses})

    generator = builtin_model()
    misses = []
    r2_notes = []
    r2_ok = True
    for cat in CATEGORIES:
        gen, got = generator[cat], fitted[cat]
        pairs = [("constant", gen.constant, got.constant, got.constant_std_error)]
        pairs += [(n, gen.predictors[n].coefficient, got.predictors[n].coefficient,
                   got.predictors[n].std_error) for n in PREDICTORS if n in gen.predictors]
        for name, want, value, se in pairs:
            if abs(value - want) > 2 * se:
                misses.append(f"{cat.value}.{name} z={(value - want) / se:+.2f}")
        expected = analytic_r2(list(truth[cat][test_idx]), sigma)
        r2_notes.append(f"{cat.value} R2={holdout[cat]:.4f} vs {expected:.4f}")
        r2_ok &= abs(holdout[cat] - expected) <= 0.05
    elapsed = time.perf_counter() - start
    ok = not misses and r2_ok and elapsed < 30
    detail = "; ".join(r2_notes) + f"; outside 2 SE: {', '.join(misses) or 'none'}; t={elapsed:.1f}s"
    verdict(5, "synthetic coefficient and R2 recovery", ok, detail)


def test_criterion_6_ols_oracle(verdict):
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        n, k = int(rng.integers(8, 60)), int(rng.integers(1, 5))
        X = np.column_stack([np.ones(n), rng.normal(size=(n, k)) * rng.uniform(0.5, 5, size=k)])
        y = X @ rng.normal(size=k + 1) + rng.normal(scale=0.3, size=n)
        beta, _, _ = ols(X, y, [f"x{j}" for j in range(k + 1)])
        worst = max(worst, float(np.max(np.abs(beta - np.array(normal_equations(X, y))))))
    x = np.arange(1.0, 11.0)
    _, _, r2 = ols(np.column_stack([np.ones(10), x]), 1 + 2 * x, ["c", "x"])
    ok = worst <= 1e-8 and abs(r2 - 1.0) <= 1e-9
    verdict(6, "OLS matches extended-precision oracle", ok, f"max|diff|={worst:.2e} line R2={r2!r}")


STATEMENT_POOL = ["a();", "b = 1;", "c += 2;", "return;", "x.y(z);", "if (q) { r(); }",
                  "while (k < 3) { k++; }", "int t = 4;", "s = \"v\";", "throw new E();"]


def _method(stmts):
    return "class A { void m() { " + " ".join(stmts) + " } }"


def test_criterion_7_semantic_diff_invariants(verdict):
    sources = [p.read_text() for p in JAVA_CORPUS]
    self_empty = all(
        distill(RevisionPair("c", "F.java", s, s)) == []
        and distill_units(parse_unit(s), parse_unit(s.replace("\n", "\n\n"))) == []
        for s in sources)

    rng = random.Random(7)
    duality_failures = 0
    for _ in range(300):
        base = [rng.choice(STATEMENT_POOL) for _ in range(rng.randrange(0, 8))]
        grown = list(base)
        extra = rng.randrange(1, 5)
        for _ in range(extra):
            grown.insert(rng.randrange(0, len(grown) + 1), rng.choice(STATEMENT_POOL))
        fwd = [c.change_type for c in distill(RevisionPair("c", "F.java", _method(base), _method(grown)))]
        back = [c.change_type for c in distill(RevisionPair("c", "F.java", _method(grown), _method(base)))]
        duality_failures += fwd != [CT.STATEMENT_INSERT] * extra or back != [CT.STATEMENT_DELETE] * extra

    labels = set()
    closed = True
    for a, b in itertools.combinations(sources, 2):
        for ch in distill(RevisionPair("c", "F.java", a, b)) + distill(RevisionPair("c", "F.java", b, a)):
            closed &= isinstance(ch.change_type, ChangeType)
            labels.add(ch.change_type)
    ok = len(sources) >= 20 and self_empty and duality_failures == 0 and closed and len(ChangeType) == 20
    verdict(7, "semantic-diff invariants", ok,
            f"files={len(sources)} self_empty={self_empty} duality_failures={duality_failures}/300 "
            f"labels_seen={len(labels)}")


def test_criterion_8_determinism_across_jobs(verdict, fixture_repos, tmp_path):
    outs = {}
    for jobs in (1, 8):
        out = tmp_path / f"jobs{jobs}"
        code = main(["report", *fixture_repos, "--jobs", str(jobs), "--out", str(out)])
        outs[jobs] = (code, {n: (out / n).read_bytes() for n in ("metrics.csv", "profiles.csv", "plot.csv")})
    same = outs[1][1] == outs[8][1]
    ok = outs[1][0] == outs[8][0] == 0 and same
    verdict(8, "byte-identical outputs for --jobs 1 and --jobs 8", ok,
            f"exit codes {outs[1][0]}/{outs[8][0]} identical={same}")


def test_criterion_9_corpus_selector(verdict, fixture_repos, tmp_path):
    good = RepoCandidate("org/good", 150, 70, dt.date(2014, 6, 1), dt.date(2016, 2, 1), 3072, "Java", "x")
    criteria_ok = (matches(good) and not matches(dataclasses.replace(good, stars=100))
                   and not matches(dataclasses.replace(good, created_at=dt.date(2015, 1, 1))))

    with stub_server([api_item(i) for i in range(1200)]) as srv:
        capped = len(search(api_endpoint=srv.url, auth_token=""))

    sources = tmp_path / "sources"
    cands = []
    for p in fixture_repos:
        dst = sources / p.rsplit("/", 1)[-1]
        shutil.copytree(p, dst)
        cands.append(dataclasses.replace(good, full_name=f"local/{dst.name}", clone_url=f"file://{dst}"))
    first = clone_all(cands, str(tmp_path / "clones"))
    shutil.rmtree(sources)  # a second run that touched the remotes would fail
    second = clone_all(cands, str(tmp_path / "clones"))
    idempotent = first.counts == (3, 0) and second.counts == (3, 0) and len(second.skipped) == 3
    ok = criteria_ok and capped == 1000 and idempotent
    verdict(9, "corpus selector", ok,
            f"criteria={criteria_ok} capped={capped} first={first.counts} second={second.counts} "
            f"skipped={len(second.skipped)}")


def test_criterion_10_versatility_inequalities(verdict, fixture_repos):
    rows = run_pipeline(fixture_repos, PipelineConfig()).rows
    rng = random.Random(10)
    types = list(ChangeType)
    facts = []
    for i in range(10_000):
        dev = f"dev{rng.randrange(400)}"
        facts.append(CommitFacts(f"c{i}", dev, T0 + rng.randrange(10**8),
                                 frozenset(rng.sample(types, rng.randrange(0, 8)))))
    rows += aggregate("synthetic", facts)
    violations = [r.key for r in rows
                  if not (r.developer_versatility >= r.muse and r.versatility_level <= r.commits)]
    verdict(10, "developer_versatility >= muse and versatility_level <= commits", not violations,
            f"rows={len(rows)} violations={len(violations)}")


def test_criterion_5_generator_self_check():
    # the generator's own linear predictors reproduce predict() exactly
    rows, _, truth = synthetic_corpus(n_rows=50, n_repos=5, seed=1)
    model = builtin_model()
    for cat in CATEGORIES:
        for r, lp in zip(rows, truth[cat]):
            assert lp == linear_predictor(predictor_vector(r), model[cat])
            assert math.isclose(predict(r)[cat].linear_predictor, lp)

"""Log-linear maintenance-profile models.

A model predicts, for each maintenance category, the linear predictor

    constant + sum(coefficient_i * predictor_i(row))

over log-transformed developer metrics, and ``exp`` of it as a commit-count
estimate.  :func:`builtin_model` carries the published coefficients;
:func:`fit` refits a category by ordinary least squares.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._diag import warn
from .classify import CATEGORIES, ChangeCategory
from .metrics import DeveloperMetricsRow

LOG_FLOOR = 0.001
OFFSET = 0.1
MODEL_FORMAT_VERSION = 1

# predictor order P1..P8
PREDICTORS = (
    "commits",
    "muse",
    "mtbc",
    "contrib_start_rel",
    "mean_commit_versatility",
    "contrib_duration",
    "developer_versatility",
    "versatility_level",
)
_OFFSET_PREDICTORS = ("contrib_start_rel", "contrib_duration")
PREDICTOR_ALIASES = {f"P{i}": name for i, name in enumerate(PREDICTORS, 1)}


class SingularDesign(ValueError):
    def __init__(self, columns: Sequence[str]):
        super().__init__("design matrix is rank deficient; collinear columns: " + ", ".join(columns))
        self.columns = tuple(columns)


@dataclass(frozen=True)
class Coefficient:
    coefficient: float
    std_error: float | None = None


@dataclass
class CategoryModel:
    constant: float
    predictors: dict[str, Coefficient] = field(default_factory=dict)
    constant_std_error: float | None = None
    r2: float | None = None
    n_obs: int | None = None

    def coefficient(self, name: str) -> float | None:
        c = self.predictors.get(PREDICTOR_ALIASES.get(name, name))
        return None if c is None else c.coefficient


@dataclass
class GlmModel:
    categories: dict[ChangeCategory, CategoryModel]
    log_floor: float = LOG_FLOOR
    log_base: str = "e"
    version: int = MODEL_FORMAT_VERSION

    def __getitem__(self, category) -> CategoryModel:
        return self.categories[ChangeCategory(category)]

    def __getattr__(self, name):
        # model.corrective, model.perfective, model.adaptive
        try:
            return self.__dict__["categories"][ChangeCategory(name)]
        except (KeyError, ValueError):
            raise AttributeError(name) from None

    def to_dict(self) -> dict:
        cats = {}
        for cat in CATEGORIES:
            if cat not in self.categories:
                continue
            m = self.categories[cat]
            cats[cat.value] = {
                "constant": m.constant,
                "constant_std_error": m.constant_std_error,
                "predictors": [
                    {"name": n, "coefficient": m.predictors[n].coefficient,
                     "std_error": m.predictors[n].std_error}
                    for n in PREDICTORS if n in m.predictors
                ],
                "r2": m.r2,
                "n_obs": m.n_obs,
            }
        return {"version": self.version, "log_base": self.log_base,
                "log_floor": self.log_floor, "categories": cats}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping) -> "GlmModel":
        if data.get("log_base", "e") != "e":
            raise ValueError(f"unsupported log_base {data.get('log_base')!r}; only natural logs")
        cats = {}
        for name, spec in data["categories"].items():
            preds = {}
            for p in spec.get("predictors", []):
                pname = PREDICTOR_ALIASES.get(p["name"], p["name"])
                if pname not in PREDICTORS:
                    raise ValueError(f"unknown predictor {p['name']!r}")
                preds[pname] = Coefficient(float(p["coefficient"]), p.get("std_error"))
            cats[ChangeCategory(name)] = CategoryModel(
                float(spec["constant"]), preds, spec.get("constant_std_error"),
                spec.get("r2"), spec.get("n_obs"))
        return cls(cats, float(data.get("log_floor", LOG_FLOOR)), "e",
                   int(data.get("version", MODEL_FORMAT_VERSION)))

    @classmethod
    def from_json(cls, text: str) -> "GlmModel":
        return cls.from_dict(json.loads(text))


def builtin_model() -> GlmModel:
    """The published developer-level model: 27,850 observations per category."""
    def cat(const, const_se, r2, **preds):
        return CategoryModel(const, {k: Coefficient(*v) for k, v in preds.items()},
                             const_se, r2, 27850)

    return GlmModel({
        ChangeCategory.CORRECTIVE: cat(
            -0.986, 0.019, 0.832,
            commits=(0.797, 0.010),
            muse=(0.171, 0.010),
            mtbc=(0.012, 0.002),
            contrib_start_rel=(0.014, 0.001),
            mean_commit_versatility=(0.028, 0.009),
            contrib_duration=(0.030, 0.002),
            developer_versatility=(-0.205, 0.010),
            versatility_level=(0.181, 0.012),
        ),
        ChangeCategory.PERFECTIVE: cat(
            -3.092, 0.048, 0.640,
            commits=(0.572, 0.020),
            muse=(-0.288, 0.020),
            mtbc=(-0.018, 0.004),
            contrib_duration=(-0.050, 0.005),
            developer_versatility=(0.394, 0.025),
            versatility_level=(0.483, 0.025),
        ),
        ChangeCategory.ADAPTIVE: cat(
            -1.462, 0.020, 0.759,
            commits=(0.503, 0.015),
            muse=(-0.135, 0.013),
            contrib_start_rel=(-0.021, 0.001),
            mean_commit_versatility=(0.033, 0.013),
            contrib_duration=(-0.018, 0.002),
            developer_versatility=(0.243, 0.013),
            versatility_level=(0.437, 0.017),
        ),
    })


def load_model(spec: str) -> GlmModel:
    """``"builtin"`` or a path to a model JSON file."""
    if spec in (None, "", "builtin"):
        return builtin_model()
    with open(spec, encoding="utf-8") as fh:
        return GlmModel.from_json(fh.read())


def predictor_vector(row: DeveloperMetricsRow, log_floor: float = LOG_FLOOR) -> dict[str, float]:
    """Natural-log predictors P1..P8 for one developer row."""
    out = {}
    for name in PREDICTORS:
        value = float(getattr(row, name))
        if name in _OFFSET_PREDICTORS:
            out[name] = math.log(value + OFFSET)
        else:
            out[name] = math.log(max(value, log_floor))
    return out


def design_matrix(rows: Sequence[DeveloperMetricsRow], predictors: Sequence[str],
                  log_floor: float = LOG_FLOOR) -> np.ndarray:
    X = np.ones((len(rows), len(predictors) + 1))
    for i, row in enumerate(rows):
        vec = predictor_vector(row, log_floor)
        for j, name in enumerate(predictors, 1):
            X[i, j] = vec[name]
    return X


@dataclass(frozen=True)
class CategoryPrediction:
    linear_predictor: float
    count_estimate: float


@dataclass(frozen=True)
class MaintenanceProfile:
    repo_id: str
    developer_id: str
    predictions: dict

    def __getitem__(self, category) -> CategoryPrediction:
        return self.predictions[ChangeCategory(category)]

    def __getattr__(self, name):
        try:
            return self.__dict__["predictions"][ChangeCategory(name)]
        except (KeyError, ValueError):
            raise AttributeError(name) from None


def linear_predictor(vec: Mapping[str, float], cm: CategoryModel) -> float:
    total = cm.constant
    for name in PREDICTORS:
        if name in cm.predictors:
            total += cm.predictors[name].coefficient * vec[name]
    return total


def predict(row: DeveloperMetricsRow, model: GlmModel | None = None,
            log_floor: float | None = None) -> MaintenanceProfile:
    model = model or builtin_model()
    vec = predictor_vector(row, model.log_floor if log_floor is None else log_floor)
    preds = {}
    for cat in CATEGORIES:
        if cat in model.categories:
            lp = linear_predictor(vec, model.categories[cat])
            preds[cat] = CategoryPrediction(lp, math.exp(lp))
    return MaintenanceProfile(row.repo_id, row.developer_id, preds)


# --------------------------------------------------------------------------
# fitting

def log_response(counts: Iterable[float], log_floor: float = LOG_FLOOR) -> np.ndarray:
    return np.log(np.maximum(np.asarray(list(counts), dtype=float), log_floor))


def _collinear_columns(X: np.ndarray, names: Sequence[str]) -> list[str]:
    bad = []
    kept = []
    for j, name in enumerate(names):
        trial = X[:, kept + [j]]
        if np.linalg.matrix_rank(trial) < len(kept) + 1:
            bad.append(name)
        else:
            kept.append(j)
    return bad


def ols(X: np.ndarray, y: np.ndarray, names: Sequence[str]) -> tuple[np.ndarray, np.ndarray, float]:
    """Least squares via Householder QR.

    Returns ``(beta, standard_errors, r2)``; standard errors use the unbiased
    residual variance ``SSE / (n - p)``.  A constant response gives
    ``R^2 = 0`` with every non-intercept coefficient 0.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if n < p + 1:
        raise ValueError(f"need at least {p + 1} observations for {p} parameters, got {n}")
    if np.linalg.matrix_rank(X) < p:
        raise SingularDesign(_collinear_columns(X, names))
    if np.all(y == y[0]):
        beta = np.zeros(p)
        beta[0] = y[0]
        return beta, np.zeros(p), 0.0
    Q, R = np.linalg.qr(X, mode="reduced")
    beta = np.linalg.solve(R, Q.T @ y)
    resid = y - X @ beta
    sse = float(resid @ resid)
    sst = float(((y - y.mean()) ** 2).sum())
    sigma2 = sse / (n - p)
    r_inv = np.linalg.solve(R, np.eye(p))
    se = np.sqrt(sigma2 * np.einsum("ij,ij->i", r_inv, r_inv))
    return beta, se, 1.0 - sse / sst


def fit(rows: Sequence[DeveloperMetricsRow], responses: Iterable[float],
        predictors: Sequence[str] = PREDICTORS, log_floor: float = LOG_FLOOR) -> CategoryModel:
    """Fit one category on log-transformed predictors.

    ``responses`` are per-row commit counts of the category; they are floored
    at ``log_floor`` and logged.  The returned model carries standard errors
    and the training R^2.
    """
    predictors = [PREDICTOR_ALIASES.get(p, p) for p in predictors]
    unknown = [p for p in predictors if p not in PREDICTORS]
    if unknown:
        raise ValueError(f"unknown predictors: {unknown}")
    if len(rows) < len(predictors) + 2:
        raise ValueError(f"need at least {len(predictors) + 2} rows for {len(predictors)} predictors")
    X = design_matrix(rows, predictors, log_floor)
    y = log_response(responses, log_floor)
    if len(y) != len(rows):
        raise ValueError("one response per row is required")
    beta, se, r2 = ols(X, y, ["constant", *predictors])
    return CategoryModel(
        constant=float(beta[0]),
        predictors={p: Coefficient(float(b), float(s)) for p, b, s in zip(predictors, beta[1:], se[1:])},
        constant_std_error=float(se[0]),
        r2=r2,
        n_obs=len(rows),
    )


def fit_model(rows: Sequence[DeveloperMetricsRow], selection: Mapping | None = None,
              responses: Mapping | None = None, log_floor: float = LOG_FLOOR) -> GlmModel:
    """Fit all three categories; responses default to the rows' actual counts.

    ``selection`` maps category to predictor names (default: the built-in
    model's predictor sets).
    """
    if selection is None:
        base = builtin_model()
        selection = {c: [p for p in PREDICTORS if p in base.categories[c].predictors]
                     for c in CATEGORIES}
    cats = {}
    for cat in CATEGORIES:
        cat_key = ChangeCategory(cat)
        chosen = selection.get(cat_key, selection.get(cat_key.value))
        if chosen is None:
            continue
        ys = responses[cat_key] if responses is not None else [r.actual(cat_key) for r in rows]
        cats[cat_key] = fit(rows, ys, chosen, log_floor)
    return GlmModel(cats, log_floor)


def r_squared(y: np.ndarray, fitted: np.ndarray) -> float:
    y = np.asarray(y, dtype=float)
    sst = float(((y - y.mean()) ** 2).sum())
    if sst == 0.0:
        return float("nan")
    resid = y - np.asarray(fitted, dtype=float)
    return 1.0 - float(resid @ resid) / sst


def evaluate(model: GlmModel, rows: Sequence[DeveloperMetricsRow],
             responses: Mapping | None = None) -> dict[ChangeCategory, float]:
    """Holdout R^2 per category on log-scale responses (NaN for a constant holdout)."""
    if not rows:
        raise ValueError("holdout must be non-empty")
    out = {}
    for cat, cm in model.categories.items():
        counts = responses[cat] if responses is not None else [r.actual(cat) for r in rows]
        y = log_response(counts, model.log_floor)
        fitted = [linear_predictor(predictor_vector(r, model.log_floor), cm) for r in rows]
        r2 = r_squared(y, fitted)
        if math.isnan(r2):
            warn("-", "-", f"holdout {cat.value} response has zero variance; R^2 undefined")
        out[cat] = r2
    return out


# --------------------------------------------------------------------------
# train/test split by repository

def split(repos: Iterable[str], train_fraction: float = 0.9,
          seed: int = 0) -> tuple[list[str], list[str]]:
    """Shuffle distinct repository ids with ``seed``; the first floor(n*f) train."""
    ids = sorted(set(repos))
    if len(ids) < 2:
        raise ValueError("splitting needs at least two repositories")
    if not 0.0 < train_fraction <= 1.0:
        raise ValueError("train_fraction must be in (0, 1]")
    n_train = math.floor(len(ids) * train_fraction + 1e-9)
    random.Random(seed).shuffle(ids)
    return sorted(ids[:n_train]), sorted(ids[n_train:])


def split_rows(rows: Sequence[DeveloperMetricsRow], train_fraction: float = 0.9,
               seed: int = 0) -> tuple[list[DeveloperMetricsRow], list[DeveloperMetricsRow]]:
    train_ids, _ = split([r.repo_id for r in rows], train_fraction, seed)
    train_ids = set(train_ids)
    train = [r for r in rows if r.repo_id in train_ids]
    test = [r for r in rows if r.repo_id not in train_ids]
    return train, test


# --------------------------------------------------------------------------
# synthetic corpora

def synthetic_rows(n_rows: int, n_repos: int, seed: int = 0) -> list[DeveloperMetricsRow]:
    """Plausible developer rows satisfying the metric invariants."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n_rows):
        commits = max(1, int(round(math.exp(rng.normal(2.0, 1.2)))))
        muse = int(rng.integers(1, 15))
        dev_v = min(20, muse + int(rng.integers(0, 7)))
        mean_v = muse * float(rng.uniform(0.2, 1.0))
        level = max(1, min(commits, int(round(commits * float(rng.uniform(0.1, 1.0))))))
        start = float(rng.exponential(300.0))
        duration = 0.0 if commits == 1 else float(rng.exponential(400.0))
        mtbc = duration / (commits - 1) if commits > 1 else 0.0
        rows.append(DeveloperMetricsRow(
            repo_id=f"repo{i % n_repos:04d}", developer_id=f"dev{i:05d}@example.org",
            commits=commits, developer_versatility=dev_v, muse=muse,
            mean_commit_versatility=mean_v, versatility_level=level,
            contrib_start_rel=start, contrib_duration=duration, mtbc=mtbc))
    return rows


def synthetic_corpus(model: GlmModel | None = None, n_rows: int = 5000, n_repos: int = 200,
                     sigma: float = 0.3, seed: int = 0):
    """Rows plus per-category count responses ``exp(linear predictor + N(0, sigma))``.

    Returns ``(rows, responses, true_linear_predictors)``; the latter two map
    category to arrays aligned with ``rows``.
    """
    model = model or builtin_model()
    rows = synthetic_rows(n_rows, n_repos, seed)
    rng = np.random.default_rng([seed, 1])
    truth, responses = {}, {}
    for cat, cm in model.categories.items():
        lp = np.array([linear_predictor(predictor_vector(r, model.log_floor), cm) for r in rows])
        truth[cat] = lp
        responses[cat] = np.exp(lp + rng.normal(0.0, sigma, size=len(rows)))
    return rows, responses, truth

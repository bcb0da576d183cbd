"""Developer-level repository metrics and maintenance-activity profile models."""

__version__ = "0.1.0"

from .classify import ChangeCategory, KeywordTable, classify
from .corpus import RepoCandidate, SelectionCriteria, clone_all, matches, search
from .distill import ChangeType, SemanticChange, distill, match_entities
from .metrics import (DeveloperMetricsRow, aggregate, commit_versatility,
                      developer_versatility_measures, temporal_measures)
from .model import (GlmModel, builtin_model, evaluate, fit, fit_model, predict, split, split_rows,
                    synthetic_corpus)
from .pipeline import (PipelineConfig, aggregate_project, detect_anomalies, emit_plot_data,
                       run_pipeline)
from .vcs import RevisionPair, enumerate_commits, resolve_identity, revision_pairs

__all__ = [
    "ChangeCategory", "KeywordTable", "classify",
    "RepoCandidate", "SelectionCriteria", "clone_all", "matches", "search",
    "ChangeType", "SemanticChange", "distill", "match_entities",
    "DeveloperMetricsRow", "aggregate", "commit_versatility",
    "developer_versatility_measures", "temporal_measures",
    "GlmModel", "builtin_model", "evaluate", "fit", "fit_model", "predict", "split",
    "split_rows", "synthetic_corpus",
    "PipelineConfig", "aggregate_project", "detect_anomalies", "emit_plot_data", "run_pipeline",
    "RevisionPair", "enumerate_commits", "resolve_identity", "revision_pairs",
]

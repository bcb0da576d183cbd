"""
Predicting maintenance profiles
===============================

The built-in log-linear model turns a developer's metrics into expected
commit counts for each maintenance category.
"""

import dataclasses

import numpy as np

from maintscope import DeveloperMetricsRow, builtin_model, predict

model = builtin_model()
for cat, cm in model.categories.items():
    terms = ", ".join(f"{n}={c.coefficient:+.3f}" for n, c in cm.predictors.items())
    print(f"{cat.value}: const={cm.constant:+.3f} {terms}")

dev = DeveloperMetricsRow("demo", "dev@example.org", commits=40, developer_versatility=12, muse=6,
                          mean_commit_versatility=2.5, versatility_level=25,
                          contrib_start_rel=120.0, contrib_duration=300.0, mtbc=7.5)
profile = predict(dev, model)
for cat, p in profile.predictions.items():
    print(f"{cat.value:<11} linear predictor {p.linear_predictor:+.3f}  expected commits {p.count_estimate:.2f}")

# expected corrective commits grow sub-linearly with total commits
commits = np.array([1, 10, 100, 1000])
fix = [predict(dataclasses.replace(dev, commits=int(n))).corrective.count_estimate for n in commits]
print(np.round(fix, 2))

"""
Refitting the model on synthetic data
=====================================

Generate developer rows, draw counts from the built-in model with log-scale
noise, refit on 90% of the repositories and score the rest.
"""

import numpy as np

from maintscope import builtin_model, evaluate, fit_model, split_rows, synthetic_corpus

sigma = 0.3
rows, responses, truth = synthetic_corpus(builtin_model(), n_rows=5000, n_repos=200, sigma=sigma, seed=0)
train, test = split_rows(rows, 0.9, seed=0)
position = {r.key: i for i, r in enumerate(rows)}
tr = [position[r.key] for r in train]
te = [position[r.key] for r in test]

fitted = fit_model(train, responses={c: v[tr] for c, v in responses.items()})
holdout = evaluate(fitted, test, {c: v[te] for c, v in responses.items()})

generator = builtin_model()
for cat, cm in fitted.categories.items():
    print(f"\n{cat.value}  train R2 {cm.r2:.3f}  holdout R2 {holdout[cat]:.3f}")
    lp = truth[cat][te]
    print(f"  R2 expected from the noise level: {lp.var() / (lp.var() + sigma ** 2):.3f}")
    for name, coef in cm.predictors.items():
        want = generator[cat].predictors[name].coefficient
        z = (coef.coefficient - want) / coef.std_error
        print(f"  {name:<24} {coef.coefficient:+.4f} ± {coef.std_error:.4f}  (true {want:+.3f}, z {z:+.2f})")

# With 21 slopes, one or two landing beyond two standard errors is
# ordinary sampling variation (about 1 in 20 each).
z = [(c.coefficient - generator[cat].predictors[n].coefficient) / c.std_error
     for cat, cm in fitted.categories.items() for n, c in cm.predictors.items()]
print("beyond 2 SE:", int(np.sum(np.abs(z) > 2)), "of", len(z))

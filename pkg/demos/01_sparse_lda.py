"""Sparse linear discriminant problem: ensemble versus the signal oracle.

Run with ``python demos/01_sparse_lda.py``. Takes well under a minute.
"""

# %% [markdown]
# Model 1 has 400 features but only features 1, 2 and 5 carry the class
# difference. Each weak learner is an LDA fit on a random subspace picked from
# ``B2`` candidates by the ratio information criterion, so most learners end
# up on a subset of the signal features.

# %%
import numpy as np

from rase import EnsembleConfig, fit, misclassification_rate
from rase.simulation import SimModelSpec, generate, learner_error, signal_oracle

spec = SimModelSpec("1", n=200, n_test=2000, seed=1)
train, test, s_star = generate(spec)
print(f"train {train.X.shape}, test {test.X.shape}, signal features {s_star.one_based()}")

# %% [markdown]
# A single fit with two re-weighting rounds. ``keep_history`` keeps the model
# after every round, and round ``t`` is exactly what a ``T = t`` fit returns.

# %%
cfg = EnsembleConfig(base="lda", T=2, seed=0)
model = fit(train, cfg, keep_history=True)
for t, m in enumerate(model.history):
    err = misclassification_rate(m, test)
    print(f"T={t}: test error {100 * err:5.2f}%  alpha_hat={m.alpha_hat:.3f}")

oracle = signal_oracle(spec, train)
print(f"LDA on the true signal set: {100 * learner_error(oracle, test):5.2f}%")

# %% [markdown]
# The selection frequency of each feature across the ``B1`` learners gives a
# ranking. After re-weighting, the signal features dominate.

# %%
for t, m in enumerate(model.history):
    top = m.feature_ranking()[:5]
    shown = ", ".join(f"{j + 1} ({eta:.2f})" for j, eta in top)
    print(f"T={t} top features: {shown}")

noise = np.delete(model.eta, s_star.array)
print(f"mean selection frequency of the 397 noise features: {noise.mean():.4f}")

"""Nonparametric base learner: kNN with leave-one-out subspace selection.

Run with ``python demos/03_knn_clusters.py``. Uses a reduced ``B2`` and a
smaller sample so that it finishes in about a minute on one core; set
``RASE_THREADS`` to use more.
"""

# %% [markdown]
# Model 4 places ten Gaussian clusters on the first five features (five
# clusters per class) and pads them with 195 noise features. No parametric
# criterion fits this, so each candidate subspace is scored by the
# leave-one-out error of kNN with ``k`` chosen from {3, 5, 7, 9, 11}.

# %%
import time

from rase import EnsembleConfig, fit, misclassification_rate
from rase.ensemble import default_threads
from rase.simulation import SimModelSpec, generate, learner_error, signal_oracle

spec = SimModelSpec("4", n=300, n_test=1000, seed=2)
train, test, s_star = generate(spec)

cfg = EnsembleConfig(base="knn", B1=100, B2=100, T=2, seed=0, threads=default_threads())
print(f"criterion: {cfg.criterion.kind}, D = {cfg.resolve_D(train)}")
t0 = time.perf_counter()
model = fit(train, cfg, keep_history=True)
print(f"fit in {time.perf_counter() - t0:.1f}s")

# %%
for t, m in enumerate(model.history):
    ks = sorted({lr.k for lr in m.learners})
    print(f"T={t}: test error {100 * misclassification_rate(m, test):5.2f}%, "
          f"k values used {ks}")
print(f"kNN on the five signal features: {100 * learner_error(signal_oracle(spec, train), test):5.2f}%")

# %%
top = model.feature_ranking()[:8]
print("top features:", ", ".join(f"{j + 1} ({eta:.2f})" for j, eta in top))

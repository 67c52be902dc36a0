"""Criteria that score a candidate feature subspace (smaller is better).

Two routes compute the same numbers:

* the per-subspace functions (:func:`ric_lda`, :func:`ric_qda`, ...) work on
  an already restricted dataset and are the reference definitions;
* :class:`SubspaceScorer` precomputes full-dimensional moments once and scores
  thousands of candidates with batched LAPACK calls. The ensemble uses it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _knn
from .classifiers import BaseKind, fit, gamma_mle_columns, _gamma_newton, select_k
from .dataset import LabeledDataset, Subspace, class_split, restrict
from .errors import FitFailure, KTooLarge, SingularMatrix
from .numerics import (batched_cholesky, class_covariance_mle, class_means, digamma,
                       kth_nn_distance_between, kth_nn_distance_within, log_gamma,
                       pooled_covariance_mle, spd_inverse_logdet)

CRITERIA = ("ric", "ric-np", "train-err", "loo")
NN_DISTANCE_FLOOR = 1e-12
# above this many features the p x p moment matrices are not materialized
DENSE_MOMENT_LIMIT = 3000


@dataclass(frozen=True)
class CriterionConfig:
    """Criterion choice plus its tuning constants.

    ``c_n=None`` means ``log(n)/n``; ``k0``/``k1`` default to ``floor(sqrt(n_r))``
    for the nearest-neighbour KL estimate.
    """

    kind: str = "ric"
    c_n: float | None = None
    k0: int | None = None
    k1: int | None = None

    def __post_init__(self):
        if self.kind not in CRITERIA:
            raise ValueError(f"unknown criterion {self.kind!r}; expected one of {CRITERIA}")
        if self.c_n is not None and not self.c_n >= 0:
            raise ValueError(f"c_n must be non-negative, got {self.c_n}")
        for name in ("k0", "k1"):
            k = getattr(self, name)
            if k is not None and k < 1:
                raise ValueError(f"{name} must be >= 1, got {k}")

    def penalty_scale(self, n):
        return default_cn(n) if self.c_n is None else self.c_n

    def neighbour_orders(self, split):
        k0 = self.k0 if self.k0 is not None else max(1, math.isqrt(split.n0))
        k1 = self.k1 if self.k1 is not None else max(1, math.isqrt(split.n1))
        return k0, k1


def default_cn(n):
    return math.log(n) / n


def default_criterion(base_name):
    return "loo" if base_name == "knn" else "ric"


# -- RIC closed forms ---------------------------------------------------------

def ric_lda(restricted, split, c_n):
    """``-(mu1-mu0)' Sigma^-1 (mu1-mu0) + c_n (|S|+1)`` with pooled MLE Sigma."""
    d = restricted.p
    means = class_means(restricted, split)
    cov = pooled_covariance_mle(restricted, split, means)
    try:
        inv = spd_inverse_logdet(cov).inverse
    except SingularMatrix:
        return math.inf
    delta = means[1] - means[0]
    return float(-delta @ inv @ delta + c_n * (d + 1))


def ric_qda(restricted, split, c_n):
    d = restricted.p
    if split.n0 < 2 or split.n1 < 2:
        return math.inf
    means = class_means(restricted, split)
    covs = [class_covariance_mle(restricted, split, means, r) for r in (0, 1)]
    try:
        f0, f1 = spd_inverse_logdet(covs[0]), spd_inverse_logdet(covs[1])
    except SingularMatrix:
        return math.inf
    pi0, pi1 = split.pi0_hat, split.pi1_hat
    delta = means[1] - means[0]
    quad = delta @ (pi1 * f0.inverse + pi0 * f1.inverse) @ delta
    trace = np.trace((f1.inverse - f0.inverse) @ (pi1 * covs[1] - pi0 * covs[0]))
    logdet = (pi1 - pi0) * (f1.log_det - f0.log_det)
    return float(-quad + trace + logdet + c_n * (d * (d + 3) / 2 + 1))


def gamma_kl(a, b, a2, b2):
    """Closed-form KL(Gamma(a, scale=b) || Gamma(a2, scale=b2)), elementwise."""
    a, b, a2, b2 = (np.asarray(v, dtype=np.float64) for v in (a, b, a2, b2))
    return ((a - a2) * digamma(a) - log_gamma(a) + log_gamma(a2)
            + a2 * np.log(b2 / b) + a * (b - b2) / b2)


def _gamma_pair_divergence(split, a0, b0, a1, b1):
    return (split.pi0_hat * gamma_kl(a0, b0, a1, b1)
            + split.pi1_hat * gamma_kl(a1, b1, a0, b0))


def ric_gamma(restricted, split, c_n):
    """RIC of the independent-Gamma model; ``deg(S) = 2|S| + 1``."""
    X = restricted.X
    try:
        a0, b0 = gamma_mle_columns(X[split.indices0])
        a1, b1 = gamma_mle_columns(X[split.indices1])
    except FitFailure:
        return math.inf
    div = _gamma_pair_divergence(split, a0, b0, a1, b1).sum()
    return float(-2.0 * div + c_n * (2 * restricted.p + 1))


# -- nearest-neighbour KL estimate -----------------------------------------------

def nonparametric_kl(sample_p, sample_q, k_p, k_q):
    """k-NN estimate of KL(f_p || f_q) from two samples.

    Uses the ``k_p``-th neighbour inside ``sample_p`` (self excluded) and the
    ``k_q``-th neighbour in ``sample_q``; the log ratio is cross over within,
    so well separated samples give a large positive value.
    """
    P = np.asarray(sample_p, dtype=np.float64)
    Q = np.asarray(sample_q, dtype=np.float64)
    if P.ndim == 1:
        P, Q = P[:, None], Q[:, None]
    n_p, d = P.shape
    n_q = Q.shape[0]
    if not 1 <= k_p <= n_p - 1:
        raise KTooLarge(f"k={k_p} needs 1 <= k <= {n_p - 1}")
    if not 1 <= k_q <= n_q:
        raise KTooLarge(f"k={k_q} needs 1 <= k <= {n_q}")
    within = np.maximum(kth_nn_distance_within(P, k_p), NN_DISTANCE_FLOOR)
    cross = np.maximum(kth_nn_distance_between(P, Q, k_q), NN_DISTANCE_FLOOR)
    return float(d / n_p * np.log(cross / within).sum()
                 + math.log(n_q / (n_p - 1)) + digamma(k_p) - digamma(k_q))


def ric_nonparametric(restricted, split, c_n, k0, k1, deg=None):
    """RIC with both KL terms replaced by their nearest-neighbour estimates."""
    X = restricted.X
    X0, X1 = X[split.indices0], X[split.indices1]
    kl01 = nonparametric_kl(X0, X1, k0, k1)
    kl10 = nonparametric_kl(X1, X0, k1, k0)
    if deg is None:
        deg = restricted.p + 1
    return float(-2.0 * (split.pi0_hat * kl01 + split.pi1_hat * kl10) + c_n * deg)


# -- error-based criteria -------------------------------------------------------------

def training_error(restricted, split, kind):
    """In-sample misclassification rate of the base classifier."""
    try:
        learner = fit(kind, restricted, split)
    except FitFailure:
        return math.inf
    return float((learner.predict(restricted.X) != restricted.y).mean())


def loo_cv_error(restricted, split, kind):
    """Leave-one-out error; kNN uses the neighbour-exclusion shortcut and the
    best ``k`` of its grid, other bases refit once per held-out row."""
    if isinstance(kind, str):
        kind = BaseKind(kind)
    if kind.name == "knn":
        try:
            return select_k(restricted.X, restricted.y, kind.k_grid)[1]
        except FitFailure:
            return math.inf
    X, y = restricted.X, restricted.y
    n = restricted.n
    wrong = 0
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        keep[i] = False
        try:
            learner = fit(kind, LabeledDataset(X[keep], y[keep]))
        except FitFailure:
            return math.inf
        finally:
            keep[i] = True
        wrong += int(learner.predict(X[i])[0] != y[i])
    return wrong / n


def criterion_value(restricted, split, base: BaseKind, config: CriterionConfig):
    """Score of one restricted dataset under ``config`` for base ``base``."""
    c_n = config.penalty_scale(split.n)
    if config.kind == "ric":
        if base.name == "lda":
            return ric_lda(restricted, split, c_n)
        if base.name == "qda":
            return ric_qda(restricted, split, c_n)
        if base.name == "gamma":
            return ric_gamma(restricted, split, c_n)
        raise ValueError("the parametric RIC needs an lda, qda or gamma base")
    if config.kind == "ric-np":
        k0, k1 = config.neighbour_orders(split)
        return ric_nonparametric(restricted, split, c_n, k0, k1)
    if config.kind == "train-err":
        return training_error(restricted, split, base)
    return loo_cv_error(restricted, split, base)


# -- selection ----------------------------------------------------------------------

def argmin_subspace(candidates, scores):
    """Index of the minimizing candidate.

    Ties (including the all-infinite case) go to the smaller subspace, then to
    the lexicographically smaller index tuple.
    """
    scores = np.asarray(scores, dtype=np.float64)
    best = scores.min()
    tied = np.flatnonzero(scores == best) if np.isfinite(best) else np.arange(len(scores))
    if tied.size == 1:
        return int(tied[0])
    keyed = [(len(candidates[i]), tuple(candidates[i]), i) for i in tied]
    return min(keyed)[2]


def select_optimal(candidates, dataset, base, config, split=None):
    """Return ``(winner, score)`` among candidate subspaces."""
    if not candidates:
        raise ValueError("select_optimal needs at least one candidate")
    if isinstance(base, str):
        base = BaseKind(base)
    if split is None:
        split = class_split(dataset)
    subs = [c if isinstance(c, Subspace) else Subspace(tuple(c)) for c in candidates]
    scores = [criterion_value(restrict(dataset, s), split, base, config) for s in subs]
    i = argmin_subspace([s.indices for s in subs], scores)
    return subs[i], scores[i]


class SubspaceScorer:
    """Batched criterion evaluation over many candidate subspaces of one dataset."""

    def __init__(self, dataset: LabeledDataset, base: BaseKind, config: CriterionConfig,
                 split=None):
        self.dataset = dataset
        self.base = base
        self.config = config
        self.split = split if split is not None else class_split(dataset)
        self.c_n = config.penalty_scale(self.split.n)
        self._cache = {}
        if config.kind == "ric" and base.name not in ("lda", "qda", "gamma"):
            raise ValueError("the parametric RIC needs an lda, qda or gamma base")
        self._dense = dataset.p <= DENSE_MOMENT_LIMIT
        if config.kind == "ric" and base.name in ("lda", "qda") and self._dense:
            full = dataset
            means = class_means(full, self.split)
            self._delta = means[1] - means[0]
            if base.name == "lda":
                self._cov = pooled_covariance_mle(full, self.split, means)
            else:
                self._cov0 = class_covariance_mle(full, self.split, means, 0)
                self._cov1 = class_covariance_mle(full, self.split, means, 1)
        if config.kind == "ric" and base.name == "gamma":
            self._gamma_terms = self._per_feature_gamma()
        if base.name == "knn":
            y = dataset.y
            self._tie = int(y.sum()) * 2 > y.shape[0]

    def _per_feature_gamma(self):
        X, s = self.dataset.X, self.split
        out = np.full(self.dataset.p, -np.inf)
        fits = []
        for idx in (s.indices0, s.indices1):
            V = X[idx]
            usable = (V > 0).all(axis=0) & (V.var(axis=0) > 0) & (V.shape[0] >= 2)
            a = np.ones(V.shape[1])
            b = np.ones(V.shape[1])
            if usable.any():
                Vu = V[:, usable]
                au, bu, ok = _gamma_newton(Vu.mean(axis=0), np.log(Vu).mean(axis=0),
                                           Vu.var(axis=0))
                a[usable], b[usable] = au, bu
                usable[np.flatnonzero(usable)[~ok]] = False
            fits.append((a, b, usable))
        (a0, b0, u0), (a1, b1, u1) = fits
        good = u0 & u1
        out[good] = _gamma_pair_divergence(s, a0[good], b0[good], a1[good], b1[good])
        # a feature whose fit fails makes every subspace containing it +inf
        return out

    def score_one(self, subspace):
        key = tuple(subspace)
        if key in self._cache:
            return self._cache[key]
        val = criterion_value(restrict(self.dataset, Subspace(key)), self.split,
                              self.base, self.config)
        self._cache[key] = val
        return val

    def score(self, idx, sizes):
        """Scores for candidates given as rows of a padded index matrix.

        Row ``i`` is the subspace ``idx[i, :sizes[i]]`` (any order).
        """
        idx = np.asarray(idx)
        sizes = np.asarray(sizes)
        out = np.empty(idx.shape[0])
        for d in np.unique(sizes):
            rows = np.flatnonzero(sizes == d)
            out[rows] = self._score_group(np.sort(idx[rows, :d], axis=1), int(d))
        return out

    def _score_group(self, ix, d):
        kind, base = self.config.kind, self.base.name
        if kind == "ric" and base == "lda" and self._dense:
            return self._ric_lda_batch(ix, d)
        if kind == "ric" and base == "qda" and self._dense:
            return self._ric_qda_batch(ix, d)
        if kind == "ric" and base == "gamma":
            return -2.0 * self._gamma_terms[ix].sum(axis=1) + self.c_n * (2 * d + 1)
        if kind == "loo" and base == "knn":
            return np.array([self._knn_loo(row) for row in ix])
        return np.array([self.score_one(row) for row in ix])

    def _ric_lda_batch(self, ix, d):
        S = self._cov[ix[:, :, None], ix[:, None, :]]
        L, ok = batched_cholesky(S)
        z = np.linalg.solve(L, self._delta[ix][..., None])[..., 0]
        out = -np.einsum("ij,ij->i", z, z) + self.c_n * (d + 1)
        out[~ok] = np.inf
        return out

    def _ric_qda_batch(self, ix, d):
        s = self.split
        if s.n0 < 2 or s.n1 < 2:
            return np.full(ix.shape[0], np.inf)
        pi0, pi1 = s.pi0_hat, s.pi1_hat
        S0 = self._cov0[ix[:, :, None], ix[:, None, :]]
        S1 = self._cov1[ix[:, :, None], ix[:, None, :]]
        L0, ok0 = batched_cholesky(S0)
        L1, ok1 = batched_cholesky(S1)
        eye = np.broadcast_to(np.eye(d), S0.shape)
        M0 = np.linalg.solve(L0, eye)
        M1 = np.linalg.solve(L1, eye)
        inv0 = np.einsum("mki,mkj->mij", M0, M0)
        inv1 = np.einsum("mki,mkj->mij", M1, M1)
        ld0 = 2.0 * np.log(np.diagonal(L0, axis1=1, axis2=2)).sum(axis=1)
        ld1 = 2.0 * np.log(np.diagonal(L1, axis1=1, axis2=2)).sum(axis=1)
        delta = self._delta[ix]
        quad = np.einsum("mi,mij,mj->m", delta, pi1 * inv0 + pi0 * inv1, delta)
        trace = np.einsum("mij,mji->m", inv1 - inv0, pi1 * S1 - pi0 * S0)
        out = -quad + trace + (pi1 - pi0) * (ld1 - ld0) + self.c_n * (d * (d + 3) / 2 + 1)
        out[~(ok0 & ok1)] = np.inf
        return out

    @property
    def prunable(self):
        return self.config.kind == "loo" and self.base.name == "knn"

    def score_for_selection(self, idx, sizes):
        """Scores for one learner's candidates when only the minimizer matters.

        For the kNN leave-one-out criterion a candidate is abandoned once its
        partial error count already exceeds the best complete count seen so
        far; it is reported as ``+inf``. The minimizer and its score are the
        same as with :meth:`score`.
        """
        if not self.prunable:
            return self.score(idx, sizes)
        idx = np.asarray(idx)
        out = np.empty(idx.shape[0])
        best = math.inf
        for i in range(idx.shape[0]):
            out[i] = self._knn_loo(np.sort(idx[i, :sizes[i]]), best)
            best = min(best, out[i])
        return out

    def _knn_loo(self, row, best=math.inf):
        key = tuple(int(i) for i in row)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        X = self.dataset.X[:, row]
        n = X.shape[0]
        grid = sorted(k for k in self.base.k_grid if k <= n - 1)
        if not grid:
            val = math.inf
        else:
            bound = None if math.isinf(best) else int(round(best * n))
            wrong = _knn.loo_error_counts(X, self.dataset.y, grid, self._tie, bound)
            if wrong is None:
                return math.inf
            val = float(wrong.min() / n)
        self._cache[key] = val
        return val

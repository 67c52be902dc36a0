"""Random subspace ensemble: fitting, vote threshold, prediction and
feature ranking, with optional iterative re-weighting of the subspace law."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import classifiers
from .classifiers import BaseKind
from .criteria import CriterionConfig, SubspaceScorer, argmin_subspace, default_criterion
from .dataset import LabeledDataset, Subspace, class_split
from .errors import DimensionMismatch, FitFailure
from .sampling import draw_candidates, substream, update_weights

log = logging.getLogger(__name__)

# learners per scoring batch; fixed so results do not depend on thread count
_CHUNK = 8


def default_threads():
    try:
        return max(1, int(os.environ.get("RASE_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class EnsembleConfig:
    B1: int = 200
    B2: int = 500
    D: int | None = None
    base: BaseKind = field(default_factory=lambda: BaseKind("lda"))
    criterion: CriterionConfig | None = None
    T: int = 0
    C0: float = 0.1
    seed: int = 0
    threads: int = field(default_factory=default_threads)

    def __post_init__(self):
        if isinstance(self.base, str):
            object.__setattr__(self, "base", BaseKind(self.base))
        if self.criterion is None:
            object.__setattr__(self, "criterion",
                               CriterionConfig(default_criterion(self.base.name)))
        elif isinstance(self.criterion, str):
            object.__setattr__(self, "criterion", CriterionConfig(self.criterion))
        if self.B1 < 1 or self.B2 < 1:
            raise ValueError("B1 and B2 must be positive")
        if self.T < 0:
            raise ValueError("T must be non-negative")
        if not self.C0 > 0:
            raise ValueError("C0 must be positive")
        if self.D is not None and self.D < 1:
            raise ValueError("D must be positive")
        if self.threads < 1:
            raise ValueError("threads must be positive")

    def resolve_D(self, dataset, split=None):
        """Explicit ``D`` capped at ``p``, else ``min(p, floor(sqrt(n)))``
        (``min(p, floor(sqrt(n0)), floor(sqrt(n1)))`` for QDA)."""
        p = dataset.p
        if self.D is not None:
            return min(self.D, p)
        if self.base.name == "qda":
            split = split if split is not None else class_split(dataset)
            return max(1, min(p, math.isqrt(split.n0), math.isqrt(split.n1)))
        return max(1, min(p, math.isqrt(dataset.n)))


@dataclass(eq=False)
class RaseModel:
    learners: list
    alpha_hat: float
    eta: np.ndarray
    config: EnsembleConfig
    p: int
    training: LabeledDataset | None = field(default=None, repr=False)
    history: list = field(default_factory=list, repr=False)

    @property
    def subspaces(self):
        return [lr.subspace for lr in self.learners]

    def votes(self, X):
        """``(B1, m)`` matrix of 0/1 weak-learner predictions."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.p:
            raise DimensionMismatch(f"expected {self.p} features, got {X.shape[1]}")
        return np.stack([lr.predict(X[:, lr.subspace.array]) for lr in self.learners])

    def predict_score(self, X):
        return self.votes(X).mean(axis=0)

    def predict(self, X):
        return (self.predict_score(X) > self.alpha_hat).astype(np.int64)

    def feature_ranking(self):
        return feature_ranking(self)

    def misclassification_rate(self, test):
        return misclassification_rate(self, test)


def predict_score(model, x):
    """Fraction of weak learners voting class 1 (a float for one row)."""
    nu = model.predict_score(x)
    return float(nu[0]) if np.ndim(x) == 1 else nu


def predict(model, x):
    out = model.predict(x)
    return int(out[0]) if np.ndim(x) == 1 else out


def misclassification_rate(model, test: LabeledDataset):
    return float((model.predict(test.X) != test.y).mean())


def feature_ranking(model):
    """``(feature, eta)`` pairs by decreasing frequency, ties by index."""
    eta = np.asarray(model.eta)
    order = np.argsort(-eta, kind="stable")
    return [(int(i), float(eta[i])) for i in order]


def _closest_to_half(a, b):
    da, db = round(abs(a - 0.5), 12), round(abs(b - 0.5), 12)
    return (da, a) < (db, b)


def select_threshold(nu, labels):
    """Vote threshold minimizing the empirical training error.

    Candidates are the midpoints between consecutive distinct vote levels
    together with 0, 0.5 and 1; ties prefer the candidate closest to 0.5,
    then the smaller one.
    """
    nu = np.asarray(nu, dtype=np.float64)
    y = np.asarray(labels)
    n = nu.shape[0]
    if n == 0:
        raise ValueError("select_threshold needs at least one observation")
    levels = np.unique(nu)
    cand = np.unique(np.concatenate([(levels[1:] + levels[:-1]) / 2, [0.0, 0.5, 1.0]]))
    # error(a) = #{y=0, nu > a} + #{y=1, nu <= a}, all over n
    nu0 = np.sort(nu[y == 0])
    nu1 = np.sort(nu[y == 1])
    err = ((nu0.shape[0] - np.searchsorted(nu0, cand, side="right"))
           + np.searchsorted(nu1, cand, side="right")) / n
    best = err.min()
    choice = None
    for a in cand[err == best]:
        if choice is None or _closest_to_half(a, choice):
            choice = float(a)
    return choice


def _rank_order(cands, scores):
    keyed = sorted(range(len(cands)), key=lambda i: (scores[i], len(cands[i]), cands[i]))
    return keyed


class _Fitter:
    def __init__(self, dataset, config):
        self.data = dataset
        self.cfg = config
        self.split = class_split(dataset)
        self.D = config.resolve_D(dataset, self.split)
        self.scorer = SubspaceScorer(dataset, config.base, config.criterion, self.split)

    def _fit_on(self, sub):
        X = self.data.X[:, np.asarray(sub, dtype=np.intp)]
        restricted = LabeledDataset(X, self.data.y)
        return classifiers.fit(self.cfg.base, restricted, self.split, Subspace(tuple(sub)))

    def _train_learner(self, cands, scores):
        i = argmin_subspace(cands, scores)
        try:
            return self._fit_on(cands[i])
        except FitFailure:
            pass
        for k in _rank_order(cands, scores):
            try:
                return self._fit_on(cands[k])
            except FitFailure:
                continue
        for f in range(self.data.p):
            try:
                return self._fit_on((f,))
            except FitFailure:
                continue
        raise FitFailure("no candidate subspace or single feature could be fit")

    def _chunk(self, t, js, weights):
        cfg = self.cfg
        idx, sizes = [], []
        for j in js:
            a, s = draw_candidates(self.data.p, self.D, cfg.B2, substream(cfg.seed, t, j), weights)
            idx.append(a)
            sizes.append(s)
        if self.scorer.prunable:
            scores = np.stack([self.scorer.score_for_selection(a, s) for a, s in zip(idx, sizes)])
        else:
            scores = self.scorer.score(np.concatenate(idx), np.concatenate(sizes))
            scores = scores.reshape(len(js), cfg.B2)
        out = []
        for r in range(len(js)):
            cands = [tuple(sorted(int(v) for v in idx[r][k, :sizes[r][k]])) for k in range(cfg.B2)]
            out.append(self._train_learner(cands, scores[r]))
        return out

    def iteration(self, t, weights, pool):
        B1 = self.cfg.B1
        chunks = [range(a, min(a + _CHUNK, B1)) for a in range(0, B1, _CHUNK)]
        learners = []
        for part in pool.map(lambda js: self._chunk(t, js, weights), chunks):
            learners.extend(part)
        return learners

    def eta(self, learners):
        counts = np.zeros(self.data.p)
        for lr in learners:
            counts[lr.subspace.array] += 1
        return counts / len(learners)

    def model(self, learners, eta, pool):
        X, y = self.data.X, self.data.y
        rows = list(pool.map(lambda lr: lr.predict(X[:, lr.subspace.array]), learners))
        nu = np.mean(rows, axis=0)
        training = self.data if self.cfg.base.name == "knn" else None
        return RaseModel(learners, select_threshold(nu, y), eta, self.cfg, self.data.p, training)


def fit(dataset: LabeledDataset, config: EnsembleConfig | None = None, keep_history=False):
    """Fit a RaSE ensemble, running ``config.T`` re-weighting rounds.

    With ``T = 0`` this is the plain algorithm. Each round ``t`` draws its
    candidates from substreams ``(seed, t, j)``; round ``t >= 1`` samples with
    weights derived from the previous round's selection frequencies. The
    threshold is set on the final ensemble. With ``keep_history`` the returned
    model carries ``history``: one model (with its own threshold) per round.
    """
    config = config or EnsembleConfig()
    fitter = _Fitter(dataset, config)
    p = dataset.p
    weights = None
    history = []
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        for t in range(config.T + 1):
            learners = fitter.iteration(t, weights, pool)
            eta = fitter.eta(learners)
            log.debug("round %d: top features %s", t, np.argsort(-eta)[:5])
            if keep_history and t < config.T:
                history.append(fitter.model(learners, eta, pool))
            if t < config.T:
                weights = update_weights(eta, config.C0, p) if p >= 2 else None
        final = fitter.model(learners, eta, pool)
    if keep_history:
        history.append(final)
        final.history = history
    return final


def fit_iterative(dataset, config):
    """Iterative fit; requires ``config.T >= 1`` (``fit`` covers ``T = 0``)."""
    if config.T < 1:
        raise ValueError("fit_iterative needs T >= 1")
    return fit(dataset, config)


def with_overrides(config, **changes):
    return replace(config, **changes)

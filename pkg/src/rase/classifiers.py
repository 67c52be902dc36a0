"""Base classifiers trained on a single feature subspace.

Every learner exposes ``decision_function`` (a real score, class 1 iff the
score is positive) and ``predict`` on the *restricted* feature matrix, i.e.
the columns of its own subspace only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _knn
from .dataset import ClassSplit, LabeledDataset, Subspace, class_split
from .errors import (DataError, DegenerateSample, DimensionMismatch, FitFailure,
                     KTooLarge, NonConvergence, SingularMatrix)
from .numerics import (class_covariance_mle, class_means, digamma, log_gamma,
                       pooled_covariance_mle, spd_inverse_logdet, trigamma)

BASE_NAMES = ("lda", "qda", "knn", "gamma")
DEFAULT_K_GRID = (3, 5, 7, 9, 11)


@dataclass(frozen=True)
class BaseKind:
    """Which base classifier to train; ``k_grid`` only matters for kNN."""

    name: str
    k_grid: tuple = DEFAULT_K_GRID

    def __post_init__(self):
        if self.name not in BASE_NAMES:
            raise ValueError(f"unknown base classifier {self.name!r}; "
                             f"expected one of {BASE_NAMES}")
        grid = tuple(int(k) for k in self.k_grid)
        if not grid or min(grid) < 1:
            raise ValueError(f"k_grid must be non-empty positive integers, got {self.k_grid}")
        object.__setattr__(self, "k_grid", grid)


def _as_matrix(X, d):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != d:
        raise DimensionMismatch(f"expected {d} features, got {X.shape[1]}")
    return X


class _Learner:
    kind = None
    subspace: Subspace | None

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(np.int64)


@dataclass(frozen=True, eq=False)
class LdaLearner(_Learner):
    mean0: np.ndarray
    mean1: np.ndarray
    cov_inv: np.ndarray
    log_prior_ratio: float
    subspace: Subspace | None = None
    coef: np.ndarray = field(init=False, repr=False)
    intercept: float = field(init=False, repr=False)
    kind = "lda"

    def __post_init__(self):
        w = self.cov_inv @ (self.mean1 - self.mean0)
        object.__setattr__(self, "coef", w)
        object.__setattr__(self, "intercept",
                           float(self.log_prior_ratio - 0.5 * (self.mean0 + self.mean1) @ w))

    @property
    def dim(self):
        return self.mean0.shape[0]

    def decision_function(self, X):
        # (x - (mu0 + mu1)/2)' Sigma^-1 (mu1 - mu0) + log(pi1/pi0)
        X = _as_matrix(X, self.dim)
        return X @ self.coef + self.intercept


@dataclass(frozen=True, eq=False)
class QdaLearner(_Learner):
    mean0: np.ndarray
    mean1: np.ndarray
    cov0_inv: np.ndarray
    cov1_inv: np.ndarray
    logdet0: float
    logdet1: float
    log_prior_ratio: float
    subspace: Subspace | None = None
    kind = "qda"

    @property
    def dim(self):
        return self.mean0.shape[0]

    def decision_function(self, X):
        """Gaussian log-posterior ratio, log-determinant term included."""
        X = _as_matrix(X, self.dim)
        Z0 = X - self.mean0
        Z1 = X - self.mean1
        q0 = np.einsum("ij,jk,ik->i", Z0, self.cov0_inv, Z0)
        q1 = np.einsum("ij,jk,ik->i", Z1, self.cov1_inv, Z1)
        return self.log_prior_ratio - 0.5 * (q1 - q0) - 0.5 * (self.logdet1 - self.logdet0)


@dataclass(frozen=True, eq=False)
class KnnLearner(_Learner):
    k: int
    X_train: np.ndarray
    y_train: np.ndarray
    subspace: Subspace | None = None
    kind = "knn"

    @property
    def dim(self):
        return self.X_train.shape[1]

    @property
    def tie_to_one(self):
        # even-k half votes go to the class with the larger training prior
        return int(self.y_train.sum()) * 2 > self.y_train.shape[0]

    def vote_fraction(self, X):
        X = _as_matrix(X, self.dim)
        nbr = _knn.neighbor_table(X, self.X_train, self.k)
        return self.y_train[nbr].mean(axis=1)

    def decision_function(self, X):
        return self.vote_fraction(X) - 0.5

    def predict(self, X):
        return _knn.knn_predict_from_votes(self.vote_fraction(X), self.tie_to_one)


def gamma_logpdf(x, shape, scale):
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = ((shape - 1.0) * np.log(x) - x / scale
               - shape * np.log(scale) - log_gamma(shape))
    return out


@dataclass(frozen=True, eq=False)
class GammaLearner(_Learner):
    shape0: np.ndarray
    scale0: np.ndarray
    shape1: np.ndarray
    scale1: np.ndarray
    log_prior_ratio: float
    subspace: Subspace | None = None
    kind = "gamma"

    @property
    def dim(self):
        return self.shape0.shape[0]

    def decision_function(self, X):
        """Log prior ratio plus the summed per-feature Gamma log-density ratios.

        Rows with a negative coordinate get ``-inf`` (zero density under both
        classes is read as "not class 1").
        """
        X = _as_matrix(X, self.dim)
        neg = (X < 0).any(axis=1)
        pos = np.where(X > 0, X, 1.0)
        logx = np.log(pos)
        da = self.shape1 - self.shape0
        const = (-self.shape1 * np.log(self.scale1) - log_gamma(self.shape1)
                 + self.shape0 * np.log(self.scale0) + log_gamma(self.shape0))
        term = da * logx - X * (1.0 / self.scale1 - 1.0 / self.scale0) + const
        zero = X == 0
        if zero.any():
            # log(0) contributes -inf * (a1 - a0)
            term = np.where(zero, np.where(da > 0, -np.inf, np.where(da < 0, np.inf, const)), term)
        with np.errstate(invalid="ignore"):
            score = self.log_prior_ratio + term.sum(axis=1)
        score = np.where(np.isnan(score), -np.inf, score)
        return np.where(neg, -np.inf, score)


def decision_score(learner, x_s):
    """Score of a single restricted observation."""
    x_s = np.asarray(x_s, dtype=np.float64)
    if x_s.ndim != 1:
        raise DimensionMismatch("decision_score takes a single observation")
    return float(learner.decision_function(x_s)[0])


# -- Gamma maximum likelihood -------------------------------------------------

GAMMA_TOL = 1e-10
GAMMA_MAX_ITER = 100


def gamma_moment_estimate(values):
    """Method-of-moments ``(shape, scale)``: ``mean^2/var`` and ``var/mean``."""
    v = np.asarray(values, dtype=np.float64)
    mean, var = v.mean(), v.var()
    if var <= 0:
        raise DegenerateSample("zero-variance sample")
    return mean * mean / var, var / mean


def _gamma_newton(mean, meanlog, var):
    """Vectorized Newton solve of ``log a - digamma(a) = log(mean) - mean(log x)``.

    Returns ``(shape, scale, converged)`` arrays.
    """
    target = np.log(mean) - meanlog
    a = mean * mean / var
    done = np.zeros(a.shape, dtype=bool)
    for _ in range(GAMMA_MAX_ITER):
        live = ~done
        if not live.any():
            break
        al = a[live]
        g = np.log(al) - digamma(al) - target[live]
        gp = 1.0 / al - trigamma(al)
        step = g / gp
        new = al - step
        bad = ~(new > 0)
        new[bad] = al[bad] / 2
        step[bad] = al[bad] / 2
        a[live] = new
        done[np.flatnonzero(live)[np.abs(step) < GAMMA_TOL]] = True
    return a, mean / a, done


def _check_gamma_data(V):
    if (V < 0).any():
        raise FitFailure("negative value in Gamma data")
    if (V == 0).any():
        raise FitFailure("zero value in Gamma data (log-likelihood unbounded)")


def gamma_mle(values):
    """Maximum likelihood ``(shape, scale)`` of a Gamma sample.

    Newton iteration on the profile score equation of the shape, started at
    the moment estimator; the scale follows as ``mean / shape``.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    _check_gamma_data(v)
    if v.size < 2 or v.var() <= 0:
        raise DegenerateSample("Gamma MLE needs at least two distinct values")
    a, b, ok = _gamma_newton(np.array([v.mean()]), np.array([np.log(v).mean()]),
                             np.array([v.var()]))
    if not ok[0]:
        raise NonConvergence(f"Gamma shape Newton did not converge in {GAMMA_MAX_ITER} steps")
    return float(a[0]), float(b[0])


def gamma_mle_columns(V):
    """Column-wise Gamma MLE of a matrix; raises on the first bad column."""
    V = np.asarray(V, dtype=np.float64)
    _check_gamma_data(V)
    var = V.var(axis=0)
    if V.shape[0] < 2 or (var <= 0).any():
        raise DegenerateSample("Gamma MLE needs at least two distinct values per feature")
    a, b, ok = _gamma_newton(V.mean(axis=0), np.log(V).mean(axis=0), var)
    if not ok.all():
        raise NonConvergence(f"Gamma shape Newton did not converge in {GAMMA_MAX_ITER} steps")
    return a, b


# -- fitting --------------------------------------------------------------------

def loo_knn_error(restricted: LabeledDataset, k):
    """Leave-one-out error rate of ``k``-NN on the restricted data."""
    n = restricted.n
    if k < 1 or k > n - 1:
        raise KTooLarge(f"k={k} needs 1 <= k <= n-1={n - 1}")
    y = restricted.y
    tie = int(y.sum()) * 2 > n
    return float(_knn.loo_error_rates(restricted.X, y, (k,), tie)[0])


def select_k(X, y, k_grid):
    """Grid value with the smallest leave-one-out error (ties -> smaller k)."""
    grid = sorted(k for k in k_grid if k <= X.shape[0] - 1)
    if not grid:
        raise FitFailure(f"no k in {tuple(k_grid)} is below n={X.shape[0]}")
    tie = int(y.sum()) * 2 > y.shape[0]
    rates = _knn.loo_error_rates(X, y, grid, tie)
    best = int(np.argmin(rates))
    return grid[best], float(rates[best])


def _log_prior_ratio(split):
    return float(np.log(split.n1 / split.n0))


def fit(kind: BaseKind, restricted: LabeledDataset, split: ClassSplit | None = None,
        subspace: Subspace | None = None):
    """Fit a base classifier of type ``kind`` on already-restricted data."""
    if isinstance(kind, str):
        kind = BaseKind(kind)
    if split is None:
        split = class_split(restricted)
    if split.n0 == 0 or split.n1 == 0:
        raise FitFailure("both classes are needed to fit")
    lpr = _log_prior_ratio(split)
    X = restricted.X
    if kind.name == "lda":
        means = class_means(restricted, split)
        cov = pooled_covariance_mle(restricted, split, means)
        try:
            fac = spd_inverse_logdet(cov)
        except SingularMatrix as exc:
            raise FitFailure(f"singular pooled covariance: {exc}") from exc
        return LdaLearner(means[0], means[1], fac.inverse, lpr, subspace)
    if kind.name == "qda":
        if split.n0 < 2 or split.n1 < 2:
            raise FitFailure("QDA needs at least two rows per class")
        means = class_means(restricted, split)
        facs = []
        for r in (0, 1):
            try:
                facs.append(spd_inverse_logdet(class_covariance_mle(restricted, split, means, r)))
            except SingularMatrix as exc:
                raise FitFailure(f"singular class-{r} covariance: {exc}") from exc
        return QdaLearner(means[0], means[1], facs[0].inverse, facs[1].inverse,
                          facs[0].log_det, facs[1].log_det, lpr, subspace)
    if kind.name == "knn":
        k, _ = select_k(X, restricted.y, kind.k_grid)
        return KnnLearner(k, np.ascontiguousarray(X), np.asarray(restricted.y), subspace)
    if kind.name == "gamma":
        try:
            a0, b0 = gamma_mle_columns(X[split.indices0])
            a1, b1 = gamma_mle_columns(X[split.indices1])
        except DataError as exc:  # pragma: no cover - defensive
            raise FitFailure(str(exc)) from exc
        return GammaLearner(a0, b0, a1, b1, lpr, subspace)
    raise AssertionError(kind)

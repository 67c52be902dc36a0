"""Dense Gaussian estimation, SPD factorizations, special functions and
nearest-neighbour distances shared by classifiers and criteria."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.spatial.distance import cdist

from .errors import DomainError, EmptyClass, KTooLarge, SingularMatrix

RIDGE_LEVELS = (1e-10, 1e-8, 1e-6)
# A Cholesky pivot this small relative to its diagonal entry is treated as a
# failed factorization: LAPACK accepts it but the inverse is pure noise.
PIVOT_RTOL = 1e-12


# -- Gaussian sample moments -------------------------------------------------

def class_means(restricted, split):
    """Per-class sample means ``(mean0, mean1)``."""
    if split.n0 == 0 or split.n1 == 0:
        raise EmptyClass("class means need both classes")
    X = restricted.X
    return X[split.indices0].mean(axis=0), X[split.indices1].mean(axis=0)


def _scatter(Z):
    return Z.T @ Z


def class_covariance_mle(restricted, split, means, class_r):
    """MLE covariance of one class (divides by ``n_r``)."""
    idx = split.indices1 if class_r == 1 else split.indices0
    if idx.shape[0] == 0:
        raise EmptyClass(f"class {class_r} has no rows")
    Z = restricted.X[idx] - means[class_r]
    return _scatter(Z) / idx.shape[0]


def pooled_covariance_mle(restricted, split, means):
    """Pooled within-class MLE covariance (divides by ``n``, not ``n - 2``)."""
    X = restricted.X
    Z0 = X[split.indices0] - means[0]
    Z1 = X[split.indices1] - means[1]
    return (_scatter(Z0) + _scatter(Z1)) / split.n


@dataclass(frozen=True)
class SpdFactorization:
    inverse: np.ndarray
    log_det: float
    ridge_used: float = 0.0


def _cholesky_ok(m):
    try:
        L = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return None
    piv = np.diagonal(L) ** 2
    if np.any(piv <= PIVOT_RTOL * np.abs(np.diagonal(m))):
        return None
    return L


def spd_inverse_logdet(m) -> SpdFactorization:
    """Inverse and log-determinant of a symmetric positive definite matrix.

    When the Cholesky factorization fails the matrix is regularized with
    ``lam * mean(diag(m))`` on the diagonal for each ``lam`` in
    :data:`RIDGE_LEVELS`; the ridge actually added is reported. Raises
    :class:`SingularMatrix` when every level fails.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    d = m.shape[0]
    scale = float(np.mean(np.diagonal(m))) if d else 0.0
    for ridge in (0.0,) + tuple(lam * scale for lam in RIDGE_LEVELS):
        if ridge < 0:
            continue
        a = m + ridge * np.eye(d) if ridge else m
        L = _cholesky_ok(a)
        if L is None:
            continue
        Linv = np.linalg.solve(L, np.eye(d))
        inv = Linv.T @ Linv
        return SpdFactorization(inv, float(2.0 * np.log(np.diagonal(L)).sum()), ridge)
    raise SingularMatrix(f"{d}x{d} matrix is not positive definite after ridge escalation")


def batched_cholesky(mats):
    """Cholesky factors of a stack of SPD matrices with per-matrix fallback.

    Returns ``(L, ok)`` where ``L[i]`` factors ``mats[i] + ridge_i * I`` under
    the same escalation rule as :func:`spd_inverse_logdet` and ``ok[i]`` is
    False for matrices that could not be factorized (their ``L`` is garbage).
    """
    mats = np.asarray(mats, dtype=np.float64)
    m, d, _ = mats.shape
    ok = np.ones(m, dtype=bool)
    try:
        L = np.linalg.cholesky(mats)
        piv = np.diagonal(L, axis1=1, axis2=2) ** 2
        bad = np.any(piv <= PIVOT_RTOL * np.abs(np.diagonal(mats, axis1=1, axis2=2)), axis=1)
    except np.linalg.LinAlgError:
        L = np.empty_like(mats)
        bad = np.ones(m, dtype=bool)
        # only the failing matrices need the slow path
        for i in range(m):
            Li = _cholesky_ok(mats[i])
            if Li is not None:
                L[i] = Li
                bad[i] = False
    for i in np.flatnonzero(bad):
        scale = float(np.mean(np.diagonal(mats[i])))
        for lam in RIDGE_LEVELS:
            Li = _cholesky_ok(mats[i] + lam * scale * np.eye(d))
            if Li is not None:
                L[i] = Li
                break
        else:
            L[i] = np.eye(d)
            ok[i] = False
    return L, ok


# -- special functions -------------------------------------------------------

def _positive(x, name):
    x = np.asarray(x, dtype=np.float64)
    if np.any(~(x > 0)):
        raise DomainError(f"{name} requires x > 0")
    return x


def _scalar_or_array(out):
    return out[()] if out.ndim == 0 else out


def digamma(x):
    """Digamma function, defined here for ``x > 0`` only."""
    return _scalar_or_array(special.digamma(_positive(x, "digamma")))


def trigamma(x):
    """First derivative of :func:`digamma`."""
    return _scalar_or_array(special.polygamma(1, _positive(x, "trigamma")))


def log_gamma(x):
    """``log(Gamma(x))`` for ``x > 0``."""
    return _scalar_or_array(special.gammaln(_positive(x, "log_gamma")))


# -- nearest neighbour distances --------------------------------------------

def _kth_smallest(D, k):
    # stable argsort breaks equal distances by column (row) index
    order = np.argsort(D, axis=1, kind="stable")
    return np.take_along_axis(D, order[:, k - 1:k], axis=1)[:, 0]


def kth_nn_distance_within(points, k):
    """Distance from each row to its ``k``-th nearest other row."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    m = points.shape[0]
    if k < 1 or k > m - 1:
        raise KTooLarge(f"k={k} needs 1 <= k <= {m - 1}")
    D = cdist(points, points)
    np.fill_diagonal(D, np.inf)
    return _kth_smallest(D, k)


def kth_nn_distance_between(queries, references, k):
    """Distance from each query to its ``k``-th nearest reference row."""
    queries = np.asarray(queries, dtype=np.float64)
    references = np.asarray(references, dtype=np.float64)
    if queries.ndim == 1:
        queries = queries[:, None]
    if references.ndim == 1:
        references = references[:, None]
    if k < 1 or k > references.shape[0]:
        raise KTooLarge(f"k={k} needs 1 <= k <= {references.shape[0]}")
    return _kth_smallest(cdist(queries, references), k)

"""Compiled nearest-neighbour search used by the kNN classifier and its
leave-one-out criterion.

Squared distances are ranked through the Gram expansion
``|q|^2 + |r|^2 - 2 q.r`` with the ``|q|^2`` term dropped (constant per
query). The product is computed by BLAS in row blocks; the numba kernel keeps
the ``kmax`` best candidates per row. Equal distances are resolved by the
smaller reference index.
"""

from __future__ import annotations

import numba
import numpy as np

_BLOCK = 128
_CHUNK = 16


@numba.njit(nogil=True, cache=True)
def _scan_block(G, sq_ref, row0, exclude_self, kmax, out):
    nb, n = G.shape
    nc = (n + _CHUNK - 1) // _CHUNK
    r = np.empty(nc * _CHUNK)
    cmin = np.empty(nc)
    bd = np.empty(kmax)
    cd = np.empty(nc * _CHUNK)
    ci = np.empty(nc * _CHUNK, np.int64)
    for j in range(n, nc * _CHUNK):
        r[j] = np.inf
    for ii in range(nb):
        for j in range(n):
            r[j] = sq_ref[j] - 2.0 * G[ii, j]
        if exclude_self:
            r[row0 + ii] = np.inf
        for c in range(nc):
            mn = r[c * _CHUNK]
            for t in range(1, _CHUNK):
                v = r[c * _CHUNK + t]
                mn = v if v < mn else mn
            cmin[c] = mn
        # chunk minima are distinct entries, so the kmax-th smallest of them
        # bounds the kmax-th smallest distance from above
        for t in range(kmax):
            bd[t] = np.inf
        for c in range(nc):
            d = cmin[c]
            if d < bd[kmax - 1]:
                p = kmax - 1
                while p > 0 and bd[p - 1] > d:
                    bd[p] = bd[p - 1]
                    p -= 1
                bd[p] = d
        thr = bd[kmax - 1]
        m = 0
        for c in range(nc):
            if cmin[c] <= thr:
                for j in range(c * _CHUNK, c * _CHUNK + _CHUNK):
                    cd[m] = r[j]
                    ci[m] = j
                    m += r[j] <= thr
        # stable insertion sort: equal distances keep index order
        for a in range(1, m):
            d = cd[a]
            j = ci[a]
            p = a
            while p > 0 and cd[p - 1] > d:
                cd[p] = cd[p - 1]
                ci[p] = ci[p - 1]
                p -= 1
            cd[p] = d
            ci[p] = j
        for t in range(kmax):
            out[ii, t] = ci[t]


def neighbor_table(queries, references, kmax, exclude_self=False):
    """Indices of the ``kmax`` nearest references for every query row.

    With ``exclude_self`` the queries must be the references themselves and
    row ``i`` never lists itself (leave-one-out search).
    """
    Q = np.ascontiguousarray(queries, dtype=np.float64)
    R = np.ascontiguousarray(references, dtype=np.float64)
    limit = R.shape[0] - (1 if exclude_self else 0)
    if kmax < 1 or kmax > limit:
        raise ValueError(f"kmax={kmax} outside [1, {limit}]")
    sq = np.einsum("ij,ij->i", R, R)
    out = np.empty((Q.shape[0], kmax), dtype=np.int64)
    for b in range(0, Q.shape[0], _BLOCK):
        G = Q[b:b + _BLOCK] @ R.T
        _scan_block(G, sq, b, exclude_self, kmax, out[b:b + _BLOCK])
    return out


def vote_fractions(neighbor_labels, k_grid):
    """``(len(k_grid), m)`` array of the fraction of class-1 labels among the
    first ``k`` neighbours, for each ``k`` in the grid."""
    csum = np.cumsum(neighbor_labels, axis=1)
    ks = np.asarray(k_grid)
    return csum[:, ks - 1].T / ks[:, None]


def knn_predict_from_votes(frac, tie_to_one):
    """Majority vote; an exact half vote goes to class 1 only if ``tie_to_one``."""
    pred = (frac > 0.5).astype(np.int64)
    if tie_to_one:
        pred[frac == 0.5] = 1
    return pred


def loo_error_rates(X, y, k_grid, tie_to_one):
    """Leave-one-out misclassification rate of kNN for every ``k`` in the grid."""
    kmax = int(max(k_grid))
    nbr = neighbor_table(X, X, kmax, exclude_self=True)
    frac = vote_fractions(y[nbr], k_grid)
    pred = knn_predict_from_votes(frac, tie_to_one)
    return (pred != y[None, :]).mean(axis=1)


@numba.njit(nogil=True, cache=True)
def _count_wrong(nbr, y, row0, ks, tie_to_one, wrong):
    # integer form of the majority rule in knn_predict_from_votes
    kmax = nbr.shape[1]
    for ii in range(nbr.shape[0]):
        truth = y[row0 + ii]
        ones = 0
        g = 0
        for t in range(kmax):
            ones += y[nbr[ii, t]]
            if g < ks.shape[0] and ks[g] == t + 1:
                twice = 2 * ones
                pred = 1 if twice > ks[g] or (tie_to_one and twice == ks[g]) else 0
                wrong[g] += pred != truth
                g += 1


def loo_error_counts(X, y, k_grid, tie_to_one, bound=None):
    """Leave-one-out error counts per ``k``, computed block by block.

    ``k_grid`` must be sorted ascending. With ``bound`` set, returns ``None``
    as soon as every count exceeds ``bound``: the final error would then be
    strictly worse, so callers that only need the minimizer can skip the
    rest of the rows.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    n = X.shape[0]
    ks = np.asarray(k_grid, dtype=np.int64)
    if np.any(np.diff(ks) <= 0):
        raise ValueError("k_grid must be strictly increasing")
    kmax = int(ks[-1])
    if ks[0] < 1 or kmax > n - 1:
        raise ValueError(f"k grid {tuple(ks)} outside [1, {n - 1}]")
    sq = np.einsum("ij,ij->i", X, X)
    wrong = np.zeros(ks.shape[0], dtype=np.int64)
    nbr = np.empty((_BLOCK, kmax), dtype=np.int64)
    for b in range(0, n, _BLOCK):
        G = X[b:b + _BLOCK] @ X.T
        out = nbr[:G.shape[0]]
        _scan_block(G, sq, b, True, kmax, out)
        _count_wrong(out, y, b, ks, tie_to_one, wrong)
        if bound is not None and wrong.min() > bound:
            return None
    return wrong

"""Random subspace distributions.

The size ``d`` is always uniform on ``{1..D}``. Given ``d``, the uniform law
picks a uniformly random ``d``-subset; the weighted law draws ``d`` distinct
features one after another with probability proportional to their weight
(renormalized after each draw).

Ensemble fitting draws all candidates of one weak learner from a generator
keyed by ``(seed, iteration, learner)``, so the result never depends on how
learners are scheduled across threads.
"""

from __future__ import annotations

import math

import numpy as np

from .dataset import Subspace
from .errors import InvalidBound


def substream(seed, *key):
    """Independent generator for the substream ``key`` of master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def _check_bounds(p, D):
    if not (1 <= D <= p):
        raise InvalidBound(f"need 1 <= D <= p, got D={D}, p={p}")


def sample_uniform(p, D, rng) -> Subspace:
    """One draw from the hierarchical uniform distribution (partial Fisher-Yates)."""
    _check_bounds(p, D)
    d = int(rng.integers(1, D + 1))
    perm = list(range(p))
    for i in range(d):
        j = int(rng.integers(i, p))
        perm[i], perm[j] = perm[j], perm[i]
    return Subspace(tuple(perm[:d]))


def _check_weights(w):
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or not np.all(np.isfinite(w)) or not np.all(w > 0):
        raise InvalidBound("subspace weights must be finite and strictly positive")
    return w


def sample_weighted(eta_tilde, D, rng) -> Subspace:
    """One draw: uniform size, then sequential weighted sampling without replacement."""
    w = _check_weights(eta_tilde).copy()
    p = w.shape[0]
    _check_bounds(p, D)
    d = int(rng.integers(1, D + 1))
    chosen = []
    for _ in range(d):
        c = np.cumsum(w)
        j = int(np.searchsorted(c, rng.random() * c[-1], side="right"))
        j = min(j, p - 1)
        while w[j] == 0:  # guard against landing on a removed entry at a float edge
            j -= 1
        chosen.append(j)
        w[j] = 0.0
    return Subspace(tuple(chosen))


def draw_candidates(p, D, m, rng, weights=None):
    """``m`` candidate subspaces as a padded ``(m, D)`` index matrix plus sizes.

    Row ``i`` holds an ordered draw without replacement; its first
    ``sizes[i]`` entries form the candidate. Ordering by i.i.d. uniform keys
    gives a uniform random permutation; ordering by ``Exp(1)/w`` keys gives the
    sequential weighted draw (exponential race), so prefixes have exactly the
    laws of :func:`sample_uniform` and :func:`sample_weighted`.
    """
    _check_bounds(p, D)
    sizes = rng.integers(1, D + 1, size=m)
    if weights is None:
        keys = rng.random((m, p))
    else:
        w = _check_weights(weights)
        if w.shape[0] != p:
            raise InvalidBound(f"{w.shape[0]} weights for p={p} features")
        keys = rng.standard_exponential((m, p)) / w
    if D < p:
        part = np.argpartition(keys, D - 1, axis=1)[:, :D]
    else:
        part = np.broadcast_to(np.arange(p), (m, p)).copy()
    order = np.argsort(np.take_along_axis(keys, part, axis=1), axis=1, kind="stable")
    return np.take_along_axis(part, order, axis=1), sizes


def update_weights(eta, C0, p):
    """Floor small selection frequencies: keep ``eta_l`` above ``C0/log p``,
    otherwise replace it by ``C0/p``."""
    if not C0 > 0:
        raise InvalidBound(f"C0 must be positive, got {C0}")
    if p < 2:
        raise InvalidBound("weight update needs p >= 2")
    eta = np.asarray(eta, dtype=np.float64)
    return np.where(eta > C0 / math.log(p), eta, C0 / p)


def coverage_probability(p, p_star, D):
    """Probability that one hierarchical-uniform subspace contains a fixed
    set of ``p_star`` features."""
    if not (0 <= p_star <= D <= p):
        raise InvalidBound(f"need p_star <= D <= p, got p_star={p_star}, D={D}, p={p}")
    total = 0.0
    for d in range(max(p_star, 1), D + 1):
        log_term = (math.lgamma(p - p_star + 1) - math.lgamma(d - p_star + 1)
                    - math.lgamma(p - d + 1)
                    - (math.lgamma(p + 1) - math.lgamma(d + 1) - math.lgamma(p - d + 1)))
        total += math.exp(log_term)
    return total / D

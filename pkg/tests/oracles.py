"""Independent reference computations used by several test modules.

The plug-in oracle evaluates the criterion straight from its definition:
minus twice the prior-weighted empirical averages of fitted log-density
ratios, plus the penalty. Densities come from scipy and parameters from
direct numpy formulas (or an independent root solve for the Gamma shape).
"""

import math

import numpy as np
from scipy import optimize, special, stats


def _weighted_plugin(X, y, logratio, c_n, deg):
    n = len(y)
    lr = logratio(X)  # log f1/f0 per row
    total = (np.sum(-lr[y == 0]) + np.sum(lr[y == 1])) / n
    return -2.0 * total + c_n * deg


def plugin_ric_lda(X, y, c_n):
    m0, m1 = X[y == 0].mean(axis=0), X[y == 1].mean(axis=0)
    R = np.where((y == 0)[:, None], X - m0, X - m1)
    cov = R.T @ R / len(y)
    f0 = stats.multivariate_normal(m0, cov)
    f1 = stats.multivariate_normal(m1, cov)
    return _weighted_plugin(X, y, lambda Z: f1.logpdf(Z) - f0.logpdf(Z), c_n, X.shape[1] + 1)


def plugin_ric_qda(X, y, c_n):
    fs = [stats.multivariate_normal(X[y == r].mean(axis=0), np.cov(X[y == r].T, bias=True))
          for r in (0, 1)]
    d = X.shape[1]
    return _weighted_plugin(X, y, lambda Z: np.atleast_1d(fs[1].logpdf(Z) - fs[0].logpdf(Z)),
                            c_n, d * (d + 3) / 2 + 1)


def gamma_mle_root(v):
    """Gamma (shape, scale) MLE by bracketing root search on the profile equation."""
    target = math.log(v.mean()) - np.log(v).mean()
    g = lambda a: math.log(a) - special.digamma(a) - target  # noqa: E731
    a = optimize.brentq(g, 1e-8, 1e8, xtol=1e-15, rtol=1e-15, maxiter=500)
    return a, v.mean() / a


def plugin_ric_gamma(X, y, c_n):
    d = X.shape[1]
    params = [[gamma_mle_root(X[y == r, j]) for j in range(d)] for r in (0, 1)]

    def logratio(Z):
        out = np.zeros(Z.shape[0])
        for j in range(d):
            (a0, b0), (a1, b1) = params[0][j], params[1][j]
            out += stats.gamma.logpdf(Z[:, j], a1, scale=b1) - stats.gamma.logpdf(Z[:, j], a0, scale=b0)
        return out
    return _weighted_plugin(X, y, logratio, c_n, 2 * d + 1)


def random_instance(rng, kind):
    """Small random two-class problem: n <= 60, |S| <= 5."""
    d = int(rng.integers(1, 6))
    n = int(rng.integers(max(2 * d + 8, 20), 61))
    y = np.zeros(n, dtype=int)
    n1 = int(rng.integers(d + 4, n - d - 3))
    y[rng.permutation(n)[:n1]] = 1
    if kind == "gamma":
        X = rng.gamma(rng.uniform(0.5, 4, d), rng.uniform(0.5, 3, d), (n, d))
        X[y == 1] *= rng.uniform(0.5, 2, d)
    else:
        A = rng.standard_normal((d, d))
        X = rng.standard_normal((n, d)) @ A + rng.standard_normal(d)
        X[y == 1] = X[y == 1] * rng.uniform(0.7, 1.5, d) + rng.normal(0, 1, d)
    return X, y


def threshold_error(nu, y, alpha):
    return float(np.mean((nu > alpha).astype(int) != y))


def hand_nonparametric_example():
    """KL estimate for class 0 = {0, 1}, class 1 = {10, 11}, k0 = k1 = 1, in 1-d."""
    return 0.5 * (math.log(10) + math.log(9)) + math.log(2 / 1) + 0.0

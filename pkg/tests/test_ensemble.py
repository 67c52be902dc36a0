import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rase import (DimensionMismatch, EnsembleConfig, LabeledDataset, feature_ranking, fit,
                  fit_iterative, misclassification_rate, predict, predict_score,
                  select_threshold)
from rase.classifiers import LdaLearner
from rase.dataset import Subspace
from rase.ensemble import RaseModel
from rase.simulation import SimModelSpec, generate

from oracles import threshold_error


@pytest.fixture(scope="module")
def small():
    rng = np.random.default_rng(0)
    n, p = 80, 12
    y = np.arange(n) % 2
    X = rng.standard_normal((n, p))
    X[y == 1, 0] += 1.5
    X[y == 1, 3] -= 1.0
    return LabeledDataset(X, y)


def _cfg(**kw):
    base = dict(B1=20, B2=30, seed=1, threads=1)
    base.update(kw)
    return EnsembleConfig(**base)


def _stub_model(votes, alpha=0.5):
    """Model whose learner j outputs the constant vote ``votes[j]``."""
    learners = []
    for v in votes:
        lr = LdaLearner(np.zeros(1), np.zeros(1), np.eye(1), 1.0 if v else -1.0, Subspace((0,)))
        learners.append(lr)
    return RaseModel(learners, alpha, np.ones(1), _cfg(), 1)


def test_unanimous_and_counted_votes():
    assert predict_score(_stub_model([1, 1, 1]), np.zeros(1)) == 1.0
    assert predict_score(_stub_model([1, 0, 1, 1]), np.zeros(1)) == 0.75


def test_predict_strict_threshold():
    m = _stub_model([1, 0, 1, 1], alpha=0.75)
    assert predict(m, np.zeros(1)) == 0
    m = _stub_model([1, 1], alpha=0.5)
    assert predict(m, np.zeros(1)) == 1


def test_select_threshold_example():
    nu = np.array([0.2, 0.6, 0.4, 0.8])
    y = np.array([0, 0, 1, 1])
    assert select_threshold(nu, y) == pytest.approx(0.3)
    assert threshold_error(nu, y, 0.3) == 0.25


def test_select_threshold_separated():
    nu = np.array([0.1, 0.2, 0.7, 0.9])
    y = np.array([0, 0, 1, 1])
    a = select_threshold(nu, y)
    assert threshold_error(nu, y, a) == 0.0
    assert a == 0.5


@given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 1)), min_size=1, max_size=60))
def test_select_threshold_grid_optimal(pairs):
    nu = np.array([a / 20 for a, _ in pairs])
    y = np.array([b for _, b in pairs])
    a = select_threshold(nu, y)
    assert 0.0 <= a <= 1.0
    best = threshold_error(nu, y, a)
    for g in np.linspace(0, 1, 1000):
        assert best <= threshold_error(nu, y, g) + 1e-12


def test_fit_bookkeeping(small):
    m = fit(small, _cfg())
    assert len(m.learners) == 20
    sizes = sum(len(lr.subspace) for lr in m.learners)
    assert m.eta.sum() * 20 == pytest.approx(sizes, abs=1e-9)
    counts = np.zeros(small.p)
    for lr in m.learners:
        counts[list(lr.subspace.indices)] += 1
    np.testing.assert_array_equal(m.eta, counts / 20)
    assert 0 <= m.alpha_hat <= 1


def test_degenerate_ensemble(small):
    m = fit(small, _cfg(B1=1, B2=1))
    assert len(m.learners) == 1
    expect = np.zeros(small.p)
    expect[list(m.learners[0].subspace.indices)] = 1.0
    np.testing.assert_array_equal(m.eta, expect)


def test_nu_matches_per_learner_oracle(small):
    m = fit(small, _cfg())
    X = np.random.default_rng(1).standard_normal((25, small.p))
    votes = np.array([lr.predict(X[:, list(lr.subspace.indices)]) for lr in m.learners])
    np.testing.assert_array_equal(m.predict_score(X), votes.mean(axis=0))
    batch = m.predict(X)
    assert [predict(m, x) for x in X] == batch.tolist()


def test_learner_order_irrelevant(small):
    m = fit(small, _cfg())
    X = np.random.default_rng(2).standard_normal((25, small.p))
    rev = RaseModel(m.learners[::-1], m.alpha_hat, m.eta, m.config, m.p)
    np.testing.assert_array_equal(rev.predict(X), m.predict(X))


def test_dimension_mismatch(small):
    m = fit(small, _cfg())
    with pytest.raises(DimensionMismatch):
        m.predict(np.zeros((2, small.p + 1)))


@pytest.mark.parametrize("base", ["lda", "qda", "knn"])
def test_threads_bit_identical(small, base):
    a = fit(small, _cfg(base=base, threads=1, T=1))
    b = fit(small, _cfg(base=base, threads=8, T=1))
    np.testing.assert_array_equal(a.eta, b.eta)
    assert a.alpha_hat == b.alpha_hat
    assert [lr.subspace for lr in a.learners] == [lr.subspace for lr in b.learners]
    X = np.random.default_rng(3).standard_normal((40, small.p))
    np.testing.assert_array_equal(a.predict_score(X), b.predict_score(X))


def test_t0_equals_plain_fit(small):
    a = fit(small, _cfg(T=0))
    h = fit(small, _cfg(T=2), keep_history=True).history[0]
    assert a.alpha_hat == h.alpha_hat
    np.testing.assert_array_equal(a.eta, h.eta)
    assert [lr.subspace for lr in a.learners] == [lr.subspace for lr in h.learners]


def test_history_prefix_equals_shorter_run(small):
    h = fit(small, _cfg(T=2), keep_history=True).history
    one = fit(small, _cfg(T=1))
    np.testing.assert_array_equal(h[1].eta, one.eta)
    assert h[1].alpha_hat == one.alpha_hat


def test_fit_iterative_requires_rounds(small):
    with pytest.raises(ValueError):
        fit_iterative(small, _cfg(T=0))
    m = fit_iterative(small, _cfg(T=1))
    assert len(m.learners) == 20


def test_feature_ranking_rules():
    m = _stub_model([1])
    m.eta = np.array([0.1, 0.9, 0.1])
    assert [j + 1 for j, _ in feature_ranking(m)] == [2, 1, 3]
    m.eta = np.full(4, 0.3)
    assert [j for j, _ in feature_ranking(m)] == [0, 1, 2, 3]


def test_misclassification_rate_counts(small):
    m = _stub_model([0, 0])
    zeros = LabeledDataset(np.zeros((5, 1)), [0] * 5)
    ones = LabeledDataset(np.zeros((5, 1)), [1] * 5)
    assert misclassification_rate(m, zeros) == 0.0
    assert misclassification_rate(m, ones) == 1.0
    fitted = fit(small, _cfg())
    assert misclassification_rate(fitted, small) == np.mean(fitted.predict(small.X) != small.y)


def test_fallback_when_all_candidates_fail():
    # every multi-feature subspace is singular; RIC is +inf except on singletons
    rng = np.random.default_rng(4)
    base = rng.standard_normal((30, 1))
    X = np.hstack([base, base, base])
    y = np.arange(30) % 2
    X[y == 1] += 1.0
    m = fit(LabeledDataset(X, y), _cfg(B1=5, B2=3, D=3))
    assert len(m.learners) == 5


def test_config_validation():
    with pytest.raises(ValueError):
        EnsembleConfig(B1=0)
    with pytest.raises(ValueError):
        EnsembleConfig(T=-1)
    with pytest.raises(ValueError):
        EnsembleConfig(C0=0)
    assert EnsembleConfig(base="knn").criterion.kind == "loo"


def test_default_subspace_bound():
    train, _, _ = generate(SimModelSpec("3", 100, n_test=1, seed=0))
    from rase import class_split
    s = class_split(train)
    assert EnsembleConfig(base="lda").resolve_D(train, s) == 10
    import math
    assert EnsembleConfig(base="qda").resolve_D(train, s) == min(math.isqrt(s.n0),
                                                                  math.isqrt(s.n1))


def test_model1_single_seed_error():
    train, test, _ = generate(SimModelSpec("1", 1000, seed=21))
    m = fit(train, EnsembleConfig(seed=5))
    assert misclassification_rate(m, test) <= 0.13


def test_model2_iterations_find_signals():
    train, _, _ = generate(SimModelSpec("2", 400, seed=22))
    m = fit(train, EnsembleConfig(base="gamma", T=2, seed=6))
    assert np.all(m.eta[:5] >= 0.8)


def test_model1_signal_frequency_nondecreasing():
    good = 0
    for seed in range(5):
        train, _, _ = generate(SimModelSpec("1", 400, seed=30 + seed))
        h = fit(train, EnsembleConfig(T=2, seed=seed, B1=100), keep_history=True).history
        sig = [hh.eta[[0, 1, 4]].sum() for hh in h]
        good += all(b >= a for a, b in zip(sig, sig[1:]))
    assert good >= 4

import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from rase import coverage_probability, sample_uniform, sample_weighted, update_weights
from rase.errors import InvalidBound
from rase.sampling import draw_candidates, substream


def exact_coverage(p, p_star, D):
    total = sum(Fraction(math.comb(p - p_star, d - p_star), math.comb(p, d))
                for d in range(max(p_star, 1), D + 1))
    return total / D


def test_coverage_hand_value():
    assert coverage_probability(4, 1, 2) == pytest.approx(0.375, abs=1e-15)
    assert coverage_probability(1, 1, 1) == 1.0
    assert coverage_probability(5, 5, 5) == pytest.approx(1 / 5)


def test_coverage_exact_oracle():
    got = coverage_probability(400, 3, 20)
    assert got == pytest.approx(float(exact_coverage(400, 3, 20)), rel=1e-12)


def test_coverage_bounds():
    with pytest.raises(InvalidBound):
        coverage_probability(10, 5, 4)


def test_coverage_monte_carlo():
    rng = np.random.default_rng(0)
    idx, sizes = draw_candidates(10, 4, 100_000, rng)
    hit = ((idx == 0) & (np.arange(4) < sizes[:, None])).any(1) & \
          ((idx == 1) & (np.arange(4) < sizes[:, None])).any(1)
    p = coverage_probability(10, 2, 4)
    se = math.sqrt(p * (1 - p) / 100_000)
    assert abs(hit.mean() - p) < 3 * se


def test_uniform_singletons_marginals():
    rng = np.random.default_rng(1)
    counts = Counter(sample_uniform(5, 1, rng).indices[0] for _ in range(10_000))
    for j in range(5):
        assert 0.17 <= counts[j] / 10_000 <= 0.23


def test_uniform_d_equals_p_two():
    rng = np.random.default_rng(2)
    draws = Counter(sample_uniform(2, 2, rng).indices for _ in range(10_000))
    assert set(draws) == {(0,), (1,), (0, 1)}
    ones = draws[(0,)] + draws[(1,)]
    assert abs(ones / 10_000 - 0.5) < 4 * math.sqrt(0.25 / 10_000)


@given(st.integers(1, 30), st.data())
def test_samples_are_valid_subspaces(p, data):
    D = data.draw(st.integers(1, p))
    seed = data.draw(st.integers(0, 2**32))
    rng = np.random.default_rng(seed)
    s = sample_uniform(p, D, rng)
    assert 1 <= len(s) <= D and list(s.indices) == sorted(set(s.indices))
    w = rng.random(p) + 0.01
    s = sample_weighted(w, D, rng)
    assert 1 <= len(s) <= D and max(s.indices) < p


def test_weighted_dominant_feature():
    rng = np.random.default_rng(3)
    w = np.full(20, 1e-6)
    w[2] = 1.0
    hits = sum(2 in sample_weighted(w, 5, rng).indices for _ in range(10_000))
    assert hits / 10_000 > 0.99


def test_weighted_full_size_is_everything():
    rng = np.random.default_rng(4)
    w = np.array([0.1, 5.0, 0.3])
    for _ in range(20):
        s = sample_weighted(w, 3, rng)
        if len(s) == 3:
            assert s.indices == (0, 1, 2)


def test_uniform_weights_match_uniform_law():
    rng = np.random.default_rng(5)
    p, m = 10, 100_000
    counts = np.zeros(p)
    for _ in range(m // 1000):
        idx, sizes = draw_candidates(p, 1, 1000, rng, weights=np.ones(p))
        counts += np.bincount(idx[:, 0], minlength=p)
    chi = stats.chisquare(counts)
    assert chi.pvalue > 1e-3


def test_bad_weights_and_bounds():
    rng = np.random.default_rng(0)
    with pytest.raises(InvalidBound):
        sample_weighted(np.array([1.0, 0.0]), 1, rng)
    with pytest.raises(InvalidBound):
        sample_uniform(3, 4, rng)
    with pytest.raises(InvalidBound):
        sample_uniform(3, 0, rng)


def test_update_weights_branches():
    eta = np.zeros(100)
    eta[:2] = [0.5, 0.02]
    out = update_weights(eta, 0.1, 100)
    np.testing.assert_allclose(out[:3], [0.5, 0.001, 0.001])
    assert update_weights(np.array([1.0, 0.0]), 0.1, 2)[0] == 1.0
    assert np.all(update_weights(np.zeros(7), 0.1, 7) == 0.1 / 7)


def _ordered_pair_probs(w):
    W = w.sum()
    return {(i, j): w[i] / W * w[j] / (W - w[i])
            for i, j in itertools.permutations(range(len(w)), 2)}


def test_batched_weighted_prefix_law():
    """Ordered first two picks of the batched sampler follow sequential
    weighted sampling without replacement."""
    w = np.array([0.5, 2.0, 1.0, 0.25])
    rng = np.random.default_rng(6)
    idx, _ = draw_candidates(4, 2, 200_000, rng, weights=w)
    probs = _ordered_pair_probs(w)
    keys = list(probs)
    obs = Counter(zip(idx[:, 0].tolist(), idx[:, 1].tolist()))
    f_obs = np.array([obs[k] for k in keys], dtype=float)
    f_exp = np.array([probs[k] for k in keys]) * len(idx)
    assert stats.chisquare(f_obs, f_exp).pvalue > 1e-3


def test_batched_uniform_subset_law():
    rng = np.random.default_rng(7)
    idx, sizes = draw_candidates(5, 3, 100_000, rng)
    rows = idx[sizes == 2, :2]
    obs = Counter(tuple(sorted(r)) for r in rows.tolist())
    f_obs = np.array([obs[c] for c in itertools.combinations(range(5), 2)], dtype=float)
    assert stats.chisquare(f_obs).pvalue > 1e-3
    assert abs(np.mean(sizes == 2) - 1 / 3) < 4 * math.sqrt(2 / 9 / 100_000)


def test_sequential_weighted_matches_exact_pairs():
    w = np.array([0.5, 2.0, 1.0, 0.25])
    rng = np.random.default_rng(8)
    obs = Counter()
    m = 0
    while m < 20_000:
        s = sample_weighted(w, 2, rng)
        if len(s) == 2:
            obs[s.indices] += 1
            m += 1
    probs = _ordered_pair_probs(w)
    unordered = {c: probs[c] + probs[c[::-1]] for c in itertools.combinations(range(4), 2)}
    f_obs = np.array([obs[c] for c in unordered], dtype=float)
    f_exp = np.array(list(unordered.values())) * m
    assert stats.chisquare(f_obs, f_exp).pvalue > 1e-3


def test_substreams_are_keyed():
    a = substream(7, 0, 3).random(4)
    b = substream(7, 0, 3).random(4)
    c = substream(7, 1, 3).random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)

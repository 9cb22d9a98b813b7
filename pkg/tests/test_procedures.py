import math

import numpy as np
import pytest

from oracles import brute_bh, brute_family, criterion, grid_oracle
from usfdr.procedures import (
    LambdaGrid,
    bh_decisions,
    bh_procedure,
    family_threshold,
    fixed_level,
    p_values_from_t,
    screened_procedure,
    split_sample_procedure,
    split_screen_and_stats,
    two_family_decisions,
    us_procedure,
)
from usfdr.stats import DegenerateVariance, TestStatistics, TwoSampleDataset, VarianceRegime


def make_stats(t, s, df=198.0):
    return TestStatistics(t=np.asarray(t, float), s=np.asarray(s, float),
                          regime=VarianceRegime.EQUAL, df=float(df))


# Benjamini-Hochberg

def test_bh_hand_example():
    res = bh_procedure(np.array([0.01, 0.5, 0.9]), 0.05)
    assert res.k_hat == 1
    assert list(res.rejected) == [0]
    assert res.threshold_p == 0.01


def test_bh_nothing_rejected():
    res = bh_procedure(np.ones(7), 0.2)
    assert res.k_hat == 0 and res.n_rejected == 0


def test_bh_ties_rejected_together():
    res = bh_procedure(np.array([0.02, 0.02, 0.02, 0.9]), 0.1)
    assert list(res.rejected) == [0, 1, 2]


def test_bh_errors():
    with pytest.raises(ValueError):
        bh_procedure(np.array([]), 0.1)
    with pytest.raises(ValueError):
        bh_procedure(np.array([0.1, 1.2]), 0.1)
    for alpha in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            bh_procedure(np.array([0.1]), alpha)


def test_bh_matches_brute_force(rng):
    for _ in range(200):
        m = int(rng.integers(1, 201))
        p = rng.uniform(size=m) ** rng.uniform(1, 6)
        if rng.uniform() < 0.3:
            p = np.round(p, 2)  # ties
        alpha = float(rng.uniform(0.01, 0.5))
        assert set(bh_procedure(p, alpha).rejected) == brute_bh(list(p), alpha)


def test_bh_large_uniform(rng):
    p = rng.uniform(size=1000)
    assert set(bh_procedure(p, 0.2).rejected) == brute_bh(list(p), 0.2)


def test_bh_decisions_rows_match_single_alpha(rng):
    p = rng.uniform(size=300) ** 3
    alphas = np.array([0.05, 0.1, 0.2, 0.5])
    masks, k = bh_decisions(p, alphas)
    for row, a, kk in zip(masks, alphas, k):
        res = bh_procedure(p, a)
        assert set(np.flatnonzero(row)) == set(res.rejected)
        assert kk == res.k_hat


# p-values

def test_p_values_examples():
    p = p_values_from_t(make_stats([0.0, 1.0, -1.0, 1e6], np.zeros(4), df=1))
    assert p[0] == 1.0
    assert p[1] == pytest.approx(0.5, abs=1e-14)
    assert p[2] == pytest.approx(0.5, abs=1e-14)
    assert p[3] < 1e-5


# single-family threshold

def test_threshold_empty_family():
    assert family_threshold(np.array([]), 0, 0.1, 20) == 0.0
    assert family_threshold(np.array([1.0, 5.0]), 0, 0.1, 20) == 0.0


def test_threshold_matches_grid_oracle(rng):
    worst = 0.0
    for _ in range(100):
        size = int(rng.integers(1, 80))
        df = float(rng.integers(20, 200))
        signal = rng.uniform(0, 5) * (rng.uniform(size=size) < 0.3)
        t_abs = np.abs(rng.standard_normal(size) + signal)
        m_hat = size + int(rng.integers(0, 20))
        alpha = float(rng.uniform(0.05, 0.5))
        got = family_threshold(t_abs, m_hat, alpha, df)
        worst = max(worst, abs(got - grid_oracle(t_abs, m_hat, alpha, df)))
    assert worst <= 1e-6


def test_threshold_fifty_family(rng):
    t_abs = np.abs(rng.standard_normal(50) + np.r_[np.full(10, 3.5), np.zeros(40)])
    got = family_threshold(t_abs, 50, 0.2, 198)
    assert got == pytest.approx(grid_oracle(t_abs, 50, 0.2, 198), abs=1e-6)


def test_threshold_validity(rng):
    for _ in range(100):
        size = int(rng.integers(1, 60))
        df = 98.0
        t_abs = np.abs(rng.standard_normal(size) * rng.uniform(0.5, 3))
        m_hat, alpha = size, float(rng.uniform(0.05, 0.5))
        thr = family_threshold(t_abs, m_hat, alpha, df)
        ts = np.sort(t_abs)
        assert criterion(thr, ts, m_hat, df) <= alpha * (1 + 1e-9)
        below = ts[ts < thr - 1e-9]
        assert np.all(criterion(below, ts, m_hat, df) > alpha)
        # the rejection set agrees with the observed-value scan
        first = brute_family(list(t_abs), m_hat, alpha, df)
        expected = set() if first is None else {i for i, v in enumerate(t_abs) if v >= first}
        assert {i for i, v in enumerate(t_abs) if v >= thr} == expected


# lambda grid

def test_lambda_grid_endpoints():
    levels = LambdaGrid(10, math.e).levels
    assert levels.size == 41
    np.testing.assert_allclose(levels, np.arange(41) / 10, atol=1e-15)
    with pytest.raises(ValueError):
        LambdaGrid(0, 100)


def test_fixed_level():
    assert fixed_level(2000) == pytest.approx(math.sqrt(2 * math.log(2000)))


def test_all_zero_t_selects_last_level():
    stats = make_stats(np.zeros(100), np.linspace(0, 5, 100))
    res = us_procedure(stats, 0.1, n_grid=10)
    assert res.n_rejected == 0
    assert res.lambda_index == 40
    assert np.all(res.per_lambda_rejection_counts == 0)


# reference scan over all splits

def reference_us(t, s, alpha, df, n_grid):
    m = len(t)
    levels = [i / n_grid * math.sqrt(math.log(m)) for i in range(4 * n_grid + 1)]
    best, best_set, best_i = -1, set(), -1
    for i, lam in enumerate(levels):
        fam1 = [j for j in range(m) if abs(s[j]) >= lam]
        fam2 = [j for j in range(m) if abs(s[j]) < lam]
        rej = set()
        for fam in (fam1, fam2):
            if not fam:
                continue
            first = brute_family([abs(t[j]) for j in fam], len(fam), alpha, df)
            if first is not None:
                rej |= {j for j in fam if abs(t[j]) >= first}
        if len(rej) >= best:
            best, best_set, best_i = len(rej), rej, i
    return best_i, best_set


def test_us_matches_reference_scan(rng):
    for _ in range(10):
        m = 150
        k = 12
        mu = np.zeros(m)
        mu[:k] = rng.uniform(1, 4)
        t = rng.standard_normal(m) + mu
        s = rng.standard_normal(m) + 1.5 * mu + (rng.uniform(size=m) < 0.2) * 2.5
        alpha = float(rng.uniform(0.05, 0.4))
        res = us_procedure(make_stats(t, s), alpha, n_grid=4)
        idx, expected = reference_us(list(t), list(s), alpha, 198.0, 4)
        assert res.lambda_index == idx
        assert set(res.rejected) == expected


def test_lambda_zero_reproduces_bh(rng):
    for _ in range(100):
        m = int(rng.integers(20, 400))
        t = rng.standard_normal(m) + (rng.uniform(size=m) < 0.1) * rng.uniform(2, 5)
        s = rng.standard_normal(m)
        stats = make_stats(t, s)
        alpha = float(rng.uniform(0.01, 0.5))
        res = us_procedure(stats, alpha)
        bh = bh_procedure(p_values_from_t(stats), alpha)
        assert res.per_lambda_rejection_counts[0] == bh.n_rejected


def test_rejections_monotone_in_alpha_per_level(rng):
    m = 500
    t = rng.standard_normal(m) + np.r_[np.full(40, 3.0), np.zeros(m - 40)]
    s = rng.standard_normal(m) + np.r_[np.full(40, 3.0), np.zeros(m - 40)]
    p = p_values_from_t(make_stats(t, s))
    alphas = np.linspace(0.01, 1.0, 25)
    for lam in LambdaGrid(10, m).levels:
        _, rej, *_ = two_family_decisions(p, s, [lam], alphas)
        for a in range(alphas.size - 1):
            assert np.all(rej[a] <= rej[a + 1])


def test_permutation_equivariance(rng):
    m = 400
    t = rng.standard_normal(m) + np.r_[np.full(30, 3.5), np.zeros(m - 30)]
    s = rng.standard_normal(m) + np.r_[np.full(30, 2.0), np.zeros(m - 30)]
    perm = rng.permutation(m)
    a = us_procedure(make_stats(t, s), 0.2)
    b = us_procedure(make_stats(t[perm], s[perm]), 0.2)
    assert set(perm[b.rejected]) == set(a.rejected)
    assert a.lambda_hat == b.lambda_hat


def test_result_fields_consistent(rng):
    m = 300
    t = rng.standard_normal(m) + np.r_[np.full(20, 4.0), np.zeros(m - 20)]
    s = rng.standard_normal(m) + np.r_[np.full(20, 3.0), np.zeros(m - 20)]
    res = us_procedure(make_stats(t, s), 0.1)
    f1 = res.split.family1
    assert res.split.m_hat_1 + res.split.m_hat_2 == m
    assert res.per_lambda_rejection_counts[res.lambda_index] == res.n_rejected
    expected = np.flatnonzero((f1 & (np.abs(t) >= res.t1_hat)) | (~f1 & (np.abs(t) >= res.t2_hat)))
    np.testing.assert_array_equal(res.rejected, expected)


# screened and split variants

def test_screened_with_s_equals_us(rng):
    m = 300
    t = rng.standard_normal(m) + np.r_[np.full(20, 3.0), np.zeros(m - 20)]
    s = rng.standard_normal(m) * 2
    stats = make_stats(t, s)
    a = us_procedure(stats, 0.15)
    b = screened_procedure(np.abs(s), stats, 0.15)
    np.testing.assert_array_equal(a.rejected, b.rejected)
    assert (a.lambda_hat, a.t1_hat, a.t2_hat) == (b.lambda_hat, b.t1_hat, b.t2_hat)


def test_zero_screen_fixed_level_is_one_family(rng):
    m = 200
    t = rng.standard_normal(m) + np.r_[np.full(15, 4.0), np.zeros(m - 15)]
    stats = make_stats(t, rng.standard_normal(m))
    res = screened_procedure(np.zeros(m), stats, 0.1, lambda_rule="fixed")
    assert res.split.m_hat_1 == 0 and res.split.m_hat_2 == m
    assert res.lambda_index is None
    assert res.lambda_hat == pytest.approx(fixed_level(m))
    bh = bh_procedure(p_values_from_t(stats), 0.1)
    np.testing.assert_array_equal(res.rejected, bh.rejected)


def test_screened_bad_inputs(rng):
    stats = make_stats(rng.standard_normal(10), rng.standard_normal(10))
    with pytest.raises(ValueError):
        screened_procedure(np.zeros(9), stats, 0.1)
    with pytest.raises(ValueError):
        screened_procedure(np.zeros(10), stats, 0.1, lambda_rule="median")


def test_split_testing_df(rng):
    data = TwoSampleDataset(rng.standard_normal((100, 50)), rng.standard_normal((100, 50)))
    screen, stats = split_screen_and_stats(data, "SS", 50)
    assert stats.df == 98
    assert screen.shape == (50,)
    res = split_sample_procedure(data, 0.1, "MS", 50)
    assert res.lambda_index is not None


def test_split_errors(rng):
    data = TwoSampleDataset(rng.standard_normal((10, 5)), rng.standard_normal((10, 5)))
    with pytest.raises(ValueError):
        split_sample_procedure(data, 0.1, "SS", 9)
    with pytest.raises(ValueError):
        split_sample_procedure(data, 0.1, "XX", 5)
    g1 = rng.standard_normal((10, 5))
    g1[:5, 2] = 1.0
    with pytest.raises(DegenerateVariance):
        split_sample_procedure(TwoSampleDataset(g1, rng.standard_normal((10, 5))), 0.1, "SS", 5)

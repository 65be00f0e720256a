import numpy as np
import pytest

from leakaudit import ConfigError, NumericalError
from leakaudit.experiments import (
    acc_near,
    acc_nth_presented,
    bh_fdr,
    binomial_se_pct,
    bonferroni,
    chance_pct,
    make_embedding_bank,
    one_sample_ttest,
    rank_accuracy,
    rank_of_target,
    top_k_accuracy,
)


def brute_force_rank(scores_row, target):
    """Rank by sorting (score desc, index asc) with plain Python."""
    order = sorted(range(len(scores_row)), key=lambda j: (-scores_row[j], j))
    return order.index(target) + 1


class TestRetrievalMetrics:
    def test_ranks_match_brute_force(self):
        rng = np.random.default_rng(0)
        scores = rng.standard_normal((50, 12))
        targets = rng.integers(0, 12, 50)
        ranks = rank_of_target(scores, targets)
        for i in range(50):
            assert ranks[i] == brute_force_rank(scores[i].tolist(), int(targets[i]))

    def test_rank_handles_ties(self):
        scores = np.array([[1.0, 1.0, 0.5, 1.0]])
        assert rank_of_target(scores, np.array([0]))[0] == 1
        assert rank_of_target(scores, np.array([1]))[0] == 2
        assert rank_of_target(scores, np.array([3]))[0] == 3
        assert rank_of_target(scores, np.array([2]))[0] == 4

    def test_perfect_predictor(self):
        bank = make_embedding_bank(10, dim=32, seed=1)
        targets = np.arange(10)
        scores = bank @ bank.T
        assert top_k_accuracy(scores, targets, 1) == 100.0
        assert rank_accuracy(scores, targets) == 100.0

    def test_uniform_scores_rank_acc_near_50(self):
        rng = np.random.default_rng(42)
        scores = rng.uniform(size=(10000, 40))
        targets = rng.integers(0, 40, 10000)
        assert rank_accuracy(scores, targets) == pytest.approx(50.0, abs=2.0)

    def test_topk_recount_on_random_tables(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n, m = int(rng.integers(5, 40)), int(rng.integers(3, 15))
            scores = rng.standard_normal((n, m))
            targets = rng.integers(0, m, n)
            for k in (1, min(5, m)):
                brute = 100.0 * np.mean(
                    [brute_force_rank(scores[i].tolist(), int(targets[i])) <= k for i in range(n)]
                )
                assert top_k_accuracy(scores, targets, k) == brute


class TestZeroShotMetrics:
    def test_acc_near_counts_adjacent(self):
        order = [10, 11, 12, 13, 14]
        pred = np.array([11, 13, 10, 14])
        true = np.array([10, 12, 12, 10])
        # adjacent pairs: (11,10) and (13,12); (10,12) and (14,10) are not
        assert acc_near(pred, true, order) == pytest.approx(50.0)

    def test_acc_near_brute_force_recount(self):
        rng = np.random.default_rng(3)
        order = list(rng.permutation(20))
        pos = {c: i for i, c in enumerate(order)}
        pred = rng.choice(order, size=200)
        true = rng.choice(order, size=200)
        brute = 100.0 * np.mean([abs(pos[p] - pos[t]) == 1 for p, t in zip(pred, true)])
        assert acc_near(pred, true, order) == pytest.approx(brute)

    def test_acc_7th(self):
        order = [4, 9, 1, 7, 0, 3, 8, 2]
        pred = np.array([8, 8, 1, 8])
        assert acc_nth_presented(pred, order, n=7) == pytest.approx(75.0)

    def test_acc_nth_bounds(self):
        with pytest.raises(ConfigError):
            acc_nth_presented(np.array([0]), [0, 1], n=3)


class TestChanceLevels:
    def test_canonical_chances(self):
        assert chance_pct(40) == 2.5
        assert chance_pct(8) == 12.5
        assert chance_pct(4) == 25.0
        assert chance_pct(2) == 50.0

    def test_binomial_se(self):
        se = binomial_se_pct(50.0, 100)
        assert se == pytest.approx(5.0)


class TestEmbeddingBank:
    def test_unit_norm_and_shape(self):
        bank = make_embedding_bank(40, dim=768, seed=0)
        assert bank.shape == (40, 768)
        assert np.max(np.abs(np.linalg.norm(bank, axis=1) - 1.0)) < 1e-9

    def test_seeded(self):
        a = make_embedding_bank(8, dim=16, seed=5)
        b = make_embedding_bank(8, dim=16, seed=5)
        c = make_embedding_bank(8, dim=16, seed=6)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestTTest:
    def test_constant_shift_significant(self):
        rng = np.random.default_rng(0)
        values = 55.0 + rng.normal(0, 0.5, 10)  # mean well above 50
        t, p = one_sample_ttest(values, 50.0, one_sided=True)
        assert t > 0
        assert p < 0.001

    def test_matches_scipy_two_sided(self):
        from scipy import stats as sps

        rng = np.random.default_rng(1)
        values = rng.normal(1.0, 2.0, 12)
        t, p = one_sample_ttest(values, 0.0, one_sided=False)
        ref = sps.ttest_1samp(values, 0.0)
        assert t == pytest.approx(ref.statistic)
        assert p == pytest.approx(ref.pvalue)

    def test_zero_variance_rejected(self):
        with pytest.raises(NumericalError):
            one_sample_ttest([5.0, 5.0, 5.0], 4.0)

    def test_needs_two_values(self):
        with pytest.raises(ConfigError):
            one_sample_ttest([1.0], 0.0)


class TestBonferroni:
    def test_multiplies_by_family_size(self):
        adjusted = bonferroni([0.01, 0.2, 0.04, 0.5, 0.3])
        assert adjusted[0] == pytest.approx(0.05)
        assert adjusted[3] == 1.0

    def test_single_p(self):
        assert bonferroni([0.3])[0] == pytest.approx(0.3)

    def test_rejects_bad_p(self):
        with pytest.raises(ConfigError):
            bonferroni([1.5])


def brute_force_bh(p_values, q):
    """Direct step-up definition: find the largest i with p_(i) <= q*i/m."""
    m = len(p_values)
    order = sorted(range(m), key=lambda i: p_values[i])
    k = 0
    for rank, i in enumerate(order, start=1):
        if p_values[i] <= q * rank / m:
            k = rank
    reject = [False] * m
    for rank, i in enumerate(order, start=1):
        if rank <= k:
            reject[i] = True
    return reject


class TestBhFdr:
    def test_spec_example(self):
        p = [0.01, 0.02, 0.03, 0.5]
        _, reject = bh_fdr(p, q=0.05)
        assert reject.tolist() == brute_force_bh(p, 0.05)

    def test_matches_brute_force_on_random_tables(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            m = int(rng.integers(1, 40))
            p = rng.uniform(size=m)
            q = float(rng.uniform(0.01, 0.2))
            _, reject = bh_fdr(p, q=q)
            assert reject.tolist() == brute_force_bh(p.tolist(), q)

    def test_adjusted_monotone_in_sorted_order(self):
        rng = np.random.default_rng(4)
        p = rng.uniform(size=30)
        adjusted, _ = bh_fdr(p, q=0.05)
        order = np.argsort(p)
        assert np.all(np.diff(adjusted[order]) >= -1e-15)

    def test_never_rejects_more_than_uncorrected(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            p = rng.uniform(size=100)
            q = 0.05
            _, reject = bh_fdr(p, q=q)
            assert reject.sum() <= np.sum(p < q) + np.sum(p == q)

    def test_nan_cells_flagged_not_rejected(self):
        p = np.array([0.001, np.nan, 0.9])
        adjusted, reject = bh_fdr(p, q=0.05)
        assert np.isnan(adjusted[1])
        assert not reject[1]
        assert reject[0]

"""Significance tests and rank statistics against enumeration / scipy oracles."""

import itertools
import math
import random

import numpy as np
import pytest
import scipy.stats
import scipy.special

from stepcap.errors import ValidationError
from stepcap.stats import (
    SignificanceResult,
    betainc_reg,
    combined_significance,
    corrected_resampled_t,
    midranks,
    normal_cdf,
    roc_auc,
    spearman,
    student_t_two_sided_p,
    wilcoxon_signed_rank,
)


def oracle_wilcoxon_exact(diffs):
    """Brute-force enumeration over every sign assignment (midranks)."""
    nonzero = [d for d in diffs if d != 0]
    n = len(nonzero)
    if n == 0:
        return 1.0
    mags = [abs(d) for d in nonzero]
    order = sorted(range(n), key=lambda i: mags[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and mags[order[j + 1]] == mags[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    observed = sum(r for r, d in zip(ranks, nonzero) if d > 0)
    mu = n * (n + 1) / 4
    dev = abs(observed - mu)
    hits = 0
    for signs in itertools.product((0, 1), repeat=n):
        w = sum(r for r, s in zip(ranks, signs) if s)
        if abs(w - mu) >= dev - 1e-12:
            hits += 1
    return hits / 2**n


class TestDistributionInternals:
    def test_betainc_matches_scipy(self):
        rng = random.Random(0)
        for _ in range(300):
            a = rng.uniform(0.3, 20)
            b = rng.uniform(0.3, 20)
            x = rng.random()
            assert betainc_reg(a, b, x) == pytest.approx(
                float(scipy.special.betainc(a, b, x)), abs=1e-12
            )

    def test_normal_cdf_matches_scipy(self):
        for x in np.linspace(-6, 6, 61):
            assert normal_cdf(x) == pytest.approx(
                float(scipy.stats.norm.cdf(x)), abs=1e-14
            )

    def test_t_two_sided_matches_scipy(self):
        rng = random.Random(1)
        for _ in range(200):
            t = rng.uniform(-8, 8)
            df = rng.randint(1, 40)
            expected = 2 * float(scipy.stats.t.sf(abs(t), df))
            assert student_t_two_sided_p(t, df) == pytest.approx(expected, abs=1e-12)


class TestWilcoxon:
    def test_all_positive_fixture(self):
        assert wilcoxon_signed_rank([1, 2, 3, 4, 5]) == pytest.approx(0.0625)

    def test_all_zero_diffs(self):
        assert wilcoxon_signed_rank([0.0, 0.0, 0.0]) == 1.0

    def test_tied_magnitudes(self):
        assert wilcoxon_signed_rank([1, -1]) == pytest.approx(1.0)

    def test_empty_errors(self):
        with pytest.raises(ValidationError):
            wilcoxon_signed_rank([])

    def test_exact_matches_bruteforce_enumeration(self):
        rng = random.Random(2)
        for _ in range(150):
            n = rng.randint(1, 12)
            # small integer magnitudes force plenty of ties
            diffs = [rng.choice([-3, -2, -1, 0, 1, 2, 3]) for _ in range(n)]
            if all(d == 0 for d in diffs):
                continue
            assert wilcoxon_signed_rank(diffs) == pytest.approx(
                oracle_wilcoxon_exact(diffs), abs=1e-12
            )

    def test_large_n_matches_scipy_approx(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            diffs = rng.normal(0.3, 1.0, size=40)
            ours = wilcoxon_signed_rank(diffs)
            theirs = float(
                scipy.stats.wilcoxon(
                    diffs, correction=True, mode="approx"
                ).pvalue
            )
            assert ours == pytest.approx(theirs, abs=1e-9)


class TestCorrectedResampledT:
    def test_spec_fixture(self):
        diffs = [2, 1] * 5
        p = corrected_resampled_t(diffs, test_frac=0.1, train_frac=0.8)
        # t = 1.5 / sqrt(0.225 * 0.27778) = 6.0, df = 9
        expected = 2 * float(scipy.stats.t.sf(6.0, 9))
        assert p == pytest.approx(expected, abs=1e-12)
        assert p == pytest.approx(2.0e-4, abs=1e-4)

    def test_all_zero(self):
        assert corrected_resampled_t([0.0] * 6) == 1.0

    def test_constant_nonzero(self):
        assert corrected_resampled_t([1.5] * 6) == 0.0

    def test_reduces_to_classical_paired_t(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            diffs = rng.normal(0.2, 1.0, size=rng.integers(3, 15))
            ours = corrected_resampled_t(diffs, test_frac=0.0, train_frac=1.0)
            classical = float(scipy.stats.ttest_1samp(diffs, 0.0).pvalue)
            assert ours == pytest.approx(classical, abs=1e-10)

    def test_needs_two_folds(self):
        with pytest.raises(ValidationError):
            corrected_resampled_t([1.0])


class TestCombined:
    def test_identical_systems(self):
        result = combined_significance([1, 2, 3], [1, 2, 3])
        assert result.combined_p == 1.0
        assert not result.significant

    def test_max_rule(self):
        result = SignificanceResult(
            wilcoxon_p=0.03, corrected_t_p=0.005, combined_p=0.03, n=10
        )
        assert result.combined_p == 0.03
        with pytest.raises(ValidationError):
            SignificanceResult(
                wilcoxon_p=0.03, corrected_t_p=0.005, combined_p=0.005, n=10
            )

    def test_combined_geq_each(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            a = rng.normal(50, 5, size=8)
            b = a - rng.normal(0.5, 0.5, size=8)
            res = combined_significance(list(a), list(b))
            assert res.combined_p >= res.wilcoxon_p
            assert res.combined_p >= res.corrected_t_p

    def test_segment_level_pairing(self):
        folds_a = [50.0, 51.0, 52.0]
        folds_b = [48.0, 49.0, 50.5]
        seg_a = list(np.linspace(40, 60, 30))
        seg_b = [x - 1.0 for x in seg_a]
        res = combined_significance(
            folds_a, folds_b, segment_scores_a=seg_a, segment_scores_b=seg_b
        )
        assert res.n == 30
        # wilcoxon now runs over 30 paired segments, all positive diffs
        assert res.wilcoxon_p < 0.001


class TestSpearman:
    def test_perfect_monotone(self):
        rho, p = spearman([1, 2, 3, 4], [10, 20, 30, 40])
        assert rho == 1.0
        assert p == 0.0

    def test_reversed(self):
        rho, _ = spearman([1, 2, 3, 4], [4, 3, 2, 1])
        assert rho == -1.0

    def test_hand_example(self):
        rho, _ = spearman([1, 2, 3, 4], [1, 3, 2, 4])
        assert rho == pytest.approx(0.8)

    def test_constant_errors(self):
        with pytest.raises(ValidationError):
            spearman([1, 1, 1], [1, 2, 3])

    def test_matches_scipy_with_ties(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            n = int(rng.integers(4, 25))
            x = rng.integers(0, 6, size=n).astype(float)
            y = (x + rng.normal(0, 2, size=n)).round(1)
            if len(set(x)) < 2 or len(set(y)) < 2:
                continue
            ours_rho, ours_p = spearman(x, y)
            theirs = scipy.stats.spearmanr(x, y)
            assert ours_rho == pytest.approx(float(theirs.statistic), abs=1e-12)
            if abs(ours_rho) < 1:
                assert ours_p == pytest.approx(float(theirs.pvalue), abs=1e-9)


class TestRocAuc:
    def test_perfect_separation(self):
        assert roc_auc([0.9, 0.8, 0.1], [1, 1, 0]) == pytest.approx(100.0)

    def test_all_scores_equal(self):
        assert roc_auc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0]) == pytest.approx(50.0)

    def test_concordant_example(self):
        assert roc_auc([0.9, 0.4, 0.6, 0.1], [1, 0, 1, 0]) == pytest.approx(100.0)

    def test_single_class_errors(self):
        with pytest.raises(ValidationError):
            roc_auc([0.4, 0.5], [1, 1])

    def test_pair_counting_oracle(self):
        rng = random.Random(7)
        for _ in range(150):
            n = rng.randint(2, 30)
            scores = [rng.choice([0.1, 0.2, 0.5, 0.5, 0.9]) for _ in range(n)]
            labels = [rng.randint(0, 1) for _ in range(n)]
            if sum(labels) in (0, n):
                continue
            concordant = ties = 0
            pos = [s for s, l in zip(scores, labels) if l == 1]
            neg = [s for s, l in zip(scores, labels) if l == 0]
            for sp in pos:
                for sn in neg:
                    if sp > sn:
                        concordant += 1
                    elif sp == sn:
                        ties += 1
            expected = 100.0 * (concordant + 0.5 * ties) / (len(pos) * len(neg))
            assert roc_auc(scores, labels) == pytest.approx(expected, abs=1e-9)

    def test_complement_sums_to_100(self):
        rng = random.Random(8)
        for _ in range(100):
            n = rng.randint(2, 40)
            scores = [rng.random() for _ in range(n)]
            labels = [rng.randint(0, 1) for _ in range(n)]
            if sum(labels) in (0, n):
                continue
            flipped = [1 - l for l in labels]
            assert roc_auc(scores, labels) + roc_auc(scores, flipped) == pytest.approx(
                100.0, abs=1e-9
            )

    def test_monotone_transform_invariance(self):
        rng = random.Random(9)
        for _ in range(50):
            n = rng.randint(3, 25)
            scores = [rng.random() for _ in range(n)]
            labels = [rng.randint(0, 1) for _ in range(n)]
            if sum(labels) in (0, n):
                continue
            transformed = [math.exp(3 * s) - 1 for s in scores]
            assert roc_auc(scores, labels) == pytest.approx(
                roc_auc(transformed, labels), abs=1e-9
            )


class TestMidranks:
    def test_ties_share_average(self):
        assert list(midranks([10, 20, 20, 30])) == [1.0, 2.5, 2.5, 4.0]

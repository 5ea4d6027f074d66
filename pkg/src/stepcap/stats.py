"""Significance testing and rank statistics.

Wilcoxon signed-rank (exact enumeration for small n, tie-corrected normal
approximation otherwise), the corrected resampled t-test for repeated random
train/test splits, their conservative max-p combination, Spearman rank
correlation, and ROC AUC with tie handling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

EXACT_WILCOXON_CUTOFF = 20
DEFAULT_TEST_FRAC = 0.1
DEFAULT_TRAIN_FRAC = 0.8
DEFAULT_ALPHA = 0.01


# ---------------------------------------------------------------------------
# distribution internals (own implementations; scipy is test-only oracle)
# ---------------------------------------------------------------------------


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the regularized incomplete beta (Lentz)."""
    eps, fpmin = 3e-16, 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """Two-sided p-value of a Student-t statistic."""
    if df <= 0:
        raise ValidationError("degrees of freedom must be positive")
    if not math.isfinite(t):
        return 0.0
    return betainc_reg(df / 2.0, 0.5, df / (df + t * t))


def midranks(values) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    arr = np.asarray(values, dtype=float)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(len(arr), dtype=float)
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


# ---------------------------------------------------------------------------
# significance tests
# ---------------------------------------------------------------------------


def wilcoxon_signed_rank(diffs, exact_cutoff: int = EXACT_WILCOXON_CUTOFF) -> float:
    """Two-sided Wilcoxon signed-rank p-value over paired differences.

    Zero differences are dropped; all-zero input carries no evidence and
    returns p = 1. With at most exact_cutoff nonzero differences the null is
    enumerated exactly over all sign assignments (midranks for ties);
    otherwise a tie-corrected normal approximation with continuity
    correction is used.
    """
    diffs = list(diffs)
    if not diffs:
        raise ValidationError("wilcoxon needs at least one difference")
    nonzero = [float(d) for d in diffs if d != 0.0]
    n = len(nonzero)
    if n == 0:
        return 1.0
    ranks = midranks([abs(d) for d in nonzero])
    w_plus = float(sum(r for r, d in zip(ranks, nonzero) if d > 0))
    if n <= exact_cutoff:
        return _wilcoxon_exact_p(ranks, w_plus)
    mu = n * (n + 1) / 4.0
    tie_counts = np.unique(ranks, return_counts=True)[1]
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(
        np.sum(tie_counts**3 - tie_counts)
    ) / 48.0
    if var <= 0:
        return 1.0
    dev = w_plus - mu
    z = (dev - 0.5 * np.sign(dev)) / math.sqrt(var) if dev != 0 else 0.0
    return min(1.0, 2.0 * normal_cdf(-abs(z)))


def _wilcoxon_exact_p(ranks: np.ndarray, w_plus: float) -> float:
    # distribution of W+ over all 2^n sign patterns; doubled ranks are ints
    doubled = np.rint(2.0 * ranks).astype(int)
    total = int(doubled.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for d in doubled:
        shifted = np.zeros_like(counts)
        shifted[d:] = counts[: total + 1 - d]
        counts = counts + shifted
    mu2 = total / 2.0
    dev_obs = abs(2.0 * w_plus - mu2)
    values = np.arange(total + 1, dtype=float)
    tail = counts[np.abs(values - mu2) >= dev_obs - 1e-9].sum()
    return float(tail / counts.sum())


def corrected_resampled_t(
    diffs,
    test_frac: float = DEFAULT_TEST_FRAC,
    train_frac: float = DEFAULT_TRAIN_FRAC,
) -> float:
    """Two-sided corrected resampled t-test over J per-fold differences.

    The variance term is inflated by the train/test overlap factor of
    repeated random resampling: t = mean / sqrt((1/J + test/train) * s^2),
    with J-1 degrees of freedom. Degenerate zero-variance input maps to
    p = 1 when the mean is zero, else p = 0.
    """
    arr = np.asarray(list(diffs), dtype=float)
    J = len(arr)
    if J < 2:
        raise ValidationError("corrected resampled t-test needs J >= 2 folds")
    dbar = float(arr.mean())
    s2 = float(arr.var(ddof=1))
    if s2 == 0.0:
        return 1.0 if dbar == 0.0 else 0.0
    t = dbar / math.sqrt((1.0 / J + test_frac / train_frac) * s2)
    return student_t_two_sided_p(t, J - 1)


@dataclass(frozen=True)
class SignificanceResult:
    """Paired-comparison outcome: both tests plus the conservative max rule."""

    wilcoxon_p: float
    corrected_t_p: float
    combined_p: float
    n: int
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if self.combined_p != max(self.wilcoxon_p, self.corrected_t_p):
            raise ValidationError("combined_p must be max(wilcoxon_p, corrected_t_p)")

    @property
    def significant(self) -> bool:
        return self.combined_p < self.alpha


def combined_significance(
    per_fold_scores_a,
    per_fold_scores_b,
    test_frac: float = DEFAULT_TEST_FRAC,
    train_frac: float = DEFAULT_TRAIN_FRAC,
    alpha: float = DEFAULT_ALPHA,
    segment_scores_a=None,
    segment_scores_b=None,
) -> SignificanceResult:
    """Run both tests on A - B and keep whichever p-value is larger.

    By default both tests pair per-fold scores (n = J). Passing per-segment
    score arrays switches the Wilcoxon test to segment-level pairing; the
    corrected resampled t-test always stays fold-level, since it is defined
    over train/test resamples.
    """
    a = list(per_fold_scores_a)
    b = list(per_fold_scores_b)
    if len(a) != len(b):
        raise ValidationError("per-fold score lists must have equal length")
    fold_diffs = [x - y for x, y in zip(a, b)]
    if segment_scores_a is not None or segment_scores_b is not None:
        sa = list(segment_scores_a or ())
        sb = list(segment_scores_b or ())
        if len(sa) != len(sb) or not sa:
            raise ValidationError("segment score lists must be non-empty, equal length")
        wilcoxon_diffs = [x - y for x, y in zip(sa, sb)]
    else:
        wilcoxon_diffs = fold_diffs
    wilcoxon_p = wilcoxon_signed_rank(wilcoxon_diffs)
    corrected_p = corrected_resampled_t(fold_diffs, test_frac, train_frac)
    return SignificanceResult(
        wilcoxon_p=wilcoxon_p,
        corrected_t_p=corrected_p,
        combined_p=max(wilcoxon_p, corrected_p),
        n=len(wilcoxon_diffs),
        alpha=alpha,
    )


# ---------------------------------------------------------------------------
# rank statistics
# ---------------------------------------------------------------------------


def spearman(x, y) -> tuple[float, float]:
    """Spearman rho (Pearson correlation of midranks) and its two-sided
    p-value from the t approximation."""
    xs = np.asarray(list(x), dtype=float)
    ys = np.asarray(list(y), dtype=float)
    if len(xs) != len(ys):
        raise ValidationError("spearman inputs must have equal length")
    n = len(xs)
    if n < 3:
        raise ValidationError("spearman needs at least 3 pairs")
    rx = midranks(xs)
    ry = midranks(ys)
    sx = rx - rx.mean()
    sy = ry - ry.mean()
    denom = math.sqrt(float(sx @ sx) * float(sy @ sy))
    if denom == 0.0:
        raise ValidationError("spearman undefined for a constant input")
    rho = float(sx @ sy) / denom
    rho = max(-1.0, min(1.0, rho))
    if abs(rho) == 1.0:
        return rho, 0.0
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    return rho, student_t_two_sided_p(t, n - 2)


def roc_auc(scores, labels) -> float:
    """ROC AUC on a 0-100 scale: (concordant + 0.5 ties) / (pos * neg).

    Requires at least one positive and one negative label.
    """
    sc = np.asarray(list(scores), dtype=float)
    lb = np.asarray(list(labels))
    if len(sc) != len(lb):
        raise ValidationError("scores and labels must have equal length")
    if not set(np.unique(lb)).issubset({0, 1}):
        raise ValidationError("labels must be 0 or 1")
    n_pos = int(np.sum(lb == 1))
    n_neg = int(np.sum(lb == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("roc_auc needs both classes present")
    ranks = midranks(sc)
    rank_sum_pos = float(ranks[lb == 1].sum())
    auc = (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
    return 100.0 * auc

"""Rank-based statistics used in the cohort evaluations.

Kendall tau-b, Wilcoxon rank-sum (exact for small untied samples, normal
approximation with tie and continuity corrections otherwise),
Kruskal-Wallis, and the OLS slope test.  Two-sided p-values throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .errors import ArgumentError, DegenerateError


@dataclass(frozen=True)
class RankTestResult:
    statistic: float
    p_value: float
    method: str


def kendall_tau(x, y) -> float:
    """Tie-corrected Kendall rank correlation (tau-b).

    Pair counts are kept as integers so perfectly concordant inputs give
    exactly 1.0 (and -1.0 for reversed ones), ties included.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ArgumentError("x and y must be vectors of equal length")
    n = x.size
    if n < 2:
        raise ArgumentError("need at least 2 observations")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateError("kendall_tau undefined when a vector is all ties")
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    s = int(np.sum(dx * dy)) // 2  # concordant minus discordant over i < j
    n0 = n * (n - 1) // 2
    n1 = (int(np.sum(dx == 0)) - n) // 2  # pairs tied in x
    n2 = (int(np.sum(dy == 0)) - n) // 2
    return float(s / np.sqrt(float(n0 - n1) * float(n0 - n2)))


def _u_counts(n_a: int, n_b: int) -> np.ndarray:
    """Null distribution of the Mann-Whitney U statistic (counts per value).

    c(m, n, u) = c(m-1, n, u-n) + c(m, n-1, u): the largest observation is
    either from the first sample (beating all n of the second) or from the
    second (beating none).
    """
    max_u = n_a * n_b
    c = np.zeros((n_b + 1, max_u + 1))
    c[:, 0] = 1.0  # m = 0
    for _ in range(n_a):
        new = np.zeros_like(c)
        new[0, 0] = 1.0  # n = 0
        for n in range(1, n_b + 1):
            new[n, n:] = c[n, : max_u + 1 - n]
            new[n] += new[n - 1]
        c = new
    return c[n_b]


def wilcoxon_rank_sum(a, b, continuity: bool = True) -> RankTestResult:
    """Two-sample rank-sum test; statistic is the Mann-Whitney U of ``a``.

    Uses the exact U distribution when the combined sample has at most 20
    observations and no ties; otherwise the normal approximation with tie
    correction (and a continuity correction when requested).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ArgumentError("both groups must be non-empty")
    n_a, n_b = a.size, b.size
    pooled = np.concatenate([a, b])
    ranks = sps.rankdata(pooled)
    w = float(ranks[:n_a].sum())
    u = w - n_a * (n_a + 1) / 2.0

    _, tie_counts = np.unique(pooled, return_counts=True)
    has_ties = bool(np.any(tie_counts > 1))

    if n_a + n_b <= 20 and not has_ties:
        counts = _u_counts(n_a, n_b)
        total = counts.sum()
        ui = int(round(u))
        p_low = counts[: ui + 1].sum() / total
        p_high = counts[ui:].sum() / total
        p = min(1.0, 2.0 * min(p_low, p_high))
        return RankTestResult(statistic=u, p_value=float(p), method="wilcoxon-exact")

    n = n_a + n_b
    mean_u = n_a * n_b / 2.0
    tie_term = float(np.sum(tie_counts**3 - tie_counts)) / (n * (n - 1))
    var_u = n_a * n_b / 12.0 * ((n + 1) - tie_term)
    method = "wilcoxon-normal" + ("-cc" if continuity else "")
    if var_u <= 0:
        return RankTestResult(statistic=u, p_value=1.0, method=method)
    diff = u - mean_u
    if continuity and diff != 0:
        diff -= 0.5 * np.sign(diff)
    z = diff / np.sqrt(var_u)
    p = float(2.0 * sps.norm.sf(abs(z)))
    return RankTestResult(statistic=u, p_value=min(p, 1.0), method=method)


def kruskal_wallis(groups) -> RankTestResult:
    """Kruskal-Wallis H with tie correction; chi-squared p on (groups - 1) df."""
    groups = [np.asarray(g, dtype=float) for g in groups]
    if len(groups) < 2:
        raise ArgumentError("need at least 2 groups")
    if any(g.size == 0 for g in groups):
        raise ArgumentError("groups must be non-empty")
    pooled = np.concatenate(groups)
    n = pooled.size
    ranks = sps.rankdata(pooled)
    h = 0.0
    start = 0
    for g in groups:
        r = ranks[start:start + g.size]
        h += r.sum() ** 2 / g.size
        start += g.size
    h = 12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)
    _, tie_counts = np.unique(pooled, return_counts=True)
    correction = 1.0 - float(np.sum(tie_counts**3 - tie_counts)) / (n**3 - n)
    if correction <= 0:
        # every observation identical
        return RankTestResult(statistic=0.0, p_value=1.0, method="kruskal-wallis-chi2")
    h /= correction
    p = float(sps.chi2.sf(h, df=len(groups) - 1))
    return RankTestResult(statistic=float(h), p_value=p, method="kruskal-wallis-chi2")


def linear_trend(x, y) -> tuple:
    """OLS slope of y on x and the two-sided t-test p-value on the slope."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ArgumentError("x and y must be vectors of equal length")
    if x.size < 3:
        raise ArgumentError("need at least 3 observations")
    if np.all(x == x[0]):
        raise DegenerateError("slope undefined for constant x")
    fit = sps.linregress(x, y)
    return float(fit.slope), float(fit.pvalue)

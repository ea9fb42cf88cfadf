from __future__ import annotations

import math

import numpy as np
from scipy import stats as _st


def ks_two_sample(x, y):
    """Two-sample KS statistic with the asymptotic Kolmogorov p-value."""
    res = _st.ks_2samp(np.asarray(x), np.asarray(y), method="asymp")
    return float(res.statistic), float(res.pvalue)


def ks_exponential(x, rate: float):
    """One-sample KS distance of x from Exponential(rate)."""
    res = _st.kstest(np.asarray(x), "expon", args=(0.0, 1.0 / rate), method="asymp")
    return float(res.statistic), float(res.pvalue)


def mean_se(x):
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return float(x.mean()), float("nan")
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def bootstrap_median(x, rng, resamples: int = 200):
    """Sample median and its bootstrap standard error."""
    x = np.asarray(x, dtype=float)
    idx = rng.integers(0, x.size, size=(resamples, x.size))
    meds = np.median(x[idx], axis=1)
    return float(np.median(x)), float(meds.std(ddof=1))


def quantile_coupled_l1(a, b) -> float:
    """Expected d' between rows of a and b under the per-rank quantile coupling.

    a and b hold top-m weights as rows. Rank by rank the two marginals are
    paired quantile to quantile, and the mean absolute gaps are summed over
    ranks.
    """
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape[0] == b.shape[0]:
        qa, qb = np.sort(a, axis=0), np.sort(b, axis=0)
    else:
        levels = (np.arange(min(a.shape[0], b.shape[0])) + 0.5) / min(a.shape[0], b.shape[0])
        qa, qb = np.quantile(a, levels, axis=0), np.quantile(b, levels, axis=0)
    return float(np.abs(qa - qb).mean(axis=0).sum())


def linear_fit(x, y):
    """Least-squares slope, intercept and R^2."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2

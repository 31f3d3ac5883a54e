"""Summary statistics for per-sample digit scores.

All functions accept array-like inputs and ignore non-finite entries.
Return float values; return NaN when there are not enough valid samples.
"""

from typing import Dict, Sequence, Tuple

import numpy as np
from scipy import stats

import config


def _finite(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return values[np.isfinite(values)]


def mean(values) -> float:
    values = _finite(values)
    if values.size == 0:
        return float("nan")
    return float(np.mean(values))


def sd(values) -> float:
    """Sample standard deviation (ddof=1); 0.0 for a single value."""
    values = _finite(values)
    if values.size == 0:
        return float("nan")
    if values.size == 1:
        return 0.0
    return float(np.std(values, ddof=1))


def quantiles(values, levels: Sequence[float] = config.QUANTILES) -> Dict[str, float]:
    values = _finite(values)
    if values.size == 0:
        return {f"{q:g}": float("nan") for q in levels}
    return {f"{q:g}": float(v) for q, v in zip(levels, np.quantile(values, levels))}


def binomial_sigma(p: float, n: int) -> float:
    """Standard error of an empirical frequency with true value p over n draws."""
    if n <= 0:
        return float("nan")
    return float(np.sqrt(p * (1.0 - p) / n))


def ks_normal(values) -> Tuple[float, float]:
    """Kolmogorov-Smirnov distance to N(0, 1) and its p-value."""
    values = _finite(values)
    if values.size < 2:
        return float("nan"), float("nan")
    result = stats.kstest(values, "norm")
    return float(result.statistic), float(result.pvalue)


def all_stats(values) -> Dict[str, object]:
    ks_stat, ks_pvalue = ks_normal(values)
    return {
        "count": int(_finite(values).size),
        "mean": mean(values),
        "sd": sd(values),
        "quantiles": quantiles(values),
        "ks_statistic": ks_stat,
        "ks_pvalue": ks_pvalue,
    }

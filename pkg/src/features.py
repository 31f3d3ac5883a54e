"""Derived per-sample columns for digit statistics.

One row per sampled digit sequence, read at depth n:

* ``p_n``        the n-th digit (an exact integer, object dtype)
* ``log_p_n``    natural log of p_n, computed by mpmath at
                 ``config.LOG_PRECISION_BITS`` bits and rounded to float
* ``score``      (log p_n - n) / sqrt(n); approximately N(0, 1) for large n
                 when phi_n = x(n) (Renyi-type central limit)
* ``growth``     log p_n / n; tends to 1 for the same programs
* ``lil``        (log p_n - n) / sqrt(2 n log log n), descriptive only
* ``gap``        p_n - r_{n-1}, how far the digit sits above its minimum - 1

Frequency runs add ``log_geometric_mean``, (1/m) log(p_1 ... p_m) over the
first m digits; for constant rules it tends to the log of a Khintchine-type
constant.

Every column is recomputed from the digits, never stored independently.
"""

from typing import List, Sequence

import mpmath
import numpy as np
import pandas as pd

import config
from expansion import DigitSeq

ROW_COLUMNS = ["sample", "seed_offset", "n", "p_n", "log_p_n", "score", "growth", "lil", "gap"]


def log_digit(p: int) -> mpmath.mpf:
    with mpmath.workprec(config.LOG_PRECISION_BITS):
        return mpmath.log(mpmath.mpf(p))


def growth_exponent(row: DigitSeq) -> List[mpmath.mpf]:
    """(1/n) log p_n for n = 1..k, at config.LOG_PRECISION_BITS bits."""
    digits = getattr(row, "digits", row)
    with mpmath.workprec(config.LOG_PRECISION_BITS):
        return [mpmath.log(mpmath.mpf(p)) / n for n, p in enumerate(digits, start=1)]


def gap_sequence(row: DigitSeq) -> List[int]:
    """g_n = p_n - r_{n-1} for n = 1..k; always >= 1."""
    return [p - r for p, r in zip(row.digits, row.r_values)]


def log_geometric_mean(row: DigitSeq, m: int) -> float:
    digits = getattr(row, "digits", row)[:m]
    with mpmath.workprec(config.LOG_PRECISION_BITS):
        return float(mpmath.fsum(mpmath.log(mpmath.mpf(p)) for p in digits) / m)


def score(p: int, n: int) -> float:
    with mpmath.workprec(config.LOG_PRECISION_BITS):
        return float((mpmath.log(mpmath.mpf(p)) - n) / mpmath.sqrt(n))


def lil_ratio(p: int, n: int) -> float:
    if n < 3:
        return float("nan")
    with mpmath.workprec(config.LOG_PRECISION_BITS):
        scale = mpmath.sqrt(2 * n * mpmath.log(mpmath.log(n)))
        return float((mpmath.log(mpmath.mpf(p)) - n) / scale)


def build_row_frame(draws: Sequence, n: int) -> pd.DataFrame:
    """One row per draw (``sampling.SampleDraw``), derived columns at depth n."""
    records = []
    for draw in draws:
        seq = draw.seq
        p = seq.digits[n - 1]
        log_p = log_digit(p)
        records.append({
            "sample": draw.index,
            "seed_offset": draw.index,
            "n": n,
            "p_n": p,
            "log_p_n": float(log_p),
            "score": score(p, n),
            "growth": float(log_p / n),
            "lil": lil_ratio(p, n),
            "gap": p - seq.r_values[n - 1],
        })
    frame = pd.DataFrame.from_records(records, columns=ROW_COLUMNS)
    frame["p_n"] = frame["p_n"].astype(object)
    frame["gap"] = frame["gap"].astype(object)
    return frame


def digit_matrix(draws: Sequence, positions: Sequence[int]) -> np.ndarray:
    """Digits at the requested 1-based positions, one row per draw, as objects."""
    return np.array(
        [[draw.seq.digits[k - 1] for k in positions] for draw in draws], dtype=object
    )

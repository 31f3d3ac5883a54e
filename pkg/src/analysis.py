"""Statistics over sampled digit sequences.

Experiments (each a ``Experiment`` subclass, run on its own or through an
``ExperimentRunner``):

* ``RenyiProfileExperiment``    distribution of (log p_n - n)/sqrt(n) and
  (1/n) log p_n at a fixed depth n, with descriptive LIL ratios and a
  Kolmogorov-Smirnov distance to N(0, 1)
* ``DigitFrequencyExperiment``  per-position digit frequencies against the
  exact per-position law, pooled across positions, and the mean log geometric
  mean of the digits against its limit for constant rules
* ``DigitLawExperiment``        a single-position digit law (see
  ``transport.mc_digit_law``)

Alternating-side rows come from transported uniform samples by default, so
with the same seed a Pierce run reproduces the Modified Engel rows digit
for digit.
"""

from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import mpmath
import pandas as pd

import config
import metrics
from exceptions import ValidationError
from expansion import Side
from features import build_row_frame, digit_matrix, growth_exponent, log_geometric_mean
from logger import setup_logger
from phi import PhiProgram
from sampling import SampleDraw, SamplingMode, sample_rows
from transport import ExactLaw, exact_digit_law, mc_digit_law

logger = setup_logger(__name__)

__all__ = [
    "Experiment", "ExperimentRunner", "RenyiProfileExperiment", "DigitFrequencyExperiment",
    "DigitLawExperiment", "RenyiReport", "FrequencyReport", "GeometricMeanConstant",
    "renyi_profile", "digit_frequency", "geometric_mean_constant", "growth_exponent",
]


# ============================================================================
# RENYI PROFILE
# ============================================================================
@dataclass
class RenyiReport:
    side: Side
    n: int
    samples: int
    bits: int
    seed: int
    mode: SamplingMode
    frame: pd.DataFrame = field(repr=False)
    draws: List[SampleDraw] = field(repr=False, default_factory=list)

    @property
    def score_stats(self) -> Dict[str, object]:
        return metrics.all_stats(self.frame["score"])

    @property
    def growth_mean(self) -> float:
        return metrics.mean(self.frame["growth"])

    @property
    def score_tolerance(self) -> float:
        """config.SIGMA_BAND standard errors of the mean score."""
        return config.SIGMA_BAND * metrics.sd(self.frame["score"]) / self.samples ** 0.5

    def to_dict(self) -> dict:
        stats = self.score_stats
        lil = self.frame["lil"]
        lo, hi = config.RENYI_GROWTH_BAND
        return {
            "experiment": "renyi",
            "side": self.side.value,
            "n": self.n,
            "samples": self.samples,
            "bits": self.bits,
            "seed": self.seed,
            "sampling": self.mode.value,
            "score": stats,
            "growth_mean": self.growth_mean,
            "lil_max": float(lil.max()) if self.n >= 3 else None,
            "lil_min": float(lil.min()) if self.n >= 3 else None,
            "score_tolerance": self.score_tolerance,
            "bands": {
                "score_mean": config.RENYI_SCORE_BAND,
                "growth_mean": [lo, hi],
                "score_mean_ok": abs(stats["mean"]) <= config.RENYI_SCORE_BAND,
                "growth_mean_ok": lo <= self.growth_mean <= hi,
            },
        }


def renyi_profile(program: PhiProgram, side: Union[Side, str], n: int, samples: int,
                  bits: int = 4096, seed: int = config.DEFAULT_SEED,
                  mode: Union[SamplingMode, str] = SamplingMode.TRANSPORT,
                  threads: int = 1) -> RenyiReport:
    """
    Sample ``samples`` digit rows to depth n and summarise log p_n.

    Args:
        program (PhiProgram): Usually modified-engel (positive side) or
            pierce (alternating side)
        n (int): Depth, n >= 2
        bits (int): Random bits per draw before refinement

    Returns:
        RenyiReport: summary plus the per-sample frame
            (sample, seed_offset, n, p_n, log_p_n, score, growth, lil, gap)

    Raises:
        ValidationError: n < 2
    """
    if n < 2:
        raise ValidationError(f"Renyi profile needs n >= 2, got {n}")
    side = Side.parse(side)
    mode = SamplingMode(mode)
    draws = sample_rows(program, side, n, samples, bits, seed, mode, threads,
                        max_digit_bits=config.STATS_MAX_DIGIT_BITS)
    frame = build_row_frame(draws, n)
    logger.info(f"Renyi profile {program.label}/{side.value} n={n}: "
                f"mean score {metrics.mean(frame['score']):.4f}")
    return RenyiReport(side, n, samples, bits, seed, mode, frame, draws)


# ============================================================================
# DIGIT FREQUENCIES
# ============================================================================
@dataclass(frozen=True)
class GeometricMeanConstant:
    """log K for a constant rule r, bracketed by a partial sum and a tail bound."""
    r: int
    terms: int
    log_lower: float
    log_upper: float

    @property
    def value(self) -> float:
        return float(mpmath.exp((mpmath.mpf(self.log_lower) + self.log_upper) / 2))

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "terms": self.terms,
            "log_lower": self.log_lower,
            "log_upper": self.log_upper,
            "value": self.value,
        }


def geometric_mean_constant(program: PhiProgram,
                            terms: int = config.GEOMETRIC_MEAN_TERMS) -> Optional[GeometricMeanConstant]:
    """
    Almost-sure limit of (p_1 ... p_m)^(1/m) when phi_n is a constant r.

    log K = sum over c > r of log c * r / ((c-1) c). The sum is cut at
    M = max(terms, r + 2, 3); log t / ((t-1) t) decreases for t >= 2, so the
    rest is at most r (log M + 1) / (M - 1).

    Returns None for rules that are not constant.
    """
    r = program.constant_value()
    if r is None:
        return None
    m = max(terms, r + 2, 3)
    with mpmath.workprec(config.LOG_PRECISION_BITS):
        partial = mpmath.fsum(mpmath.log(c) * r / ((c - 1) * c) for c in range(r + 1, m + 1))
        bound = r * (mpmath.log(m) + 1) / (m - 1)
        return GeometricMeanConstant(r, m, float(partial), float(partial + bound))


@dataclass
class FrequencyReport:
    side: Side
    positions: Tuple[int, ...]
    samples: int
    bits: int
    seed: int
    mode: SamplingMode
    max_digit: int
    counts: Dict[int, Dict[int, int]]
    exact: Dict[int, Optional[ExactLaw]]
    log_geometric_means: List[float] = field(repr=False, default_factory=list)
    geometric_constant: Optional[GeometricMeanConstant] = None

    def _digits(self) -> range:
        return range(2, self.max_digit + 1)

    def frequency(self, position: int, digit: int) -> Fraction:
        return Fraction(self.counts[position].get(digit, 0), self.samples)

    def tail(self, position: int) -> Fraction:
        tracked = sum(self.counts[position].get(c, 0) for c in self._digits())
        return Fraction(self.samples - tracked, self.samples)

    def pooled(self, digit: int) -> Fraction:
        total = sum(self.counts[k].get(digit, 0) for k in self.positions)
        return Fraction(total, self.samples * len(self.positions))

    def pooled_exact(self, digit: int) -> Optional[Fraction]:
        laws = [self.exact[k] for k in self.positions]
        if any(law is None for law in laws):
            return None
        return sum((law.probabilities[digit] for law in laws), Fraction(0)) / len(laws)

    def flagged(self) -> List[Tuple[int, int]]:
        """(position, digit) pairs outside the config.SIGMA_BAND band."""
        out = []
        for k in self.positions:
            law = self.exact[k]
            if law is None:
                continue
            for c in self._digits():
                p = float(law.probabilities[c])
                deviation = abs(float(self.frequency(k, c)) - p)
                if deviation > config.SIGMA_BAND * metrics.binomial_sigma(p, self.samples) + 1e-12:
                    out.append((k, c))
        return out

    @property
    def log_geometric_mean(self) -> float:
        """Sample mean of (1/m) log(p_1 ... p_m), m the deepest position."""
        return metrics.mean(self.log_geometric_means)

    def table(self) -> pd.DataFrame:
        rows = []
        for k in self.positions:
            law = self.exact[k]
            for c in self._digits():
                rows.append({
                    "position": k,
                    "digit": c,
                    "empirical": float(self.frequency(k, c)),
                    "exact": float(law.probabilities[c]) if law else None,
                })
        return pd.DataFrame(rows, columns=["position", "digit", "empirical", "exact"])

    def to_dict(self) -> dict:
        per_position = []
        for k in self.positions:
            law = self.exact[k]
            per_position.append({
                "position": k,
                "frequencies": {str(c): float(self.frequency(k, c)) for c in self._digits()},
                "tail": float(self.tail(k)),
                "exact": ({str(c): float(law.probabilities[c]) for c in self._digits()}
                          if law else None),
                "exact_tail": float(law.tail) if law else None,
            })
        pooled_exact = {str(c): self.pooled_exact(c) for c in self._digits()}
        return {
            "experiment": "frequency",
            "side": self.side.value,
            "positions": list(self.positions),
            "samples": self.samples,
            "bits": self.bits,
            "seed": self.seed,
            "sampling": self.mode.value,
            "max_digit": self.max_digit,
            "per_position": per_position,
            "pooled": {str(c): float(self.pooled(c)) for c in self._digits()},
            "pooled_exact": {c: (float(v) if v is not None else None) for c, v in pooled_exact.items()},
            "sigma_band": config.SIGMA_BAND,
            "flagged": [list(pair) for pair in self.flagged()],
            "geometric_mean": {
                "depth": self.positions[-1],
                "log_mean": self.log_geometric_mean,
                "log_sd": metrics.sd(self.log_geometric_means),
                "exact": self.geometric_constant,
            },
        }


def digit_frequency(program: PhiProgram, side: Union[Side, str], positions: Sequence[int],
                    samples: int, bits: int = config.DEFAULT_BITS,
                    seed: int = config.DEFAULT_SEED,
                    max_digit: int = config.LAW_MAX_DIGIT,
                    mode: Union[SamplingMode, str] = SamplingMode.TRANSPORT,
                    threads: int = 1) -> FrequencyReport:
    """
    Per-position digit frequencies over digits 2..max_digit.

    Raises:
        ValidationError: no positions, a position < 1, or more than
            config.MAX_POSITIONS positions
    """
    positions = tuple(sorted(set(positions)))
    if not positions or positions[0] < 1:
        raise ValidationError(f"positions must be >= 1, got {list(positions)}")
    if len(positions) > config.MAX_POSITIONS or positions[-1] > config.MAX_POSITIONS:
        raise ValidationError(f"at most {config.MAX_POSITIONS} positions, up to {config.MAX_POSITIONS}")
    side = Side.parse(side)
    mode = SamplingMode(mode)

    draws = sample_rows(program, side, positions[-1], samples, bits, seed, mode, threads,
                        max_digit_bits=config.STATS_MAX_DIGIT_BITS)
    matrix = digit_matrix(draws, positions)
    counts = {k: dict(Counter(matrix[:, j].tolist())) for j, k in enumerate(positions)}
    exact = {k: exact_digit_law(program, k, max_digit) for k in positions}
    depth = positions[-1]
    log_means = [log_geometric_mean(draw.seq, depth) for draw in draws]
    report = FrequencyReport(side, positions, samples, bits, seed, mode, max_digit, counts, exact,
                             log_means, geometric_mean_constant(program))
    if report.flagged():
        logger.warning(f"Frequencies outside the {config.SIGMA_BAND}-sigma band: {report.flagged()}")
    return report


# ============================================================================
# EXPERIMENTS
# ============================================================================
class Experiment(ABC):
    @abstractmethod
    def run(self): ...


class RenyiProfileExperiment(Experiment):
    def __init__(self, program: PhiProgram, side, n: int = 40, samples: int = 200,
                 bits: int = 4096, seed: int = config.DEFAULT_SEED,
                 mode=SamplingMode.TRANSPORT, threads: int = 1):
        self.program = program
        self.side = side
        self.n = n
        self.samples = samples
        self.bits = bits
        self.seed = seed
        self.mode = mode
        self.threads = threads

    def run(self) -> RenyiReport:
        return renyi_profile(self.program, self.side, self.n, self.samples, self.bits,
                             self.seed, self.mode, self.threads)


class DigitFrequencyExperiment(Experiment):
    def __init__(self, program: PhiProgram, side, positions: Sequence[int] = tuple(range(1, 9)),
                 samples: int = 10_000, bits: int = config.DEFAULT_BITS,
                 seed: int = config.DEFAULT_SEED, max_digit: int = config.LAW_MAX_DIGIT,
                 mode=SamplingMode.TRANSPORT, threads: int = 1):
        self.program = program
        self.side = side
        self.positions = positions
        self.samples = samples
        self.bits = bits
        self.seed = seed
        self.max_digit = max_digit
        self.mode = mode
        self.threads = threads

    def run(self) -> FrequencyReport:
        return digit_frequency(self.program, self.side, self.positions, self.samples,
                               self.bits, self.seed, self.max_digit, self.mode, self.threads)


class DigitLawExperiment(Experiment):
    def __init__(self, program: PhiProgram, side, position: int = 1, samples: int = 10_000,
                 bits: int = config.DEFAULT_BITS, seed: int = config.DEFAULT_SEED,
                 mode=SamplingMode.TRANSPORT, max_digit: int = config.LAW_MAX_DIGIT,
                 threads: int = 1):
        self.program = program
        self.side = side
        self.position = position
        self.samples = samples
        self.bits = bits
        self.seed = seed
        self.mode = mode
        self.max_digit = max_digit
        self.threads = threads

    def run(self):
        return mc_digit_law(self.program, self.side, self.position, self.samples, self.bits,
                            self.seed, self.mode, self.max_digit, self.threads)


class ExperimentRunner:
    def __init__(self):
        self.experiments: List[Experiment] = []

    def add_experiment(self, experiment: Experiment):
        self.experiments.append(experiment)

    def run_all(self) -> dict:
        """Run every experiment; a failing one is logged and recorded by its message."""
        results = {}
        seen = Counter()
        for experiment in self.experiments:
            name = experiment.__class__.__name__
            seen[name] += 1
            if seen[name] > 1:
                name = f"{name}_{seen[name]}"
            try:
                results[name] = experiment.run()
            except Exception as e:
                logger.error(f"Error in {name}: {e}")
                results[name] = e
        return results

import math
from fractions import Fraction

import mpmath
import pytest

import config
import metrics
from analysis import (
    DigitLawExperiment, ExperimentRunner, RenyiProfileExperiment, digit_frequency,
    geometric_mean_constant, renyi_profile,
)
from exceptions import ValidationError
from expansion import DigitSeq, validate_digits
from features import (
    ROW_COLUMNS, gap_sequence, growth_exponent, lil_ratio, log_geometric_mean, score,
)
from phi import builtin_family, parse_phi_spec


class TestFeatures:
    def test_growth_exponent(self):
        values = growth_exponent([2] * 10)
        assert len(values) == 10
        assert all(isinstance(v, mpmath.mpf) for v in values)
        assert float(values[-1]) == pytest.approx(math.log(2) / 10)

    def test_gap_sequence(self, pierce):
        assert gap_sequence(DigitSeq.build(pierce, [2, 3, 5])) == [1, 1, 2]

    def test_log_geometric_mean(self):
        assert log_geometric_mean([2, 8, 100], 2) == pytest.approx(math.log(4))

    def test_score(self):
        assert score(1, 4) == pytest.approx(-2.0)
        assert score(10**30, 40) == pytest.approx((30 * math.log(10) - 40) / math.sqrt(40))

    def test_lil_needs_three(self):
        assert math.isnan(lil_ratio(5, 2))
        assert not math.isnan(lil_ratio(5, 3))


class TestMetrics:
    def test_mean_ignores_non_finite(self):
        assert metrics.mean([1.0, float("nan"), 3.0]) == 2.0

    def test_sd(self):
        assert metrics.sd([5.0]) == 0.0
        assert math.isnan(metrics.sd([]))
        assert metrics.sd([1.0, 3.0]) == pytest.approx(math.sqrt(2))

    def test_quantiles(self):
        result = metrics.quantiles(range(101))
        assert len(result) == len(config.QUANTILES)
        assert result["0.5"] == 50.0

    def test_ks_needs_two_values(self):
        assert all(math.isnan(v) for v in metrics.ks_normal([0.3]))

    def test_binomial_sigma(self):
        assert metrics.binomial_sigma(0.5, 100) == pytest.approx(0.05)


class TestRenyiProfile:
    def test_frame(self, modified_engel):
        report = renyi_profile(modified_engel, "pos", 10, 20, bits=256, seed=1)
        assert list(report.frame.columns) == ROW_COLUMNS
        assert len(report.frame) == 20
        for draw, row in zip(report.draws, report.frame.itertuples()):
            assert validate_digits(modified_engel, draw.digits, "pos").valid
            assert row.p_n == draw.digits[9]
            assert row.score == pytest.approx((math.log(row.p_n) - 10) / math.sqrt(10))
            assert row.growth == pytest.approx(math.log(row.p_n) / 10)

    def test_pierce_reproduces_modified_engel(self, pierce, modified_engel):
        alt = renyi_profile(pierce, "alt", 8, 15, bits=256, seed=2)
        pos = renyi_profile(modified_engel, "pos", 8, 15, bits=256, seed=2)
        assert alt.frame["p_n"].tolist() == pos.frame["p_n"].tolist()

    def test_needs_two_digits(self, pierce):
        with pytest.raises(ValidationError):
            renyi_profile(pierce, "alt", 1, 10)

    def test_report_dict(self, modified_engel):
        result = renyi_profile(modified_engel, "pos", 5, 10, bits=128).to_dict()
        assert result["experiment"] == "renyi"
        assert result["score"]["count"] == 10
        assert set(result["bands"]) == {"score_mean", "growth_mean", "score_mean_ok", "growth_mean_ok"}


class TestDigitFrequency:
    def test_luroth_positions(self, luroth):
        report = digit_frequency(luroth, "pos", [1, 2, 3], 3000, seed=4)
        assert report.flagged() == []
        for k in report.positions:
            total = sum(report.frequency(k, c) for c in range(2, report.max_digit + 1))
            assert total + report.tail(k) == 1
        assert report.pooled_exact(2) == Fraction(1, 2)

    def test_table(self, luroth):
        table = digit_frequency(luroth, "alt", [1, 2], 50).table()
        assert list(table.columns) == ["position", "digit", "empirical", "exact"]
        assert len(table) == 2 * (config.LAW_MAX_DIGIT - 1)

    @pytest.mark.parametrize("positions", [[], [0, 1], [config.MAX_POSITIONS + 1]])
    def test_rejects_positions(self, luroth, positions):
        with pytest.raises(ValidationError):
            digit_frequency(luroth, "alt", positions, 10)


class TestGeometricMean:
    def test_luroth_constant(self, luroth):
        constant = geometric_mean_constant(luroth)
        assert constant.r == 1
        assert constant.log_lower < constant.log_upper
        assert constant.log_upper - constant.log_lower < 1.1e-3
        assert math.exp(constant.log_lower) < 3.4698
        assert math.exp(constant.log_upper) > 3.4696
        assert constant.value == pytest.approx(3.4697, abs=5e-3)

    def test_larger_constant_rule(self):
        low = geometric_mean_constant(parse_phi_spec("1"))
        high = geometric_mean_constant(parse_phi_spec("2"))
        assert high.r == 2
        assert high.log_lower > low.log_lower

    def test_growing_rules_have_no_constant(self, pierce, sylvester):
        assert geometric_mean_constant(pierce) is None
        assert geometric_mean_constant(sylvester) is None

    def test_sampled_mean_approaches_the_constant(self, luroth):
        report = digit_frequency(luroth, "pos", range(1, 9), 2000, seed=6)
        assert len(report.log_geometric_means) == 2000
        assert report.geometric_constant == geometric_mean_constant(luroth)
        assert abs(report.log_geometric_mean - report.geometric_constant.log_upper) < 0.05
        summary = report.to_dict()["geometric_mean"]
        assert summary["depth"] == 8
        assert summary["log_mean"] == report.log_geometric_mean

    def test_no_constant_for_pierce(self, pierce):
        report = digit_frequency(pierce, "alt", [1, 2], 20)
        assert report.geometric_constant is None
        assert report.to_dict()["geometric_mean"]["exact"] is None


def test_runner_records_failures(luroth):
    runner = ExperimentRunner()
    runner.add_experiment(RenyiProfileExperiment(luroth, "alt", n=1, samples=5))
    runner.add_experiment(DigitLawExperiment(luroth, "alt", position=1, samples=20))
    results = runner.run_all()
    assert isinstance(results["RenyiProfileExperiment"], ValidationError)
    assert results["DigitLawExperiment"].samples == 20


def test_runner_keeps_repeated_experiments(luroth):
    runner = ExperimentRunner()
    runner.add_experiment(DigitLawExperiment(luroth, "alt", position=1, samples=10))
    runner.add_experiment(DigitLawExperiment(luroth, "alt", position=2, samples=10))
    results = runner.run_all()
    assert results["DigitLawExperiment"].position == 1
    assert results["DigitLawExperiment_2"].position == 2


@pytest.mark.slow
@pytest.mark.parametrize("family, side", [("modified-engel", "pos"), ("pierce", "alt")])
def test_renyi_acceptance(family, side):
    report = renyi_profile(builtin_family(family), side, 40, 200, bits=4096, seed=0)
    assert abs(metrics.mean(report.frame["score"])) <= config.RENYI_SCORE_BAND
    lo, hi = config.RENYI_GROWTH_BAND
    assert lo <= report.growth_mean <= hi
    bands = report.to_dict()["bands"]
    assert bands["score_mean_ok"] and bands["growth_mean_ok"]

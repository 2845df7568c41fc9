"""
Tests for location estimators and robustness reports.
"""

import math

import numpy as np
import pytest

from ..datasets import REFERENCE_TARGETS
from ..errors import DegenerateScaleError, InvalidInputError, NonConvergenceError
from ..estimators import (
    MAD_CONSISTENCY,
    check_reference,
    consensus_estimate,
    deviations_exceed_median,
    m_estimate,
    m_estimate_detailed,
    mad_scale,
    mean,
    median,
    psi,
    report_to_frame,
    robustness_report,
    weight,
)
from ..models import PsiFamily, PsiSpec

ALL_FAMILIES = list(PsiFamily)


class TestBasicEstimators:
    """Test mean, median and MAD."""

    def test_sensor_x(self, sensor_clean_samples, sensor_contaminated_samples):
        """Test mean and median of the x readings before and after contamination."""
        assert mean(sensor_clean_samples["x"]) == pytest.approx(2.0)
        assert median(sensor_clean_samples["x"]) == pytest.approx(2.0)
        assert mean(sensor_contaminated_samples["x"]) == pytest.approx(23 / 6)
        assert median(sensor_contaminated_samples["x"]) == pytest.approx(3.05)

    def test_sensor_y(self, sensor_contaminated_samples):
        """Test mean and median of the contaminated y readings."""
        assert mean(sensor_contaminated_samples["y"]) == pytest.approx(2.5)
        assert median(sensor_contaminated_samples["y"]) == pytest.approx(2.05)

    def test_mad_scale(self, sensor_contaminated_samples):
        """Test the normalized MAD."""
        assert mad_scale(sensor_contaminated_samples["x"]) == pytest.approx(1.10 / MAD_CONSISTENCY)

    def test_degenerate_mad(self):
        """Test that a majority tie has no scale."""
        with pytest.raises(DegenerateScaleError):
            mad_scale([1.0, 1.0, 1.0, 2.0])

    def test_empty_sample(self):
        """Test that empty samples are rejected."""
        with pytest.raises(InvalidInputError):
            mean([])
        with pytest.raises(InvalidInputError):
            median([])


class TestPsiAndWeight:
    """Test the psi families and their IRLS weights."""

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_psi_is_identity_near_zero(self, family):
        """Test psi(u) ~ u for small u."""
        spec = PsiSpec.default(family)
        u = np.array([-1e-4, 1e-4])
        assert psi(u, spec) == pytest.approx(u, rel=1e-6)

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_weight_at_zero_is_one(self, family):
        """Test the limit w(0) = 1."""
        assert float(weight(0.0, PsiSpec.default(family))) == 1.0

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_psi_is_odd(self, family):
        """Test psi(-u) = -psi(u)."""
        spec = PsiSpec.default(family)
        u = np.linspace(0.0, 12.0, 97)
        assert psi(-u, spec) == pytest.approx(-psi(u, spec))

    def test_huber_clips(self):
        """Test Huber psi clipping at k."""
        spec = PsiSpec(family=PsiFamily.HUBER, constants={"k": 1.5})
        assert list(psi([-3.0, 0.5, 3.0], spec)) == [-1.5, 0.5, 1.5]
        assert float(weight(3.0, spec)) == pytest.approx(0.5)

    def test_tukey_redescends(self):
        """Test that Tukey weights vanish beyond c."""
        spec = PsiSpec.default(PsiFamily.TUKEY)
        assert float(weight(4.7, spec)) == 0.0
        assert 0.0 < float(weight(2.0, spec)) < 1.0

    def test_hampel_weights(self):
        """Test the three Hampel regions with a=1.7, b=3.4, c=8.5."""
        spec = PsiSpec.default(PsiFamily.HAMPEL)
        values = weight([1.0, 2.0, -2.0, 5.0, 9.0], spec)
        assert values == pytest.approx([1.0, 0.85, 0.85, 1.7 * 3.5 / (5.1 * 5), 0.0])

    def test_hampel_continuous_at_b(self):
        """Test continuity of Hampel psi where the descent starts."""
        spec = PsiSpec.default(PsiFamily.HAMPEL)
        assert psi([3.4 - 1e-9, 3.4 + 1e-9], spec) == pytest.approx([1.7, 1.7])

    def test_andrews_conventions_agree(self):
        """Test that 'unit' with c = 1.339 matches the default 'pi' with c = 1.339 pi."""
        unit = PsiSpec(family=PsiFamily.ANDREWS, constants={"c": 1.339}, andrews_scale="unit")
        default = PsiSpec.default(PsiFamily.ANDREWS)
        u = np.linspace(-5.0, 5.0, 81)
        assert weight(u, unit) == pytest.approx(weight(u, default), abs=1e-12)

    def test_andrews_zero_outside_support(self):
        """Test that Andrews psi vanishes beyond c."""
        spec = PsiSpec.default(PsiFamily.ANDREWS)
        assert float(psi(1.339 * math.pi + 0.01, spec)) == 0.0


class TestMEstimate:
    """Test the iteratively reweighted M-estimates."""

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_symmetric_sample_gives_center(self, family):
        """Test that a symmetric sample is estimated at its center."""
        sample = [1.0, 2.0, 3.0, 4.0, 5.0, 9.0, -3.0]
        assert m_estimate(sample, PsiSpec.default(family)) == pytest.approx(3.0)

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_translation_equivariance(self, family, sensor_contaminated_samples):
        """Test estimate(x + c) = estimate(x) + c."""
        spec = PsiSpec.default(family)
        sample = sensor_contaminated_samples["x"]
        shifted = [v + 10.0 for v in sample]
        assert m_estimate(shifted, spec) == pytest.approx(m_estimate(sample, spec) + 10.0, abs=1e-8)

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_contaminated_estimate_between_median_and_mean(self, family, sensor_contaminated_samples):
        """Test that the sensor x estimates land between the median and the mean."""
        sample = sensor_contaminated_samples["x"]
        result = m_estimate_detailed(sample, PsiSpec.default(family))
        assert result.converged
        assert result.fallback is None
        assert median(sample) < result.location < mean(sample)

    def test_huber_with_large_k_is_the_mean(self):
        """Test that Huber with every |u| below k gives the mean."""
        spec = PsiSpec(family=PsiFamily.HUBER, constants={"k": 100.0})
        assert m_estimate([1.0, 2.0, 3.0, 10.0], spec) == pytest.approx(4.0)

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_scale_equivariance(self, family, sensor_contaminated_samples):
        """Test estimate(2x + 1) = 2 estimate(x) + 1."""
        spec = PsiSpec.default(family)
        sample = sensor_contaminated_samples["y"]
        scaled = [2.0 * v + 1.0 for v in sample]
        assert m_estimate(scaled, spec) == pytest.approx(2.0 * m_estimate(sample, spec) + 1.0, abs=1e-8)

    def test_zero_weights_fall_back_to_median(self):
        """Test the all-zero-weights fallback."""
        spec = PsiSpec(family=PsiFamily.TUKEY, constants={"c": 0.3})
        result = m_estimate_detailed([0.0, 1.0, 3.0, 4.0], spec)
        assert result.location == 2.0
        assert not result.converged
        assert result.fallback == "zero_weights"

    def test_zero_weights_strict(self):
        """Test that strict mode raises on all-zero weights."""
        spec = PsiSpec(family=PsiFamily.TUKEY, constants={"c": 0.3})
        with pytest.raises(NonConvergenceError):
            m_estimate_detailed([0.0, 1.0, 3.0, 4.0], spec, strict=True)

    def test_degenerate_scale_fallback(self):
        """Test that a zero MAD returns the median."""
        result = m_estimate_detailed([1.0, 1.0, 1.0, 2.0], PsiSpec.default(PsiFamily.HUBER))
        assert result.location == 1.0
        assert result.fallback == "degenerate_scale"
        with pytest.raises(DegenerateScaleError):
            m_estimate_detailed([1.0, 1.0, 1.0, 2.0], PsiSpec.default(PsiFamily.HUBER), strict=True)

    def test_iteration_cap(self, sensor_contaminated_samples):
        """Test that hitting the cap is reported without a fallback."""
        result = m_estimate_detailed(sensor_contaminated_samples["x"], PsiSpec.default(PsiFamily.HUBER), max_iter=1)
        assert result.iterations == 1
        assert not result.converged
        assert result.fallback is None


class TestConsensusEstimate:
    """Test the consensus point estimate of a sample."""

    def test_unaffected_by_contamination(self, sensor_clean_samples, sensor_contaminated_samples):
        """Test that the faulty readings do not move the consensus estimate."""
        for variable, center in (("x", 2.0), ("y", 1.0)):
            before = consensus_estimate(sensor_clean_samples[variable], 0.2)
            after = consensus_estimate(sensor_contaminated_samples[variable], 0.2)
            assert before == pytest.approx(center)
            assert after == before


class TestRobustnessReport:
    """Test the before/after report on the sensor data."""

    @pytest.fixture
    def report(self, sensor_clean_samples, sensor_contaminated_samples):
        return robustness_report(sensor_clean_samples, sensor_contaminated_samples, error=0.2)

    def test_row_order(self, report):
        """Test rows consensus, mean, median, then the four M-estimators."""
        names = [row.estimator for row in report.block("x").rows]
        assert names == ["consensus", "mean", "median", "huber", "tukey", "hampel", "andrews"]

    def test_clean_values_are_the_sensor_center(self, report):
        """Test that every estimator gives 2 for x and 1 for y on the clean sensors."""
        for variable, center in (("x", 2.0), ("y", 1.0)):
            for row in report.block(variable).rows:
                assert row.before == pytest.approx(center, abs=1e-9), row.estimator

    def test_identical_inputs_give_zero_deviations(self, sensor_contaminated_samples):
        """Test that an unchanged dataset moves nothing."""
        report = robustness_report(sensor_contaminated_samples, sensor_contaminated_samples, error=0.2)
        assert all(row.deviation == 0.0 for block in report.blocks for row in block.rows)

    def test_consensus_deviation_is_zero(self, report):
        """Test that only the consensus is untouched."""
        for variable in ("x", "y"):
            assert report.block(variable).row("consensus").deviation == 0.0

    def test_classical_values_match_reference(self, report):
        """Test consensus, mean and median against the reference values."""
        misses = check_reference(report, REFERENCE_TARGETS)
        missed = {(miss.variable, miss.estimator) for miss in misses}
        for variable in ("x", "y"):
            for estimator in ("consensus", "mean", "median"):
                assert (variable, estimator) not in missed

    def test_m_estimators_deviate_more_than_median(self, report):
        """Test that every M-estimator moved more than the median."""
        assert deviations_exceed_median(report)
        for variable in ("x", "y"):
            block = report.block(variable)
            assert block.row("median").deviation == pytest.approx(1.05)
            assert block.row("mean").deviation > 1.05

    def test_reference_misses_are_logged(self, report, log_messages):
        """Test that misses beyond tolerance are reported as warnings."""
        targets = {"x": {"mean": (2.0, 5.0)}}
        misses = check_reference(report, targets)
        assert len(misses) == 1
        assert misses[0].column == "after"
        assert any("reference miss" in message for message in log_messages)

    def test_unknown_estimator_skipped(self, report):
        """Test that targets for estimators not in the report are ignored."""
        assert check_reference(report, {"x": {"trimmed": (0.0, 0.0)}}) == []

    def test_variable_mismatch(self, sensor_clean_samples):
        """Test that clean and contaminated must have the same variables."""
        with pytest.raises(InvalidInputError):
            robustness_report(sensor_clean_samples, {"x": [1.0, 2.0, 3.0]})

    def test_per_variable_error(self, sensor_clean_samples, sensor_contaminated_samples):
        """Test a per-variable consensus error."""
        report = robustness_report(
            sensor_clean_samples, sensor_contaminated_samples, error={"x": 0.2, "y": 0.2},
        )
        assert report.block("y").row("consensus").after == pytest.approx(1.0)

    def test_frame(self, report):
        """Test the flattened report."""
        frame = report_to_frame(report)
        assert list(frame.columns) == ["variable", "estimator", "before", "after", "deviation"]
        assert len(frame) == 14
        assert list(frame["variable"].unique()) == ["x", "y"]

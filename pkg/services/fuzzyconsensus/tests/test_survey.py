"""
Tests for survey loading and analysis.
"""

import pytest

from ..errors import InvalidInputError, ParseError
from ..models import SurveyTable
from ..survey import (
    analyze_survey,
    load_survey,
    question_summary_frame,
    survey_estimator_comparison,
    verdicts_frame,
)
from ..synthetic import synthetic_survey


def _toy(grades):
    return SurveyTable(
        respondents=tuple(f"r{i + 1}" for i in range(len(grades))),
        questions=("Q1",),
        grades=tuple((g,) for g in grades),
    )


class TestLoadSurvey:
    """Test the grade matrix reader."""

    def test_reads_matrix_with_missing_answer(self):
        """Test labels, questions and a blank cell."""
        table = load_survey("respondent,q1,q2\na,1,7\nb,,4\n")
        assert table.respondents == ("a", "b")
        assert table.questions == ("q1", "q2")
        assert table.grades == ((1, 7), (None, 4))

    def test_out_of_scale(self):
        """Test that grades beyond the scale are located."""
        with pytest.raises(ParseError) as exc:
            load_survey("respondent,q1,q2\na,1,8\n")
        assert exc.value.row == 1
        assert exc.value.column == "q2"

    def test_custom_scale(self):
        """Test a 1-10 scale."""
        assert load_survey("respondent,q1\na,10\n", scale_max=10).grades == ((10,),)

    def test_non_integer(self):
        """Test that fractional grades are rejected."""
        with pytest.raises(ParseError) as exc:
            load_survey("respondent,q1\na,2.5\n")
        assert exc.value.column == "q1"

    def test_duplicate_respondent(self):
        """Test that respondent labels are unique."""
        with pytest.raises(ParseError):
            load_survey("respondent,q1\na,1\na,2\n")

    def test_no_questions(self):
        """Test a header with only the respondent column."""
        with pytest.raises(ParseError):
            load_survey("respondent\na\n")

    def test_short_row_located(self):
        """Test that a row with fewer fields than the header names the first missing question."""
        with pytest.raises(ParseError) as exc:
            load_survey("respondent,q1,q2\na,4,5\nb,4\n")
        assert exc.value.row == 2
        assert exc.value.column == "q2"

    def test_long_row_rejected(self):
        """Test that an extra field is not silently dropped."""
        with pytest.raises(ParseError) as exc:
            load_survey("respondent,q1\na,4\nb,4,5\n")
        assert exc.value.row == 2

    def test_hash_inside_label(self):
        """Test that only whole lines starting with # are comments."""
        table = load_survey("# exported\nrespondent,q1\nr#1,4\n  # note\nr2,5\n")
        assert table.respondents == ("r#1", "r2")
        assert table.grades == ((4,), (5,))


class TestAnalyzeSurvey:
    """Test respondent verdicts and the recomputed consensus."""

    def test_coherent_survey_flags_nobody(self, coherent_survey):
        """Test that a coherent group is left alone."""
        analysis = analyze_survey(coherent_survey)
        assert analysis.removed == ()
        assert all(v.out_of_consensus_fraction == 0.0 for v in analysis.verdicts)

    def test_random_respondents_flagged(self, contaminated_survey):
        """Test that respondents out of consensus on most questions are flagged."""
        analysis = analyze_survey(contaminated_survey)
        assert analysis.removed == ("R1", "R2", "R4")
        assert analysis.verdict("R1").out_of_consensus_fraction == 1.0
        assert analysis.verdict("R3").out_of_consensus_fraction == pytest.approx(3 / 9)
        assert not analysis.verdict("R3").flagged
        assert all(not analysis.verdict(r).flagged for r in contaminated_survey.respondents[:20])

    def test_consensus_unchanged_by_removal(self, coherent_survey, contaminated_survey):
        """Test that zones before and after removal match the coherent-only zones."""
        clean = analyze_survey(coherent_survey)
        analysis = analyze_survey(contaminated_survey)
        for question in contaminated_survey.questions:
            assert analysis.before[question].zones == clean.before[question].zones
            assert analysis.after[question].zones == clean.before[question].zones

    def test_permutation_invariance(self, contaminated_survey):
        """Test that respondent order does not change any verdict."""
        order = list(reversed(range(len(contaminated_survey.respondents))))
        shuffled = SurveyTable(
            respondents=tuple(contaminated_survey.respondents[i] for i in order),
            questions=contaminated_survey.questions,
            grades=tuple(contaminated_survey.grades[i] for i in order),
        )
        original = analyze_survey(contaminated_survey)
        permuted = analyze_survey(shuffled)
        assert set(permuted.removed) == set(original.removed)
        for verdict in original.verdicts:
            assert permuted.verdict(verdict.respondent) == verdict

    def test_min_answers_protects_sparse_respondents(self):
        """Test that a single out-of-consensus answer is not enough to flag."""
        table = _toy([4, 4, 5, 1, 1, 7])
        analysis = analyze_survey(table)
        assert analysis.verdict("r4").out_of_consensus_fraction == 1.0
        assert analysis.removed == ()
        assert analyze_survey(table, min_answers=1).removed == ("r4", "r5", "r6")

    def test_unanswered_question(self):
        """Test that a question nobody answered has no consensus."""
        table = SurveyTable(respondents=("a", "b"), questions=("q1", "q2"), grades=((1, None), (2, None)))
        analysis = analyze_survey(table)
        assert analysis.before["q2"] is None
        assert analysis.verdict("a").answered == 1

    def test_negative_grade_error(self, coherent_survey):
        """Test input validation."""
        with pytest.raises(InvalidInputError):
            analyze_survey(coherent_survey, grade_error=-1.0)

    def test_synthetic_surveys(self):
        """Test coherent respondents are kept and most random ones flagged across seeds."""
        flagged = 0
        total = 0
        for seed in range(40):
            clean, contaminated = synthetic_survey(seed)
            analysis = analyze_survey(contaminated)
            reference = analyze_survey(clean)
            assert all(r.startswith("R") for r in analysis.removed), seed
            for question in contaminated.questions:
                assert analysis.before[question].zones == reference.before[question].zones, seed
                assert analysis.after[question].zones == reference.before[question].zones, seed
            flagged += len(analysis.removed)
            total += 4
        assert flagged / total >= 0.45

    def test_frames(self, contaminated_survey):
        """Test the verdict and per-question frames."""
        analysis = analyze_survey(contaminated_survey)
        verdicts = verdicts_frame(analysis)
        assert list(verdicts.columns) == ["respondent", "fraction", "flagged"]
        assert verdicts["flagged"].sum() == 3
        summary = question_summary_frame(analysis, contaminated_survey.questions)
        assert list(summary["question"]) == list(contaminated_survey.questions)
        assert summary["zones_unchanged"].all()
        assert summary.loc[0, "estimate_before"] == 4.0


class TestEstimatorComparison:
    """Test consensus, mean and median per question."""

    def test_hand_built_survey(self, coherent_survey, contaminated_survey):
        """Test that the consensus stays put while mean and median move."""
        comparison = survey_estimator_comparison(coherent_survey, contaminated_survey)
        q1 = comparison.questions.block("Q1")
        assert q1.row("consensus").deviation == 0.0
        assert q1.row("median").before == 4.5
        assert q1.row("median").after == 4.0
        assert q1.row("mean").before == pytest.approx(4.25)
        assert q1.row("mean").after == pytest.approx(4.125)
        assert comparison.max_deviation["consensus"] == 0.0
        assert comparison.max_deviation["mean"] > 0.0

    def test_toy_question(self):
        """Test a single question with three coherent and three random answers."""
        comparison = survey_estimator_comparison(_toy([4, 4, 5]), _toy([4, 4, 5, 1, 1, 7]))
        block = comparison.questions.block("Q1")
        assert block.row("consensus").before == pytest.approx(4.5)
        assert block.row("consensus").deviation == 0.0
        assert block.row("mean").after == pytest.approx(22 / 6)
        assert block.row("median").deviation == 0.0

    def test_seeded_synthetic_survey(self, survey_seed):
        """Test flags, an unmoved consensus and shifted mean and median on one seeded survey."""
        clean, contaminated = synthetic_survey(survey_seed)
        assert len(clean.respondents) == 20
        assert len(contaminated.respondents) == 24
        assert len(contaminated.questions) == 9

        analysis = analyze_survey(contaminated, grade_error=1.0)
        assert len(set(analysis.removed) & {"R1", "R2", "R3", "R4"}) >= 3
        assert all(r.startswith("R") for r in analysis.removed)
        for question in contaminated.questions:
            assert analysis.after[question].point_estimate == analysis.before[question].point_estimate

        comparison = survey_estimator_comparison(clean, contaminated, grade_error=1.0)
        assert comparison.max_deviation["consensus"] == 0.0
        assert comparison.max_deviation["median"] > 0.0
        assert comparison.max_deviation["mean"] > 0.0

    def test_question_mismatch(self, coherent_survey):
        """Test that both tables need the same questions."""
        with pytest.raises(InvalidInputError):
            survey_estimator_comparison(coherent_survey, _toy([1, 2, 3]))

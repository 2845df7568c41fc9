"""
Survey analysis.

Each question's grades are treated as one-dimensional measurements with
a common grade error. Respondents whose answers fall outside the
per-question consensus on a majority of questions are flagged, removed,
and the consensus is recomputed to show it did not move.
"""

from typing import Dict, List, Optional, Sequence

import pandas as pd
from loguru import logger

from .consensus import DEFAULT_MIN_DEPTH, DEFAULT_MEMBERSHIP_THRESHOLD, classify, consensus_fuzzy_1d
from .errors import InvalidInputError, ParseError
from .estimators import CONSENSUS, MEAN, MEDIAN, mean, median
from .io_csv import Source, cell_text, read_frame
from .models import (
    ConsensusResult,
    EstimatorReport,
    Measurement,
    ReportBlock,
    ReportRow,
    RespondentVerdict,
    SurveyAnalysis,
    SurveyComparison,
    SurveyTable,
)

RESPONDENT_COLUMN = "respondent"
DEFAULT_GRADE_ERROR = 1.0
DEFAULT_FLAG_THRESHOLD = 0.5
DEFAULT_MIN_ANSWERS = 3


def load_survey(source: Source, scale_min: int = 1, scale_max: int = 7) -> SurveyTable:
    """
    Parse a `respondent,<q1>,<q2>,...` grade matrix.

    Blank cells are missing answers. Non-integer and out-of-scale grades
    raise ParseError naming the row and question.
    """
    frame = read_frame(source, required=[RESPONDENT_COLUMN])
    questions = [c for c in frame.columns if c != RESPONDENT_COLUMN]
    if not questions:
        raise ParseError("survey has no question columns", row=0)

    respondents: List[str] = []
    grades = []
    for row, record in enumerate(frame.to_dict(orient="records"), start=1):
        label = cell_text(record, RESPONDENT_COLUMN)
        if not label:
            raise ParseError("missing respondent label", row=row, column=RESPONDENT_COLUMN)
        if label in respondents:
            raise ParseError(f"duplicate respondent {label!r}", row=row, column=RESPONDENT_COLUMN)
        answers = []
        for question in questions:
            cell = cell_text(record, question)
            if not cell:
                answers.append(None)
                continue
            try:
                grade = int(cell)
            except ValueError:
                raise ParseError(f"grade {cell!r} is not an integer", row=row, column=question) from None
            if not scale_min <= grade <= scale_max:
                raise ParseError(f"grade {grade} outside scale [{scale_min}, {scale_max}]", row=row, column=question)
            answers.append(grade)
        respondents.append(label)
        grades.append(tuple(answers))

    table = SurveyTable(
        respondents=tuple(respondents),
        questions=tuple(questions),
        grades=tuple(grades),
        scale_min=scale_min,
        scale_max=scale_max,
    )
    logger.info("load_survey respondents={} questions={}", len(respondents), len(questions))
    return table


def _question_measurements(table: SurveyTable, question: str, grade_error: float) -> List[Measurement]:
    return [
        Measurement(id=respondent, values=(float(grade),), errors=(grade_error,))
        for respondent, grade in table.column(question)
    ]


def _per_question(
    table: SurveyTable,
    grade_error: float,
    membership_threshold: float,
) -> Dict[str, Optional[ConsensusResult]]:
    results: Dict[str, Optional[ConsensusResult]] = {}
    for question in table.questions:
        measurements = _question_measurements(table, question, grade_error)
        results[question] = (
            consensus_fuzzy_1d(measurements, membership_threshold=membership_threshold)
            if measurements else None
        )
    return results


def analyze_survey(
    table: SurveyTable,
    grade_error: float = DEFAULT_GRADE_ERROR,
    flag_threshold: float = DEFAULT_FLAG_THRESHOLD,
    min_answers: int = DEFAULT_MIN_ANSWERS,
    membership_threshold: float = DEFAULT_MEMBERSHIP_THRESHOLD,
    min_depth: float = DEFAULT_MIN_DEPTH,
) -> SurveyAnalysis:
    """
    Per-question consensus, respondent verdicts, and consensus after removal.

    Args:
        table: Grade matrix
        grade_error: Error attached to every grade
        flag_threshold: Flag when the out-of-consensus fraction exceeds this
        min_answers: Respondents with fewer answers are never flagged
        membership_threshold: Member threshold of the fuzzy consensus
        min_depth: Questions below this depth have no consensus and mark nobody

    Returns:
        SurveyAnalysis with before/after results and one verdict per respondent
    """
    if grade_error < 0:
        raise InvalidInputError(f"grade error must be non-negative, got {grade_error}")

    before = _per_question(table, grade_error, membership_threshold)

    out_counts = {r: 0 for r in table.respondents}
    answered = {r: 0 for r in table.respondents}
    for question, result in before.items():
        if result is None:
            continue
        measurements = _question_measurements(table, question, grade_error)
        verdict = classify(measurements, result, min_depth=min_depth)
        for m in measurements:
            answered[m.id] += 1
        for respondent in verdict.erroneous:
            out_counts[respondent] += 1

    verdicts = []
    for respondent in table.respondents:
        fraction = out_counts[respondent] / answered[respondent] if answered[respondent] else 0.0
        verdicts.append(RespondentVerdict(
            respondent=respondent,
            out_of_consensus_fraction=fraction,
            answered=answered[respondent],
            flagged=fraction > flag_threshold and answered[respondent] >= min_answers,
        ))

    removed = tuple(v.respondent for v in verdicts if v.flagged)
    after = _per_question(table.without(removed), grade_error, membership_threshold) if removed else before
    if removed:
        logger.info("analyze_survey flagged {} of {} respondents: {}", len(removed), len(verdicts), list(removed))
    return SurveyAnalysis(before=before, after=after, verdicts=tuple(verdicts), removed=removed)


def _question_estimates(table: SurveyTable, question: str, grade_error: float) -> Dict[str, Optional[float]]:
    grades = [float(g) for _, g in table.column(question)]
    if not grades:
        return {CONSENSUS: None, MEAN: None, MEDIAN: None}
    measurements = _question_measurements(table, question, grade_error)
    return {
        CONSENSUS: consensus_fuzzy_1d(measurements).point_estimate[0],
        MEAN: mean(grades),
        MEDIAN: median(grades),
    }


def survey_estimator_comparison(
    table: SurveyTable,
    contaminated: SurveyTable,
    grade_error: float = DEFAULT_GRADE_ERROR,
) -> SurveyComparison:
    """
    Consensus, mean and median per question on both tables.

    Questions unanswered in either table are left out of the report.
    """
    if table.questions != contaminated.questions:
        raise InvalidInputError("both surveys must have the same questions in the same order")

    blocks = []
    for question in table.questions:
        before = _question_estimates(table, question, grade_error)
        after = _question_estimates(contaminated, question, grade_error)
        if any(v is None for v in before.values()) or any(v is None for v in after.values()):
            logger.warning("question {} has no answers in one of the surveys, skipped", question)
            continue
        blocks.append(ReportBlock(
            variable=question,
            rows=tuple(ReportRow.from_values(name, before[name], after[name]) for name in before),
        ))

    max_deviation = {
        name: max((block.row(name).deviation for block in blocks), default=0.0)
        for name in (CONSENSUS, MEAN, MEDIAN)
    }
    logger.info("survey_estimator_comparison max deviations {}", max_deviation)
    return SurveyComparison(questions=EstimatorReport(blocks=tuple(blocks)), max_deviation=max_deviation)


def verdicts_frame(analysis: SurveyAnalysis) -> pd.DataFrame:
    """Verdict CSV rows `respondent,fraction,flagged`."""
    return pd.DataFrame({
        "respondent": [v.respondent for v in analysis.verdicts],
        "fraction": [v.out_of_consensus_fraction for v in analysis.verdicts],
        "flagged": [v.flagged for v in analysis.verdicts],
    })


def question_summary_frame(analysis: SurveyAnalysis, questions: Sequence[str]) -> pd.DataFrame:
    """Per question: depth and estimate before and after removal."""
    rows = []
    for question in questions:
        before, after = analysis.before.get(question), analysis.after.get(question)
        rows.append({
            "question": question,
            "depth_before": before.depth if before else None,
            "estimate_before": before.point_estimate[0] if before else None,
            "depth_after": after.depth if after else None,
            "estimate_after": after.point_estimate[0] if after else None,
            "zones_unchanged": bool(before and after and before.zones == after.zones),
        })
    return pd.DataFrame(rows)

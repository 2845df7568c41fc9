"""
Pydantic models for fuzzyconsensus.

This module defines the immutable domain types shared by the fuzzy
core, aggregation, consensus, estimator and survey modules.
"""

import json
import math
from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


FROZEN = ConfigDict(frozen=True, allow_inf_nan=False)


class ConsensusMode(str, Enum):
    """Available consensus computations."""
    CRISP = "crisp"
    FUZZY = "fuzzy"
    GRID = "grid"


class MemberStatus(str, Enum):
    """Per-measurement consensus status."""
    MEMBER = "member"
    OUTLIER = "outlier"


class PsiFamily(str, Enum):
    """Supported M-estimator psi families."""
    HUBER = "huber"
    TUKEY = "tukey"
    HAMPEL = "hampel"
    ANDREWS = "andrews"


class OutputFormat(str, Enum):
    """Output formats of the command-line front end."""
    CSV = "csv"
    SVG = "svg"


class Interval(BaseModel):
    """Closed interval [lo, hi]; degenerate intervals are points."""
    model_config = FROZEN

    lo: float = Field(..., description="Lower bound")
    hi: float = Field(..., description="Upper bound")

    @model_validator(mode="after")
    def check_order(self) -> "Interval":
        if self.lo > self.hi:
            raise ValueError(f"interval lower bound {self.lo} exceeds upper bound {self.hi}")
        return self

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def covers(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def shift(self, delta: float) -> "Interval":
        return Interval(lo=self.lo + delta, hi=self.hi + delta)


class TrapezoidMF(BaseModel):
    """Trapezoidal membership function of one measured value."""
    model_config = FROZEN

    support: Interval = Field(..., description="Interval where membership is positive (closure)")
    core: Interval = Field(..., description="Interval where membership equals 1")

    @model_validator(mode="after")
    def check_nesting(self) -> "TrapezoidMF":
        if not self.support.covers(self.core):
            raise ValueError("core must lie inside support")
        return self

    @property
    def breakpoints(self) -> Tuple[float, float, float, float]:
        return (self.support.lo, self.core.lo, self.core.hi, self.support.hi)

    @property
    def is_point(self) -> bool:
        return self.support.is_point

    @property
    def is_continuous(self) -> bool:
        """A positive-width support needs both ramps to have positive width."""
        if self.is_point:
            return True
        return self.support.lo < self.core.lo and self.core.hi < self.support.hi

    @property
    def area(self) -> float:
        return (self.support.width + self.core.width) / 2


class Measurement(BaseModel):
    """Identified d-dimensional measured value with per-dimension error."""
    model_config = FROZEN

    id: str = Field(..., min_length=1, description="Measurement label")
    values: Tuple[float, ...] = Field(..., min_length=1, description="Measured value per dimension")
    errors: Tuple[float, ...] = Field(..., min_length=1, description="Non-negative measurement error per dimension")
    weight: float = Field(1.0, gt=0, description="Positive weight (multiplicity)")

    @field_validator("errors")
    @classmethod
    def check_errors(cls, v):
        if any(e < 0 for e in v):
            raise ValueError("measurement errors must be non-negative")
        return v

    @model_validator(mode="after")
    def check_lengths(self) -> "Measurement":
        if len(self.values) != len(self.errors):
            raise ValueError(
                f"values ({len(self.values)}) and errors ({len(self.errors)}) must have equal length"
            )
        return self

    @property
    def dim(self) -> int:
        return len(self.values)

    def core_box(self) -> "Box":
        return Box(intervals=tuple(
            Interval(lo=v - e, hi=v + e) for v, e in zip(self.values, self.errors)
        ))


class Box(BaseModel):
    """Axis-aligned closed box, one interval per dimension."""
    model_config = FROZEN

    intervals: Tuple[Interval, ...] = Field(..., min_length=1, description="Per-dimension extent")

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def lows(self) -> Tuple[float, ...]:
        return tuple(iv.lo for iv in self.intervals)

    @property
    def highs(self) -> Tuple[float, ...]:
        return tuple(iv.hi for iv in self.intervals)

    @property
    def centroid(self) -> Tuple[float, ...]:
        return tuple(iv.midpoint for iv in self.intervals)

    @property
    def volume(self) -> float:
        return math.prod(iv.width for iv in self.intervals)

    def sort_key(self) -> Tuple[float, ...]:
        return self.lows + self.highs

    def covers(self, other: "Box") -> bool:
        return all(a.covers(b) for a, b in zip(self.intervals, other.intervals))


class PiecewiseLinearCurve(BaseModel):
    """Exact aggregate membership curve: linear between breakpoints plus point spikes."""
    model_config = FROZEN

    breakpoints: Tuple[float, ...] = Field(default=(), description="Strictly increasing abscissae")
    values: Tuple[float, ...] = Field(default=(), description="Curve value at each breakpoint")
    spikes: Tuple[Tuple[float, float], ...] = Field(
        default=(), description="(location, weight) point masses from zero-width measurements"
    )

    @model_validator(mode="after")
    def check_shape(self) -> "PiecewiseLinearCurve":
        if len(self.breakpoints) != len(self.values):
            raise ValueError("breakpoints and values must have equal length")
        if any(b >= a for a, b in zip(self.breakpoints[1:], self.breakpoints[:-1])):
            raise ValueError("breakpoints must be strictly increasing")
        if any(v < 0 for v in self.values):
            raise ValueError("curve values must be non-negative")
        if self.values and (self.values[0] != 0 or self.values[-1] != 0):
            raise ValueError("curve must vanish at its first and last breakpoint")
        locations = [loc for loc, _ in self.spikes]
        if any(b <= a for a, b in zip(locations, locations[1:])):
            raise ValueError("spike locations must be strictly increasing")
        if any(w <= 0 for _, w in self.spikes):
            raise ValueError("spike weights must be positive")
        return self

    @property
    def is_empty(self) -> bool:
        return not self.breakpoints and not self.spikes


class HistogramSpec(BaseModel):
    """Conventional histogram binning."""
    model_config = FROZEN

    bin_count: int = Field(..., ge=1, description="Number of equal-width bins")
    range: Optional[Interval] = Field(None, description="Binned range; defaults to data min/max")


class TimeSeriesPoint(BaseModel):
    """One observation of a count series (e.g. a month index and its count)."""
    model_config = FROZEN

    t: float = Field(..., description="Time coordinate")
    count: float = Field(..., ge=0, description="Non-negative count")


class Classification(BaseModel):
    """Partition of measurements into consistent and erroneous ones."""
    model_config = FROZEN

    consistent: Tuple[str, ...] = Field(..., description="Ids inside the consensus")
    erroneous: Tuple[str, ...] = Field(..., description="Ids out of consensus")
    no_consensus: bool = Field(False, description="True when depth is below the minimum depth")


class ConsensusResult(BaseModel):
    """Maximum-overlap consensus of a set of measurements."""
    model_config = FROZEN

    mode: ConsensusMode = Field(..., description="Computation that produced the result")
    depth: float = Field(..., gt=0, description="Overlap count (crisp) or membership sum (fuzzy)")
    zones: Tuple[Box, ...] = Field(..., min_length=1, description="Zones attaining the depth, sorted")
    members: Tuple[str, ...] = Field(..., description="Ids inside the consensus")
    outliers: Tuple[str, ...] = Field(..., description="Ids out of consensus")
    point_estimate: Tuple[float, ...] = Field(..., min_length=1, description="Centroid of the widest zone")

    @model_validator(mode="after")
    def check_partition(self) -> "ConsensusResult":
        overlap = set(self.members) & set(self.outliers)
        if overlap:
            raise ValueError(f"ids cannot be both member and outlier: {sorted(overlap)}")
        return self

    def status_of(self, measurement_id: str) -> MemberStatus:
        return MemberStatus.MEMBER if measurement_id in self.members else MemberStatus.OUTLIER


class PsiSpec(BaseModel):
    """M-estimator psi family with its tuning constants."""
    model_config = FROZEN

    family: PsiFamily = Field(..., description="Psi family")
    constants: Dict[str, float] = Field(default_factory=dict, description="Family-specific tuning constants")
    andrews_scale: str = Field("pi", description="Andrews argument convention: 'pi' (u*pi/c) or 'unit' (u/c)")

    @field_validator("andrews_scale")
    @classmethod
    def check_andrews_scale(cls, v):
        if v not in ("pi", "unit"):
            raise ValueError("andrews_scale must be 'pi' or 'unit'")
        return v

    @model_validator(mode="after")
    def check_constants(self) -> "PsiSpec":
        required = REQUIRED_CONSTANTS[self.family]
        missing = [name for name in required if name not in self.constants]
        if missing:
            raise ValueError(f"{self.family.value} requires constants {missing}")
        if any(self.constants[name] <= 0 for name in required):
            raise ValueError("tuning constants must be positive")
        if self.family == PsiFamily.HAMPEL:
            a, b, c = (self.constants[name] for name in ("a", "b", "c"))
            if not a <= b <= c:
                raise ValueError("Hampel constants must satisfy a <= b <= c")
        return self

    @classmethod
    def default(cls, family: PsiFamily) -> "PsiSpec":
        return cls(family=family, constants=dict(DEFAULT_CONSTANTS[PsiFamily(family)]))

    @property
    def name(self) -> str:
        return self.family.value


REQUIRED_CONSTANTS: Dict[PsiFamily, Tuple[str, ...]] = {
    PsiFamily.HUBER: ("k",),
    PsiFamily.TUKEY: ("c",),
    PsiFamily.HAMPEL: ("a", "b", "c"),
    PsiFamily.ANDREWS: ("c",),
}

DEFAULT_CONSTANTS: Dict[PsiFamily, Dict[str, float]] = {
    PsiFamily.HUBER: {"k": 1.339},
    PsiFamily.TUKEY: {"c": 4.685},
    PsiFamily.HAMPEL: {"a": 1.7, "b": 3.4, "c": 8.5},
    PsiFamily.ANDREWS: {"c": 1.339 * math.pi},
}


class ReportRow(BaseModel):
    """Before/after/deviation row of a robustness report."""
    model_config = FROZEN

    estimator: str = Field(..., description="Estimator name")
    before: float = Field(..., description="Value on the clean data")
    after: float = Field(..., description="Value on the contaminated data")
    deviation: float = Field(..., ge=0, description="|after - before|")

    @model_validator(mode="after")
    def check_deviation(self) -> "ReportRow":
        if abs(self.deviation - abs(self.after - self.before)) > 1e-12:
            raise ValueError("deviation must equal |after - before|")
        return self

    @classmethod
    def from_values(cls, estimator: str, before: float, after: float) -> "ReportRow":
        return cls(estimator=estimator, before=before, after=after, deviation=abs(after - before))


class ReportBlock(BaseModel):
    """Report rows of one variable."""
    model_config = FROZEN

    variable: str = Field(..., description="Variable name")
    rows: Tuple[ReportRow, ...] = Field(..., description="One row per estimator")

    def row(self, estimator: str) -> ReportRow:
        for row in self.rows:
            if row.estimator == estimator:
                return row
        raise KeyError(estimator)


class EstimatorReport(BaseModel):
    """Before/after robustness comparison, one block per variable."""
    model_config = FROZEN

    blocks: Tuple[ReportBlock, ...] = Field(..., description="Per-variable blocks")

    def block(self, variable: str) -> ReportBlock:
        for block in self.blocks:
            if block.variable == variable:
                return block
        raise KeyError(variable)


class SurveyTable(BaseModel):
    """Grade matrix: one row per respondent, one column per question."""
    model_config = FROZEN

    respondents: Tuple[str, ...] = Field(..., min_length=1, description="Respondent labels")
    questions: Tuple[str, ...] = Field(..., min_length=1, description="Question labels")
    grades: Tuple[Tuple[Optional[int], ...], ...] = Field(..., description="grades[r][q], None when missing")
    scale_min: int = Field(1, description="Lowest permitted grade")
    scale_max: int = Field(7, description="Highest permitted grade")

    @model_validator(mode="after")
    def check_matrix(self) -> "SurveyTable":
        if self.scale_min > self.scale_max:
            raise ValueError("scale_min must not exceed scale_max")
        if len(set(self.respondents)) != len(self.respondents):
            raise ValueError("respondent labels must be unique")
        if len(set(self.questions)) != len(self.questions):
            raise ValueError("question labels must be unique")
        if len(self.grades) != len(self.respondents):
            raise ValueError("one grade row per respondent is required")
        for r, row in enumerate(self.grades):
            if len(row) != len(self.questions):
                raise ValueError(f"respondent {self.respondents[r]} has {len(row)} grades, expected {len(self.questions)}")
            for grade in row:
                if grade is not None and not self.scale_min <= grade <= self.scale_max:
                    raise ValueError(f"grade {grade} outside scale [{self.scale_min}, {self.scale_max}]")
        return self

    def column(self, question: str) -> List[Tuple[str, int]]:
        q = self.questions.index(question)
        return [
            (respondent, row[q])
            for respondent, row in zip(self.respondents, self.grades)
            if row[q] is not None
        ]

    def without(self, respondents) -> "SurveyTable":
        drop = set(respondents)
        kept = [(r, row) for r, row in zip(self.respondents, self.grades) if r not in drop]
        return SurveyTable(
            respondents=tuple(r for r, _ in kept),
            questions=self.questions,
            grades=tuple(row for _, row in kept),
            scale_min=self.scale_min,
            scale_max=self.scale_max,
        )


class RespondentVerdict(BaseModel):
    """Out-of-consensus assessment of one respondent."""
    model_config = FROZEN

    respondent: str = Field(..., description="Respondent label")
    out_of_consensus_fraction: float = Field(..., ge=0, le=1, description="Share of answers classified outlier")
    answered: int = Field(..., ge=0, description="Number of answered questions")
    flagged: bool = Field(..., description="True when judged incompetent/erroneous")


class RunConfig(BaseModel):
    """Resolved invocation of one CLI command, echoed into output metadata."""
    model_config = ConfigDict(frozen=True)

    subcommand: str = Field(..., description="CLI subcommand")
    inputs: Tuple[str, ...] = Field(default=(), description="Input paths")
    error: Optional[Tuple[float, ...]] = Field(None, description="Global per-dimension error")
    mode: Optional[ConsensusMode] = Field(None, description="Consensus mode")
    normalize: bool = Field(False, description="Normalize curves by total weight")
    seed: Optional[int] = Field(None, ge=0, description="PRNG seed")
    output_format: OutputFormat = Field(OutputFormat.CSV, description="Primary output format")
    output: Optional[str] = Field(None, description="Output path, stdout when unset")
    flags: Dict[str, object] = Field(default_factory=dict, description="Full flag set")

    def metadata_lines(self, tool: str, version: str, extra: Optional[Dict[str, str]] = None) -> List[str]:
        lines = [
            f"tool: {tool} {version}",
            f"command: {self.subcommand}",
            f"flags: {json.dumps(self.flags, sort_keys=True, default=str)}",
            f"seed: {self.seed if self.seed is not None else 'none'}",
        ]
        for key, value in (extra or {}).items():
            lines.append(f"{key}: {value}")
        return lines


class MEstimate(BaseModel):
    """Outcome of one iteratively reweighted M-estimation."""
    model_config = FROZEN

    location: float = Field(..., description="Location estimate")
    scale: float = Field(..., ge=0, description="MAD-based scale held fixed during iteration")
    iterations: int = Field(..., ge=0, description="IRLS iterations performed")
    converged: bool = Field(..., description="Step fell below tolerance before the cap")
    fallback: Optional[str] = Field(None, description="Reason the median was returned instead")


class ReferenceMiss(BaseModel):
    """Report cell that misses a reference value."""
    model_config = FROZEN

    variable: str
    estimator: str
    column: str = Field(..., description="'before' or 'after'")
    expected: float
    actual: float


class SurveyAnalysis(BaseModel):
    """Per-question consensus before and after removing flagged respondents."""
    model_config = FROZEN

    before: Dict[str, Optional[ConsensusResult]] = Field(..., description="Question -> consensus on all answers")
    after: Dict[str, Optional[ConsensusResult]] = Field(..., description="Question -> consensus without flagged respondents")
    verdicts: Tuple[RespondentVerdict, ...] = Field(..., description="One verdict per respondent, table order")
    removed: Tuple[str, ...] = Field(default=(), description="Flagged respondents, table order")

    def verdict(self, respondent: str) -> RespondentVerdict:
        for v in self.verdicts:
            if v.respondent == respondent:
                return v
        raise KeyError(respondent)


class SurveyComparison(BaseModel):
    """Per-question estimator report and the largest deviation of each estimator."""
    model_config = FROZEN

    questions: EstimatorReport = Field(..., description="One block per question")
    max_deviation: Dict[str, float] = Field(..., description="Estimator -> max deviation over questions")


class ToolSettings(BaseModel):
    """Settings resolved from flags, environment and defaults."""
    model_config = ConfigDict(frozen=True)

    grid_max_cells: int = Field(4_000_000, ge=1)
    min_depth: float = Field(2.0, gt=0)
    membership_threshold: float = Field(1.0, gt=0, le=1)
    irls_tol: float = Field(1e-10, gt=0)
    irls_max_iter: int = Field(200, ge=1)
    svg_width: int = Field(800, ge=100)
    svg_height: int = Field(500, ge=100)
    metrics_file: Optional[str] = None

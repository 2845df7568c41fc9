"""
Location estimators and before/after robustness reports.

Mean, median and four M-estimators (Huber, Tukey biweight, Hampel,
Andrews sine) computed by iteratively reweighted averaging with a fixed
MAD scale, compared against the consensus point estimate.
"""

import math
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from shared import FALLBACKS, IRLS_ITERATIONS

from .consensus import consensus_fuzzy_1d
from .errors import DegenerateScaleError, InvalidInputError, NonConvergenceError
from .models import (
    EstimatorReport,
    Measurement,
    MEstimate,
    PsiFamily,
    PsiSpec,
    ReferenceMiss,
    ReportBlock,
    ReportRow,
)

MAD_CONSISTENCY = 0.6745
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
DEFAULT_REFERENCE_TOLERANCE = 0.05

CONSENSUS = "consensus"
MEAN = "mean"
MEDIAN = "median"


def _as_array(sample: Sequence[float]) -> np.ndarray:
    data = np.asarray(sample, dtype=float)
    if data.size == 0:
        raise InvalidInputError("estimators need a non-empty sample")
    return data


def mean(sample: Sequence[float]) -> float:
    """Arithmetic mean, summed with math.fsum."""
    data = _as_array(sample)
    return math.fsum(data) / data.size


def median(sample: Sequence[float]) -> float:
    """Middle order statistic; the average of the two middle values for even n."""
    return float(np.median(_as_array(sample)))


def mad_scale(sample: Sequence[float]) -> float:
    """
    Normalized median absolute deviation.

    Raises:
        DegenerateScaleError: when more than half of the sample is tied
    """
    data = _as_array(sample)
    mad = float(np.median(np.abs(data - np.median(data))))
    if mad == 0:
        raise DegenerateScaleError("MAD scale is zero: more than half of the sample is tied")
    return mad / MAD_CONSISTENCY


def _andrews_argument(u: np.ndarray, spec: PsiSpec) -> Tuple[np.ndarray, float]:
    c = spec.constants["c"]
    if spec.andrews_scale == "pi":
        return u * math.pi / c, c
    return u / c, c * math.pi


def psi(u, spec: PsiSpec) -> np.ndarray:
    """Psi function of the family, vectorised; psi(u) ~ u near 0 for every family."""
    u = np.asarray(u, dtype=float)
    abs_u = np.abs(u)
    k = spec.constants

    if spec.family == PsiFamily.HUBER:
        return np.clip(u, -k["k"], k["k"])
    if spec.family == PsiFamily.TUKEY:
        return np.where(abs_u <= k["c"], u * (1 - (u / k["c"]) ** 2) ** 2, 0.0)
    if spec.family == PsiFamily.HAMPEL:
        a, b, c = k["a"], k["b"], k["c"]
        out = np.where(abs_u <= a, u, a * np.sign(u))
        if c > b:
            descending = (abs_u > b) & (abs_u <= c)
            out = np.where(descending, a * np.sign(u) * (c - abs_u) / (c - b), out)
        return np.where(abs_u > c, 0.0, out)

    z, support = _andrews_argument(u, spec)
    factor = np.divide(u, z, out=np.ones_like(u), where=z != 0)
    return np.where(abs_u <= support, factor * np.sin(z), 0.0)


def weight(u, spec: PsiSpec) -> np.ndarray:
    """IRLS weight psi(u)/u with its limit 1 at u = 0."""
    u = np.asarray(u, dtype=float)
    abs_u = np.abs(u)
    k = spec.constants

    if spec.family == PsiFamily.HUBER:
        return np.minimum(1.0, np.divide(k["k"], abs_u, out=np.full_like(u, np.inf), where=abs_u != 0))
    if spec.family == PsiFamily.TUKEY:
        return np.where(abs_u <= k["c"], (1 - (u / k["c"]) ** 2) ** 2, 0.0)
    if spec.family == PsiFamily.HAMPEL:
        a, b, c = k["a"], k["b"], k["c"]
        safe = np.where(abs_u == 0, 1.0, abs_u)
        out = np.where(abs_u <= a, 1.0, a / safe)
        if c > b:
            descending = (abs_u > b) & (abs_u <= c)
            out = np.where(descending, a * (c - abs_u) / ((c - b) * safe), out)
        return np.where(abs_u > c, 0.0, out)

    z, support = _andrews_argument(u, spec)
    return np.where(abs_u <= support, np.sinc(z / math.pi), 0.0)


def _fallback(sample: np.ndarray, reason: str, scale: float, iterations: int) -> MEstimate:
    FALLBACKS.labels(kind=reason).inc()
    return MEstimate(
        location=float(np.median(sample)),
        scale=scale,
        iterations=iterations,
        converged=False,
        fallback=reason,
    )


def m_estimate_detailed(
    sample: Sequence[float],
    psi_spec: PsiSpec,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    strict: bool = False,
) -> MEstimate:
    """
    Location M-estimate by iteratively reweighted averaging.

    Args:
        sample: Non-empty sample
        psi_spec: Psi family and constants
        tol: Stop when consecutive iterates differ by at most tol
        max_iter: Iteration cap
        strict: Raise instead of falling back to the median

    Returns:
        MEstimate with location, fixed scale and convergence details
    """
    data = _as_array(sample)
    try:
        scale = mad_scale(data)
    except DegenerateScaleError:
        if strict:
            raise
        logger.warning("{}: degenerate scale, returning the median", psi_spec.name)
        return _fallback(data, "degenerate_scale", 0.0, 0)

    location = float(np.median(data))
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        w = weight((data - location) / scale, psi_spec)
        total = math.fsum(w)
        if total <= 0:
            if strict:
                raise NonConvergenceError(f"{psi_spec.name}: every IRLS weight is zero")
            logger.warning("{}: every IRLS weight is zero, returning the median", psi_spec.name)
            return _fallback(data, "zero_weights", scale, iterations)
        updated = math.fsum(w * data) / total
        step = abs(updated - location)
        location = updated
        if step <= tol:
            converged = True
            break

    IRLS_ITERATIONS.observe(iterations)
    if not converged:
        logger.warning("{}: iteration cap {} reached, last step above tolerance {}", psi_spec.name, max_iter, tol)
    logger.debug("m_estimate {} location={} scale={} iterations={}", psi_spec.name, location, scale, iterations)
    return MEstimate(location=location, scale=scale, iterations=iterations, converged=converged)


def m_estimate(
    sample: Sequence[float],
    psi_spec: PsiSpec,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    return m_estimate_detailed(sample, psi_spec, tol=tol, max_iter=max_iter).location


def default_psis() -> List[PsiSpec]:
    return [PsiSpec.default(family) for family in PsiFamily]


def consensus_estimate(sample: Sequence[float], error: float) -> float:
    """Point estimate of the fuzzy consensus of a sample with a common error."""
    measurements = [
        Measurement(id=f"v{i}", values=(float(v),), errors=(error,))
        for i, v in enumerate(sample)
    ]
    return consensus_fuzzy_1d(measurements).point_estimate[0]


def _estimates(
    sample: Sequence[float],
    error: float,
    psis: Sequence[PsiSpec],
    tol: float,
    max_iter: int,
) -> Dict[str, float]:
    values = {
        CONSENSUS: consensus_estimate(sample, error),
        MEAN: mean(sample),
        MEDIAN: median(sample),
    }
    for spec in psis:
        values[spec.name] = m_estimate(sample, spec, tol=tol, max_iter=max_iter)
    return values


def robustness_report(
    clean: Mapping[str, Sequence[float]],
    contaminated: Mapping[str, Sequence[float]],
    psis: Optional[Sequence[PsiSpec]] = None,
    error: Union[float, Mapping[str, float]] = 0.2,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> EstimatorReport:
    """
    Before/after comparison of every estimator, one block per variable.

    Args:
        clean: Variable -> sample without erroneous measurements
        contaminated: Variable -> sample with the erroneous measurements added
        psis: M-estimators to include, the four defaults when None
        error: Measurement error used by the consensus, global or per variable

    Returns:
        EstimatorReport with rows consensus, mean, median, then one per psi
    """
    if list(clean) != list(contaminated):
        raise InvalidInputError(
            f"clean and contaminated data must have the same variables, got {list(clean)} and {list(contaminated)}"
        )
    psis = list(psis) if psis is not None else default_psis()

    blocks = []
    for variable in clean:
        variable_error = error[variable] if isinstance(error, Mapping) else error
        before = _estimates(clean[variable], variable_error, psis, tol, max_iter)
        after = _estimates(contaminated[variable], variable_error, psis, tol, max_iter)
        rows = tuple(ReportRow.from_values(name, before[name], after[name]) for name in before)
        blocks.append(ReportBlock(variable=variable, rows=rows))
        logger.info(
            "robustness_report variable={} deviations={}",
            variable, {row.estimator: round(row.deviation, 4) for row in rows},
        )
    return EstimatorReport(blocks=tuple(blocks))


def check_reference(
    report: EstimatorReport,
    targets: Mapping[str, Mapping[str, Tuple[float, float]]],
    tolerance: float = DEFAULT_REFERENCE_TOLERANCE,
) -> List[ReferenceMiss]:
    """
    Compare report cells with reference (before, after) values.

    Every miss beyond tolerance is logged as a warning and returned.
    Estimators or variables absent from the report are skipped.
    """
    misses = []
    for block in report.blocks:
        for estimator, (before, after) in targets.get(block.variable, {}).items():
            try:
                row = block.row(estimator)
            except KeyError:
                continue
            for column, expected, actual in (("before", before, row.before), ("after", after, row.after)):
                if abs(actual - expected) > tolerance:
                    miss = ReferenceMiss(
                        variable=block.variable, estimator=estimator,
                        column=column, expected=expected, actual=actual,
                    )
                    logger.warning(
                        "reference miss {} {} {}: expected {:.2f}, got {:.4f}",
                        block.variable, estimator, column, expected, actual,
                    )
                    misses.append(miss)
    return misses


def deviations_exceed_median(report: EstimatorReport) -> bool:
    """True when every M-estimator moved strictly more than the median did."""
    m_names = {family.value for family in PsiFamily}
    for block in report.blocks:
        median_deviation = block.row(MEDIAN).deviation
        for row in block.rows:
            if row.estimator in m_names and not row.deviation > median_deviation:
                logger.info(
                    "{} {} deviation {:.4f} does not exceed median deviation {:.4f}",
                    block.variable, row.estimator, row.deviation, median_deviation,
                )
                return False
    return True


def report_to_frame(report: EstimatorReport) -> pd.DataFrame:
    """Flatten a report to `variable,estimator,before,after,deviation` rows."""
    return pd.DataFrame(
        [
            {
                "variable": block.variable,
                "estimator": row.estimator,
                "before": row.before,
                "after": row.after,
                "deviation": row.deviation,
            }
            for block in report.blocks
            for row in block.rows
        ],
        columns=["variable", "estimator", "before", "after", "deviation"],
    )

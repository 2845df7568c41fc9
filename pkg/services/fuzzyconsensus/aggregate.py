"""
Aggregate membership curves.

The common membership function of a sample is the weighted pointwise sum
of the trapezoids of its measurements. A sum of piecewise-linear functions
is piecewise-linear on the merged breakpoints, so the curve is stored
exactly: its values at the union of all breakpoints, plus point spikes for
zero-error measurements.
"""

import math
from collections import Counter
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from scipy.stats import norm

from .errors import InvalidInputError
from .fuzzy_core import make_trapezoid, membership_array, require_one_dimensional
from .models import HistogramSpec, Interval, Measurement, PiecewiseLinearCurve, TimeSeriesPoint

EMPTY_CURVE = PiecewiseLinearCurve()


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-12 * max(1.0, abs(b))


def build_curve(
    measurements: Sequence[Measurement],
    normalize: bool = False,
    ramp: Optional[float] = None,
) -> PiecewiseLinearCurve:
    """
    Build the exact common membership function of one-dimensional measurements.

    Args:
        measurements: Non-empty list of 1-d measurements
        normalize: Divide by the total weight
        ramp: Ramp width override passed to make_trapezoid

    Returns:
        PiecewiseLinearCurve equal to sum_i w_i * A_i(x)
    """
    require_one_dimensional(measurements)

    linear: List[Tuple[float, object]] = []
    spikes: Dict[float, float] = {}
    for m in measurements:
        mf = make_trapezoid(m.values[0], m.errors[0], ramp)
        if mf.is_point:
            spikes[mf.core.lo] = spikes.get(mf.core.lo, 0.0) + m.weight
        else:
            linear.append((m.weight, mf))

    total = math.fsum(m.weight for m in measurements) if normalize else 1.0

    breakpoints = np.unique(np.array([b for _, mf in linear for b in mf.breakpoints], dtype=float))
    values = np.zeros_like(breakpoints)
    # input order is the summation order, so results do not depend on partitioning
    for weight, mf in linear:
        values += weight * membership_array(mf, breakpoints)
    if normalize:
        values = values / total

    curve = PiecewiseLinearCurve(
        breakpoints=tuple(float(b) for b in breakpoints),
        values=tuple(float(v) for v in values),
        spikes=tuple((loc, w / total) for loc, w in sorted(spikes.items())),
    )
    logger.debug(
        "build_curve n={} breakpoints={} spikes={} normalize={}",
        len(measurements), len(curve.breakpoints), len(curve.spikes), normalize,
    )
    return curve


def _spike_weight(curve: PiecewiseLinearCurve, x: float) -> float:
    for location, weight in curve.spikes:
        if location == x:
            return weight
    return 0.0


def _linear_part(curve: PiecewiseLinearCurve, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if not curve.breakpoints:
        return np.zeros_like(xs)
    return np.interp(xs, curve.breakpoints, curve.values, left=0.0, right=0.0)


def evaluate(curve: PiecewiseLinearCurve, x: float) -> float:
    """Curve value at x: linear interpolation, 0 outside, plus any spike located at x."""
    return float(_linear_part(curve, [x])[0]) + _spike_weight(curve, x)


def evaluate_array(curve: PiecewiseLinearCurve, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    out = _linear_part(curve, xs)
    for location, weight in curve.spikes:
        out[xs == location] += weight
    return out


def _candidates(curve: PiecewiseLinearCurve) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    points = np.unique(np.array(list(curve.breakpoints) + [loc for loc, _ in curve.spikes], dtype=float))
    linear = _linear_part(curve, points)
    total = linear.copy()
    for location, weight in curve.spikes:
        total[points == location] += weight
    return points, linear, total


def argmax_zones(curve: PiecewiseLinearCurve) -> Tuple[float, List[Interval]]:
    """
    Global maximum of the curve and the maximal intervals attaining it.

    Extrema of a piecewise-linear function lie on its breakpoints, so only
    breakpoints and spike locations are inspected. Touching intervals are merged.
    """
    if curve.is_empty:
        raise InvalidInputError("argmax of an empty curve is undefined")

    points, linear, total = _candidates(curve)
    height = float(total.max())

    zones: List[Interval] = []
    start: Optional[float] = None
    previous: Optional[int] = None
    for j, x in enumerate(points):
        if not _close(total[j], height):
            if start is not None:
                zones.append(Interval(lo=start, hi=float(points[previous])))
                start = None
            continue
        segment_attains = (
            start is not None
            and previous == j - 1
            and _close(linear[j - 1], height)
            and _close(linear[j], height)
        )
        if not segment_attains and start is not None:
            zones.append(Interval(lo=start, hi=float(points[previous])))
            start = None
        if start is None:
            start = float(x)
        previous = j
    if start is not None:
        zones.append(Interval(lo=start, hi=float(points[previous])))

    return height, zones


def local_maxima(curve: PiecewiseLinearCurve) -> List[Interval]:
    """Plateaus (possibly single points) strictly higher than both neighbours."""
    if curve.is_empty:
        return []
    points, _, total = _candidates(curve)
    peaks: List[Interval] = []
    j = 0
    while j < len(points):
        k = j
        while k + 1 < len(points) and _close(total[k + 1], total[j]):
            k += 1
        left = total[j - 1] if j > 0 else 0.0
        right = total[k + 1] if k + 1 < len(points) else 0.0
        if total[j] > left and total[j] > right and not _close(total[j], left) and not _close(total[j], right):
            peaks.append(Interval(lo=float(points[j]), hi=float(points[k])))
        j = k + 1
    return peaks


def integral(curve: PiecewiseLinearCurve) -> float:
    """Exact integral of the linear part (spikes carry no area)."""
    if len(curve.breakpoints) < 2:
        return 0.0
    return float(np.trapz(curve.values, curve.breakpoints))


def translate_curve(curve: PiecewiseLinearCurve, delta: float) -> PiecewiseLinearCurve:
    return PiecewiseLinearCurve(
        breakpoints=tuple(b + delta for b in curve.breakpoints),
        values=curve.values,
        spikes=tuple((loc + delta, w) for loc, w in curve.spikes),
    )


def histogram(values: Sequence[float], spec: HistogramSpec) -> List[Tuple[Interval, int]]:
    """
    Conventional histogram with bins [lo, hi) and a closed last bin.

    Values outside spec.range are not counted. A zero-width range is widened
    to one unit so that a constant sample still gets a bin.
    """
    if len(values) == 0:
        raise InvalidInputError("histogram needs at least one value")
    data = np.asarray(values, dtype=float)
    if spec.range is None:
        lo, hi = float(data.min()), float(data.max())
    else:
        lo, hi = spec.range.lo, spec.range.hi
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5

    counts, edges = np.histogram(data, bins=spec.bin_count, range=(lo, hi))
    return [
        (Interval(lo=float(edges[i]), hi=float(edges[i + 1])), int(counts[i]))
        for i in range(spec.bin_count)
    ]


def histogram_density(values: Sequence[float], spec: HistogramSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Histogram as a step density: count / (n * bin width), 0 outside the range."""
    bins = histogram(values, spec)
    n = len(values)
    edges = np.array([bins[0][0].lo] + [iv.hi for iv, _ in bins])
    heights = np.array([count / (n * iv.width) for iv, count in bins])

    def density(xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        idx = np.searchsorted(edges, xs, side="right") - 1
        idx[xs == edges[-1]] = len(heights) - 1
        inside = (idx >= 0) & (idx < len(heights))
        out = np.zeros_like(xs)
        out[inside] = heights[idx[inside]]
        return out

    return density


def normal_pdf(xs, mu: float, sigma: float) -> np.ndarray:
    return norm.pdf(np.asarray(xs, dtype=float), loc=mu, scale=sigma)


def l2_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Root mean squared difference of two functions sampled on the same grid."""
    return float(np.sqrt(np.mean((np.asarray(a) - np.asarray(b)) ** 2)))


def compare_with_normal(
    values: Sequence[float],
    error: float,
    bins: int = 15,
    mu: float = 0.0,
    sigma: float = 1.0,
    grid_points: int = 200,
) -> Dict[str, float]:
    """
    L2 distance to the N(mu, sigma) density of the aggregate curve and of the histogram.

    The curve is rescaled to unit integral before the comparison.
    """
    measurements = [
        Measurement(id=f"v{i}", values=(float(v),), errors=(error,))
        for i, v in enumerate(values)
    ]
    curve = build_curve(measurements, normalize=True)
    area = integral(curve)
    if area <= 0:
        raise InvalidInputError("density comparison needs a positive measurement error")

    grid = np.linspace(mu - 4 * sigma, mu + 4 * sigma, grid_points)
    truth = normal_pdf(grid, mu, sigma)
    curve_density = _linear_part(curve, grid) / area
    hist_density = histogram_density(values, HistogramSpec(bin_count=bins))(grid)

    result = {
        "curve_l2": l2_distance(curve_density, truth),
        "histogram_l2": l2_distance(hist_density, truth),
    }
    logger.info("compare_with_normal curve_l2={:.5f} histogram_l2={:.5f}", result["curve_l2"], result["histogram_l2"])
    return result


def smooth_timeseries(
    points: Sequence[TimeSeriesPoint],
    time_error: float,
    normalize: bool = False,
) -> PiecewiseLinearCurve:
    """
    Represent each time stamp as a fuzzy number weighted by its count.

    Zero-count points contribute nothing; an all-zero series yields an empty curve.
    """
    if time_error < 0:
        raise InvalidInputError(f"time error must be non-negative, got {time_error}")
    duplicates = sorted(t for t, n in Counter(p.t for p in points).items() if n > 1)
    if duplicates:
        raise InvalidInputError(f"duplicate time stamps: {duplicates[:5]}")

    measurements = [
        Measurement(id=f"t{i}", values=(p.t,), errors=(time_error,), weight=p.count)
        for i, p in enumerate(points)
        if p.count > 0
    ]
    if not measurements:
        logger.info("smooth_timeseries: every count is zero, returning empty curve")
        return EMPTY_CURVE
    return build_curve(measurements, normalize=normalize)


def curve_to_frame(curve: PiecewiseLinearCurve) -> pd.DataFrame:
    """Curve rows `x,value`: every breakpoint, plus spike locations with their total value."""
    points, _, total = _candidates(curve) if not curve.is_empty else (np.array([]), None, np.array([]))
    return pd.DataFrame({"x": points.astype(float), "value": total.astype(float)})

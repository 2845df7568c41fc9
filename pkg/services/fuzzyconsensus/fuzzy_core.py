"""
Trapezoidal membership functions.

A measured value v with error e is represented by a trapezoid whose
core is [v - e, v + e] and whose ramps have width e by default, so the
support is [v - 2e, v + 2e].
"""

from typing import List, Optional

import numpy as np
from loguru import logger

from .errors import InvalidInputError
from .models import Interval, Measurement, TrapezoidMF


def make_trapezoid(value: float, error: float, ramp: Optional[float] = None) -> TrapezoidMF:
    """
    Build the membership function of a measured value.

    Args:
        value: Measured value
        error: Non-negative measurement error (core half-width)
        ramp: Ramp width override, defaults to the error

    Returns:
        TrapezoidMF with core value ± error and support core ± ramp
    """
    if error < 0:
        raise InvalidInputError(f"measurement error must be non-negative, got {error}")
    ramp = error if ramp is None else ramp
    if ramp < 0:
        raise InvalidInputError(f"ramp width must be non-negative, got {ramp}")
    if error > 0 and ramp == 0:
        raise InvalidInputError("a positive error needs a positive ramp width to keep membership continuous")

    core = Interval(lo=value - error, hi=value + error)
    support = Interval(lo=core.lo - ramp, hi=core.hi + ramp)
    return TrapezoidMF(support=support, core=core)


def membership(mf: TrapezoidMF, x: float) -> float:
    """Confidence in [0, 1] that the measured quantity equals x."""
    s_lo, c_lo, c_hi, s_hi = mf.breakpoints
    if x < s_lo or x > s_hi:
        return 0.0
    if c_lo <= x <= c_hi:
        return 1.0
    if x < c_lo:
        return (x - s_lo) / (c_lo - s_lo)
    return (s_hi - x) / (s_hi - c_hi)


def membership_array(mf: TrapezoidMF, xs) -> np.ndarray:
    """Vectorised membership over an array of abscissae."""
    xs = np.asarray(xs, dtype=float)
    s_lo, c_lo, c_hi, s_hi = mf.breakpoints
    out = np.zeros_like(xs)
    if mf.is_point:
        out[xs == s_lo] = 1.0
        return out

    rising = xs < c_lo
    falling = xs > c_hi
    out[(xs >= c_lo) & (xs <= c_hi)] = 1.0
    if c_lo > s_lo:
        left = rising & (xs > s_lo)
        out[left] = (xs[left] - s_lo) / (c_lo - s_lo)
    if s_hi > c_hi:
        right = falling & (xs < s_hi)
        out[right] = (s_hi - xs[right]) / (s_hi - c_hi)
    return out


def translate(mf: TrapezoidMF, delta: float) -> TrapezoidMF:
    """Shift all four breakpoints by delta."""
    if delta == 0:
        return mf
    return TrapezoidMF(support=mf.support.shift(delta), core=mf.core.shift(delta))


def scale(mf: TrapezoidMF, alpha: float) -> TrapezoidMF:
    """Multiply all breakpoints by a positive factor."""
    if alpha <= 0:
        raise InvalidInputError(f"scale factor must be positive, got {alpha}")
    return TrapezoidMF(
        support=Interval(lo=mf.support.lo * alpha, hi=mf.support.hi * alpha),
        core=Interval(lo=mf.core.lo * alpha, hi=mf.core.hi * alpha),
    )


def measurement_trapezoids(measurement: Measurement, ramp: Optional[float] = None) -> List[TrapezoidMF]:
    """One trapezoid per dimension of a measurement."""
    return [
        make_trapezoid(value, error, ramp)
        for value, error in zip(measurement.values, measurement.errors)
    ]


def require_one_dimensional(measurements) -> None:
    """Reject empty inputs and anything that is not one-dimensional."""
    if not measurements:
        raise InvalidInputError("at least one measurement is required")
    wrong = [m.id for m in measurements if m.dim != 1]
    if wrong:
        logger.warning("rejecting multi-dimensional measurements ids={}", wrong[:5])
        raise InvalidInputError(f"one-dimensional measurements required, got d != 1 for {wrong[:5]}")

"""
Maximum-overlap consensus of measurements.

The consensus is the point or zone covered by the greatest number
(weight sum) of measurements, each measurement taken together with its
error. Crisp mode works with closed core boxes (value ± error per
dimension) and is solved exactly by an endpoint sweep in one and two
dimensions. Fuzzy mode maximises the aggregate membership curve. The
grid evaluator is the brute-force oracle and the fallback for d > 2.

Crisp zones are built canonically: for every distinct set of boxes that
covers a point of maximum depth, the zone is the intersection of those
boxes. Such zones are pairwise disjoint and never touch, and in one
dimension they are exactly the maximal intervals of the argmax region.
"""

import math
from functools import reduce
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from .aggregate import argmax_zones, build_curve
from .errors import GridTooLargeError, InvalidInputError, UnsupportedDimensionError
from .fuzzy_core import make_trapezoid, membership, membership_array, require_one_dimensional
from .models import (
    Box,
    Classification,
    ConsensusMode,
    ConsensusResult,
    Interval,
    Measurement,
)

DEFAULT_MIN_DEPTH = 2
DEFAULT_MEMBERSHIP_THRESHOLD = 1.0
DEFAULT_GRID_MAX_CELLS = 4_000_000
AXIS_NAMES = ("x", "y", "z")

CoverSet = FrozenSet[int]


def _check_dimension(measurements: Sequence[Measurement]) -> int:
    if not measurements:
        raise InvalidInputError("at least one measurement is required")
    dims = {m.dim for m in measurements}
    if len(dims) != 1:
        raise InvalidInputError(f"all measurements must share one dimension, got {sorted(dims)}")
    ids = [m.id for m in measurements]
    if len(set(ids)) != len(ids):
        raise InvalidInputError("measurement ids must be unique")
    return dims.pop()


def _bounds(measurements: Sequence[Measurement]) -> Tuple[List[Tuple[float, ...]], List[Tuple[float, ...]]]:
    lows = [tuple(v - e for v, e in zip(m.values, m.errors)) for m in measurements]
    highs = [tuple(v + e for v, e in zip(m.values, m.errors)) for m in measurements]
    return lows, highs


def _sweep_1d(
    indices: Iterable[int],
    lows: Sequence[float],
    highs: Sequence[float],
    weights: Sequence[float],
) -> Tuple[float, List[CoverSet]]:
    """
    Endpoint sweep over closed intervals.

    Openings are processed before closings at equal coordinates, and the
    depth is read between the two, so touching intervals overlap.
    """
    events = []
    for i in indices:
        events.append((lows[i], 0, i))
        events.append((highs[i], 1, i))
    events.sort()

    active = set()
    best = -math.inf
    covers: List[CoverSet] = []
    j = 0
    while j < len(events):
        coordinate = events[j][0]
        opened = False
        while j < len(events) and events[j][0] == coordinate and events[j][1] == 0:
            active.add(events[j][2])
            opened = True
            j += 1
        if opened:
            depth = math.fsum(weights[i] for i in active)
            if depth > best:
                best, covers = depth, [frozenset(active)]
            elif depth == best:
                covers.append(frozenset(active))
        while j < len(events) and events[j][0] == coordinate and events[j][1] == 1:
            active.discard(events[j][2])
            j += 1
    return best, covers


def _sweep_2d(
    lows: Sequence[Tuple[float, float]],
    highs: Sequence[Tuple[float, float]],
    weights: Sequence[float],
) -> Tuple[float, List[CoverSet]]:
    """Vertical line sweep over x; each x-slab runs the 1D sweep over y."""
    n = len(lows)
    events = sorted([(lows[i][0], 0, i) for i in range(n)] + [(highs[i][0], 1, i) for i in range(n)])
    y_lows = [lo[1] for lo in lows]
    y_highs = [hi[1] for hi in highs]

    active = set()
    best = -math.inf
    covers: List[CoverSet] = []
    j = 0
    while j < len(events):
        coordinate = events[j][0]
        opened = False
        while j < len(events) and events[j][0] == coordinate and events[j][1] == 0:
            active.add(events[j][2])
            opened = True
            j += 1
        if opened:
            depth, slab_covers = _sweep_1d(sorted(active), y_lows, y_highs, weights)
            if depth > best:
                best, covers = depth, slab_covers
            elif depth == best:
                covers.extend(slab_covers)
        while j < len(events) and events[j][0] == coordinate and events[j][1] == 1:
            active.discard(events[j][2])
            j += 1
    return best, covers


def _zones_from_covers(
    covers: Iterable[CoverSet],
    lows: Sequence[Tuple[float, ...]],
    highs: Sequence[Tuple[float, ...]],
) -> List[Box]:
    zones = set()
    for cover in set(covers):
        dim = len(lows[next(iter(cover))])
        zones.add(Box(intervals=tuple(
            Interval(lo=max(lows[i][k] for i in cover), hi=min(highs[i][k] for i in cover))
            for k in range(dim)
        )))
    return sorted(zones, key=Box.sort_key)


def _point_estimate(zones: Sequence[Box]) -> Tuple[float, ...]:
    # max() keeps the first of equal volumes, zones are already sorted
    return max(zones, key=lambda z: z.volume).centroid


def _partition(measurements: Sequence[Measurement], member_index: Iterable[int]) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
    chosen = set(member_index)
    members = tuple(m.id for i, m in enumerate(measurements) if i in chosen)
    outliers = tuple(m.id for i, m in enumerate(measurements) if i not in chosen)
    return members, outliers


def consensus_crisp(measurements: Sequence[Measurement]) -> ConsensusResult:
    """
    Exact crisp consensus of 1-d or 2-d measurements.

    Args:
        measurements: Measurements of one dimension d in {1, 2} with integer weights

    Returns:
        ConsensusResult with depth, canonical zones, member/outlier partition
    """
    dim = _check_dimension(measurements)
    if dim > 2:
        raise UnsupportedDimensionError(dim)
    non_integer = [m.id for m in measurements if not float(m.weight).is_integer()]
    if non_integer:
        raise InvalidInputError(f"crisp mode needs integer weights, got fractional weights for {non_integer[:5]}")

    lows, highs = _bounds(measurements)
    weights = [m.weight for m in measurements]
    if dim == 1:
        depth, covers = _sweep_1d(
            range(len(measurements)), [lo[0] for lo in lows], [hi[0] for hi in highs], weights
        )
    else:
        depth, covers = _sweep_2d(lows, highs, weights)

    zones = _zones_from_covers(covers, lows, highs)
    members, outliers = _partition(measurements, set().union(*covers))
    result = ConsensusResult(
        mode=ConsensusMode.CRISP,
        depth=depth,
        zones=tuple(zones),
        members=members,
        outliers=outliers,
        point_estimate=_point_estimate(zones),
    )
    logger.info(
        "consensus_crisp exit d={} n={} depth={} zones={} outliers={}",
        dim, len(measurements), depth, len(zones), len(outliers),
    )
    return result


def _max_membership_on(measurement: Measurement, zone: Interval) -> float:
    mf = make_trapezoid(measurement.values[0], measurement.errors[0])
    if mf.core.intersects(zone):
        return 1.0
    return max(membership(mf, zone.lo), membership(mf, zone.hi))


def consensus_fuzzy_1d(
    measurements: Sequence[Measurement],
    membership_threshold: float = DEFAULT_MEMBERSHIP_THRESHOLD,
) -> ConsensusResult:
    """
    Fuzzy consensus: the argmax zones of the aggregate membership curve.

    A measurement is a member when its membership reaches the threshold
    somewhere on a zone (threshold 1.0: its core touches a zone).
    """
    require_one_dimensional(measurements)
    _check_dimension(measurements)

    height, intervals = argmax_zones(build_curve(measurements))
    zones = [Box(intervals=(iv,)) for iv in intervals]
    member_index = [
        i for i, m in enumerate(measurements)
        if any(_max_membership_on(m, iv) >= membership_threshold for iv in intervals)
    ]
    members, outliers = _partition(measurements, member_index)
    result = ConsensusResult(
        mode=ConsensusMode.FUZZY,
        depth=height,
        zones=tuple(zones),
        members=members,
        outliers=outliers,
        point_estimate=_point_estimate(zones),
    )
    logger.info(
        "consensus_fuzzy_1d exit n={} depth={} zones={} outliers={}",
        len(measurements), height, [(iv.lo, iv.hi) for iv in intervals], len(outliers),
    )
    return result


def _grid_axis(breakpoints: np.ndarray, resolution: int) -> np.ndarray:
    if len(breakpoints) == 1:
        return breakpoints
    fractions = np.arange(resolution) / resolution
    inner = (breakpoints[:-1, None] + np.diff(breakpoints)[:, None] * fractions[None, :]).ravel()
    # subdivision points are recomputed, breakpoints themselves stay exact
    inner[::resolution] = breakpoints[:-1]
    return np.append(inner, breakpoints[-1])


def _resolutions(resolution: Union[int, Sequence[int]], dim: int) -> List[int]:
    per_dim = [resolution] * dim if isinstance(resolution, int) else list(resolution)
    if len(per_dim) != dim:
        raise InvalidInputError(f"expected {dim} resolutions, got {len(per_dim)}")
    if any(r < 2 for r in per_dim):
        raise InvalidInputError("grid resolution must be at least 2 per dimension")
    return per_dim


def consensus_grid(
    measurements: Sequence[Measurement],
    resolution: Union[int, Sequence[int]] = 2,
    fuzzy: bool = False,
    max_cells: int = DEFAULT_GRID_MAX_CELLS,
    membership_threshold: float = DEFAULT_MEMBERSHIP_THRESHOLD,
) -> ConsensusResult:
    """
    Brute-force consensus on the grid of all breakpoints and their subdivisions.

    Args:
        measurements: Measurements of any common dimension
        resolution: Parts each gap between consecutive breakpoints is cut into (2 = midpoints)
        fuzzy: Sum memberships (minimum over dimensions) instead of counting boxes
        max_cells: Upper bound on the number of grid cells
        membership_threshold: Member threshold in fuzzy mode

    Returns:
        ConsensusResult; in crisp mode depth and zones are exact
    """
    dim = _check_dimension(measurements)
    per_dim = _resolutions(resolution, dim)
    lows, highs = _bounds(measurements)
    n = len(measurements)

    axes = []
    for k in range(dim):
        breakpoints = np.unique(np.array(
            [v - 2 * e for m in measurements for v, e in [(m.values[k], m.errors[k])]]
            + [lows[i][k] for i in range(n)]
            + [highs[i][k] for i in range(n)]
            + [v + 2 * e for m in measurements for v, e in [(m.values[k], m.errors[k])]],
            dtype=float,
        ))
        axes.append(_grid_axis(breakpoints, per_dim[k]))

    cells = math.prod(len(axis) for axis in axes)
    if cells > max_cells:
        raise GridTooLargeError(cells, max_cells)

    weights = np.array([m.weight for m in measurements], dtype=float)
    if fuzzy:
        grades = [
            np.array([membership_array(make_trapezoid(m.values[k], m.errors[k]), axes[k]) for m in measurements])
            for k in range(dim)
        ]
        combine = np.minimum.outer
    else:
        grades = [
            ((np.array([lo[k] for lo in lows])[:, None] <= axes[k][None, :])
             & (axes[k][None, :] <= np.array([hi[k] for hi in highs])[:, None])).astype(float)
            for k in range(dim)
        ]
        combine = np.multiply.outer

    depth_grid = np.zeros(tuple(len(axis) for axis in axes))
    for i in range(n):
        depth_grid += weights[i] * reduce(combine, [grades[k][i] for k in range(dim)])

    depth = float(depth_grid.max())
    if fuzzy:
        at_max = np.isclose(depth_grid, depth, rtol=1e-12, atol=1e-12)
    else:
        at_max = depth_grid == depth
    argmax_points = np.argwhere(at_max)

    if fuzzy:
        zones = _fuzzy_grid_zones(axes, at_max, argmax_points)
        member_mask = np.zeros(n, dtype=bool)
        for point in argmax_points:
            member_mask |= np.minimum.reduce([grades[k][:, point[k]] for k in range(dim)]) >= membership_threshold
        member_index = np.flatnonzero(member_mask).tolist()
    else:
        inside = [grades[k] > 0 for k in range(dim)]
        covers = {
            frozenset(np.flatnonzero(np.logical_and.reduce([inside[k][:, point[k]] for k in range(dim)])).tolist())
            for point in argmax_points
        }
        zones = _zones_from_covers(covers, lows, highs)
        member_index = set().union(*covers)

    members, outliers = _partition(measurements, member_index)
    result = ConsensusResult(
        mode=ConsensusMode.GRID,
        depth=depth,
        zones=tuple(zones),
        members=members,
        outliers=outliers,
        point_estimate=_point_estimate(zones),
    )
    logger.info(
        "consensus_grid exit d={} cells={} fuzzy={} depth={} zones={}",
        dim, cells, fuzzy, depth, len(zones),
    )
    return result


def _fuzzy_grid_zones(axes: List[np.ndarray], at_max: np.ndarray, argmax_points: np.ndarray) -> List[Box]:
    """1-d: runs of consecutive argmax grid points; d > 1: the argmax grid points themselves."""
    if len(axes) == 1:
        axis = axes[0]
        zones = []
        start = None
        for j, hit in enumerate(at_max):
            if hit and start is None:
                start = j
            if not hit and start is not None:
                zones.append(Box(intervals=(Interval(lo=float(axis[start]), hi=float(axis[j - 1])),)))
                start = None
        if start is not None:
            zones.append(Box(intervals=(Interval(lo=float(axis[start]), hi=float(axis[-1])),)))
        return zones
    return sorted(
        {Box(intervals=tuple(Interval(lo=float(axes[k][p[k]]), hi=float(axes[k][p[k]])) for k in range(len(axes))))
         for p in argmax_points},
        key=Box.sort_key,
    )


def consensus(
    measurements: Sequence[Measurement],
    mode: ConsensusMode = ConsensusMode.CRISP,
    membership_threshold: float = DEFAULT_MEMBERSHIP_THRESHOLD,
    resolution: Union[int, Sequence[int]] = 2,
    max_cells: int = DEFAULT_GRID_MAX_CELLS,
) -> ConsensusResult:
    """Dispatch to the crisp sweep, the fuzzy curve or the grid evaluator."""
    mode = ConsensusMode(mode)
    if mode == ConsensusMode.CRISP:
        return consensus_crisp(measurements)
    if mode == ConsensusMode.FUZZY:
        return consensus_fuzzy_1d(measurements, membership_threshold=membership_threshold)
    return consensus_grid(measurements, resolution=resolution, max_cells=max_cells)


def classify(
    measurements: Sequence[Measurement],
    result: ConsensusResult,
    min_depth: float = DEFAULT_MIN_DEPTH,
) -> Classification:
    """
    Split measurements into consistent and erroneous ones.

    Below min_depth there is no consensus: everything is consistent and the
    no_consensus flag is raised.
    """
    ids = [m.id for m in measurements]
    if set(ids) != set(result.members) | set(result.outliers):
        raise InvalidInputError("consensus result was not produced from these measurements")

    if result.depth < min_depth:
        logger.warning("no consensus: depth {} below minimum depth {}", result.depth, min_depth)
        return Classification(consistent=tuple(ids), erroneous=(), no_consensus=True)

    outliers = set(result.outliers)
    return Classification(
        consistent=tuple(i for i in ids if i not in outliers),
        erroneous=tuple(i for i in ids if i in outliers),
    )


def expel_outliers(
    measurements: Sequence[Measurement],
    result: ConsensusResult,
    min_depth: float = DEFAULT_MIN_DEPTH,
    membership_threshold: float = DEFAULT_MEMBERSHIP_THRESHOLD,
    resolution: Union[int, Sequence[int]] = 2,
    max_cells: int = DEFAULT_GRID_MAX_CELLS,
) -> Tuple[List[Measurement], ConsensusResult]:
    """
    Drop erroneous measurements and recompute the consensus in the same mode.

    membership_threshold, resolution and max_cells must be the settings the
    result was computed with; they are passed on to the recomputation.
    """
    verdict = classify(measurements, result, min_depth)
    if verdict.no_consensus or not verdict.erroneous:
        return list(measurements), result
    kept_ids = set(verdict.consistent)
    kept = [m for m in measurements if m.id in kept_ids]
    logger.info("expel_outliers removed={}", list(verdict.erroneous))
    recomputed = consensus(
        kept,
        mode=result.mode,
        membership_threshold=membership_threshold,
        resolution=resolution,
        max_cells=max_cells,
    )
    return kept, recomputed


def result_status_frame(measurements: Sequence[Measurement], result: ConsensusResult) -> pd.DataFrame:
    """`id,status` rows in input order."""
    return pd.DataFrame({
        "id": [m.id for m in measurements],
        "status": [result.status_of(m.id).value for m in measurements],
    })


def result_summary_frame(
    result: ConsensusResult,
    verdict: Optional[Classification] = None,
    axes: Optional[Sequence[str]] = None,
) -> pd.DataFrame:
    """One summary row per zone: depth, zone_lo_*, zone_hi_*, estimate_*, no_consensus."""
    dim = len(result.point_estimate)
    names = list(axes) if axes else [AXIS_NAMES[k] if k < len(AXIS_NAMES) else f"d{k + 1}" for k in range(dim)]
    rows: List[Dict[str, object]] = []
    for zone in result.zones:
        row: Dict[str, object] = {"depth": result.depth}
        row.update({f"zone_lo_{name}": lo for name, lo in zip(names, zone.lows)})
        row.update({f"zone_hi_{name}": hi for name, hi in zip(names, zone.highs)})
        row.update({f"estimate_{name}": est for name, est in zip(names, result.point_estimate)})
        row["no_consensus"] = bool(verdict.no_consensus) if verdict else False
        rows.append(row)
    return pd.DataFrame(rows)


"""
Seeded synthetic data.

Every generator draws from numpy.random.default_rng(seed), the PCG64 bit
generator, so outputs are reproducible across platforms for a fixed
numpy version.
"""

from typing import List, Optional, Tuple

import numpy as np

from .errors import InvalidInputError
from .models import Measurement, SurveyTable, TimeSeriesPoint

GENERATOR = "numpy.random.default_rng(PCG64) + Generator.normal"


def normal_sample(n: int, mu: float, sigma: float, seed: int) -> np.ndarray:
    """n draws from N(mu, sigma)."""
    if n < 1:
        raise InvalidInputError(f"sample size must be at least 1, got {n}")
    if sigma <= 0:
        raise InvalidInputError(f"sigma must be positive, got {sigma}")
    return np.random.default_rng(seed).normal(mu, sigma, size=n)


def random_instance(seed: int, d: int, n: Optional[int] = None) -> List[Measurement]:
    """Up to 20 measurements with values in [0, 10] and errors in [0.05, 1]."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 21)) if n is None else n
    values = rng.uniform(0.0, 10.0, size=(n, d))
    errors = rng.uniform(0.05, 1.0, size=(n, d))
    return [
        Measurement(id=f"m{i + 1}", values=tuple(map(float, values[i])), errors=tuple(map(float, errors[i])))
        for i in range(n)
    ]


def clustered_with_contaminants(
    seed: int,
    d: int,
    k: Optional[int] = None,
) -> Tuple[List[Measurement], List[Measurement]]:
    """
    A coherent cluster plus k contaminants.

    Cluster cores all contain the cluster center, so its depth equals its
    size (3 to 7). Contaminants lie beyond x = 20, five apart, with errors
    below 1, so their cores are disjoint from each other and from the cluster.
    """
    rng = np.random.default_rng(seed)
    size = int(rng.integers(3, 8))
    k = int(rng.integers(3, 7)) if k is None else k
    center = rng.uniform(3.0, 7.0, size=d)

    cluster = [
        Measurement(
            id=f"c{i + 1}",
            values=tuple(map(float, center + rng.uniform(-0.2, 0.2, size=d))),
            errors=tuple(map(float, rng.uniform(0.3, 0.5, size=d))),
        )
        for i in range(size)
    ]
    contaminants = []
    for j in range(k):
        values = rng.uniform(0.0, 10.0, size=d)
        values[0] = 20.0 + 5.0 * j
        contaminants.append(Measurement(
            id=f"x{j + 1}",
            values=tuple(map(float, values)),
            errors=tuple(map(float, rng.uniform(0.05, 1.0, size=d))),
        ))
    return cluster, contaminants


def monthly_series(
    n_months: int = 113,
    seed: int = 0,
    baseline: float = 100.0,
    dip_month: Optional[int] = None,
) -> Tuple[List[TimeSeriesPoint], int]:
    """
    Constant monthly counts with one month moved forward.

    Month k loses an amount d that month k + 1 gains, so the raw series has
    a spike at k + 1. Returns the series and k.
    """
    if n_months < 5:
        raise InvalidInputError("the dip-then-spike series needs at least 5 months")
    rng = np.random.default_rng(seed)
    k = int(rng.integers(3, n_months - 2)) if dip_month is None else dip_month
    if not 2 <= k <= n_months - 2:
        raise InvalidInputError(f"dip month must lie in [2, {n_months - 2}], got {k}")
    moved = float(rng.integers(1, int(baseline)))

    counts = {t: baseline for t in range(1, n_months + 1)}
    counts[k] -= moved
    counts[k + 1] += moved
    return [TimeSeriesPoint(t=float(t), count=c) for t, c in counts.items()], k


def synthetic_survey(
    seed: int,
    n_coherent: int = 20,
    n_random: int = 4,
    n_questions: int = 9,
    scale_min: int = 1,
    scale_max: int = 7,
) -> Tuple[SurveyTable, SurveyTable]:
    """
    Coherent respondents plus uniform-random ones.

    Per question a center is drawn away from the scale ends; coherent
    respondents answer center - 1, center or center + 1 with at least
    n_random + 1 answers on each side, so with grade error 1 the consensus
    is the single point {center} with or without the random respondents.

    Returns:
        (clean table, contaminated table); random respondents are labelled R1..Rn
    """
    side = n_random + 1
    if n_coherent < 2 * side:
        raise InvalidInputError(f"{n_random} random respondents need at least {2 * side} coherent ones")
    if scale_max - scale_min < 2:
        raise InvalidInputError("the grade scale needs at least three grades")

    rng = np.random.default_rng(seed)
    coherent = [f"C{i + 1:02d}" for i in range(n_coherent)]
    columns = []
    for _ in range(n_questions):
        center = int(rng.integers(scale_min + 1, scale_max))
        lower = int(rng.integers(side, n_coherent - side + 1))
        upper = int(rng.integers(side, n_coherent - lower + 1))
        answers = np.array([center - 1] * lower + [center + 1] * upper + [center] * (n_coherent - lower - upper))
        columns.append(rng.permutation(answers))
    random_rows = rng.integers(scale_min, scale_max + 1, size=(n_random, n_questions))

    coherent_grades = tuple(tuple(int(col[i]) for col in columns) for i in range(n_coherent))
    random_grades = tuple(tuple(int(g) for g in row) for row in random_rows)
    questions = tuple(f"Q{q + 1}" for q in range(n_questions))

    clean = SurveyTable(
        respondents=tuple(coherent), questions=questions, grades=coherent_grades,
        scale_min=scale_min, scale_max=scale_max,
    )
    contaminated = SurveyTable(
        respondents=tuple(coherent) + tuple(f"R{j + 1}" for j in range(n_random)),
        questions=questions,
        grades=coherent_grades + random_grades,
        scale_min=scale_min, scale_max=scale_max,
    )
    return clean, contaminated

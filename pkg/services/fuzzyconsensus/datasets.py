"""
Built-in three-sensor example.

Sensors S1-S3 agree on (X, Y) = (2, 1) within the error 0.2; S4-S6 are
faulty readings added afterwards. Reference values are the expected
before/after estimates for this data, rounded to two decimals.
"""

from typing import Dict, List, Tuple

from .models import Measurement

SENSOR_ERROR = 0.2

CLEAN_IDS = ("S1", "S2", "S3")
FAULTY_IDS = ("S4", "S5", "S6")

_READINGS: Dict[str, Tuple[float, float]] = {
    "S1": (1.9, 0.9),
    "S2": (2.0, 1.0),
    "S3": (2.1, 1.1),
    "S4": (4.0, 3.0),
    "S5": (6.0, 5.0),
    "S6": (7.0, 4.0),
}

# variable -> estimator -> (before, after)
REFERENCE_TARGETS: Dict[str, Dict[str, Tuple[float, float]]] = {
    "x": {
        "consensus": (2.0, 2.0),
        "mean": (2.0, 3.83),
        "median": (2.0, 3.05),
        "huber": (2.0, 3.23),
        "tukey": (2.0, 3.05),
        "hampel": (2.0, 3.43),
        "andrews": (2.0, 3.05),
    },
    "y": {
        "consensus": (1.0, 1.0),
        "mean": (1.0, 2.50),
        "median": (1.0, 2.05),
        "huber": (1.0, 2.23),
        "tukey": (1.0, 2.30),
        "hampel": (1.0, 2.37),
        "andrews": (1.0, 2.31),
    },
}


def sensor_measurements(contaminated: bool = True, dims: Tuple[str, ...] = ("x", "y")) -> List[Measurement]:
    """Sensor readings as measurements over the requested variables."""
    ids = CLEAN_IDS + FAULTY_IDS if contaminated else CLEAN_IDS
    columns = [("x", "y").index(d) for d in dims]
    return [
        Measurement(
            id=sensor,
            values=tuple(_READINGS[sensor][c] for c in columns),
            errors=tuple(SENSOR_ERROR for _ in columns),
        )
        for sensor in ids
    ]


def sensor_samples(contaminated: bool = True) -> Dict[str, List[float]]:
    """Variable -> sample, the layout robustness_report takes."""
    ids = CLEAN_IDS + FAULTY_IDS if contaminated else CLEAN_IDS
    return {
        "x": [_READINGS[sensor][0] for sensor in ids],
        "y": [_READINGS[sensor][1] for sensor in ids],
    }

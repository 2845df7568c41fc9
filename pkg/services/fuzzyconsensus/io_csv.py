"""
CSV input and output.

Readers accept a path or CSV text, skip whole `#` comment lines and
report problems as ParseError with the 1-based data row (header
excluded) and the column name. Every data row must have exactly as many
fields as the header. Writers prepend `#` metadata lines.
"""

import csv
import math
import sys
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd
from loguru import logger

from .errors import ParseError
from .models import Measurement, TimeSeriesPoint

Source = Union[str, Path]

ID_COLUMN = "id"
WEIGHT_COLUMN = "weight"
ERROR_PREFIX = "e_"


def _read_text(source: Source) -> str:
    """CSV text of source; a string without a newline is a file path."""
    if isinstance(source, str) and "\n" in source:
        return source
    if not str(source):
        raise ParseError("input is empty")
    path = Path(source)
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ParseError(f"input file not found: {path}") from exc
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _data_lines(text: str) -> List[str]:
    # '#' only starts a comment at the beginning of a line
    return [line for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]


def read_frame(source: Source, required: Sequence[str] = ()) -> pd.DataFrame:
    """Read a CSV as strings; comment lines and blank lines are ignored."""
    lines = _data_lines(_read_text(source))
    if not lines:
        raise ParseError("input is empty")
    try:
        rows = list(csv.reader(lines))
    except csv.Error as exc:
        raise ParseError(f"malformed CSV: {exc}") from exc

    header = [c.strip() for c in rows[0]]
    missing = [c for c in required if c not in header]
    if missing:
        raise ParseError(f"missing column(s) {missing}, header is {header}", row=0)
    duplicated = sorted({c for c in header if header.count(c) > 1})
    if duplicated:
        raise ParseError(f"duplicate column(s) {duplicated}", row=0)

    data = rows[1:]
    if not data:
        raise ParseError("input has a header but no data rows")
    for row, fields in enumerate(data, start=1):
        if len(fields) < len(header):
            raise ParseError(
                f"expected {len(header)} fields, got {len(fields)}", row=row, column=header[len(fields)]
            )
        if len(fields) > len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(fields)}", row=row)
    return pd.DataFrame(data, columns=header, dtype=str)


def cell_text(record: dict, column: str) -> str:
    value = record.get(column, "")
    return value.strip() if isinstance(value, str) else ""


def parse_float(cell: str, row: int, column: str) -> float:
    if not isinstance(cell, str):
        raise ParseError(f"not a number: {cell!r}", row=row, column=column)
    try:
        value = float(cell.strip())
    except ValueError:
        raise ParseError(f"not a number: {cell!r}", row=row, column=column) from None
    if not math.isfinite(value):
        raise ParseError(f"not a finite number: {cell!r}", row=row, column=column)
    return value


def read_values(source: Source, column: str = "x") -> List[float]:
    """One real per row from the `x` column."""
    frame = read_frame(source, required=[column])
    return [parse_float(cell, row, column) for row, cell in enumerate(frame[column], start=1)]


def _broadcast(default_error: Optional[Sequence[float]], dim: int) -> Optional[List[float]]:
    if default_error is None:
        return None
    errors = list(default_error)
    if len(errors) == 1:
        return errors * dim
    if len(errors) != dim:
        raise ParseError(f"--error has {len(errors)} components but the data has {dim} dimensions")
    return errors


def read_measurement_table(
    source: Source,
    default_error: Optional[Sequence[float]] = None,
) -> Tuple[List[str], List[Measurement]]:
    """
    Read `id,x[,y],e_x[,e_y][,weight]` rows.

    Value columns are every column other than id, weight and e_*. A blank
    or missing e_<name> falls back to default_error (one value for all
    dimensions or one per dimension).
    """
    frame = read_frame(source)
    value_columns = [
        c for c in frame.columns
        if c not in (ID_COLUMN, WEIGHT_COLUMN) and not c.startswith(ERROR_PREFIX)
    ]
    if not value_columns:
        raise ParseError(f"no value columns in header {list(frame.columns)}", row=0)
    defaults = _broadcast(default_error, len(value_columns))

    measurements = []
    for row, record in enumerate(frame.to_dict(orient="records"), start=1):
        label = cell_text(record, ID_COLUMN) or f"m{row}"
        values = tuple(parse_float(record[c], row, c) for c in value_columns)
        errors = []
        for k, c in enumerate(value_columns):
            cell = cell_text(record, ERROR_PREFIX + c)
            if cell:
                errors.append(parse_float(cell, row, ERROR_PREFIX + c))
            elif defaults is not None:
                errors.append(defaults[k])
            else:
                raise ParseError("no error given and no --error default", row=row, column=ERROR_PREFIX + c)
        if any(e < 0 for e in errors):
            raise ParseError("measurement error must be non-negative", row=row)
        weight_cell = cell_text(record, WEIGHT_COLUMN)
        weight = parse_float(weight_cell, row, WEIGHT_COLUMN) if weight_cell else 1.0
        if weight <= 0:
            raise ParseError("weight must be positive", row=row, column=WEIGHT_COLUMN)
        measurements.append(Measurement(id=label, values=values, errors=tuple(errors), weight=weight))

    ids = [m.id for m in measurements]
    duplicates = sorted({i for i in ids if ids.count(i) > 1})
    if duplicates:
        raise ParseError(f"duplicate ids {duplicates[:5]}", column=ID_COLUMN)
    logger.debug("read_measurements n={} columns={}", len(measurements), value_columns)
    return value_columns, measurements


def read_measurements(source: Source, default_error: Optional[Sequence[float]] = None) -> List[Measurement]:
    return read_measurement_table(source, default_error)[1]


def read_timeseries(source: Source) -> List[TimeSeriesPoint]:
    """`t,count` rows; duplicate time stamps are rejected."""
    frame = read_frame(source, required=["t", "count"])
    points: List[TimeSeriesPoint] = []
    seen = set()
    for row, (t_cell, count_cell) in enumerate(zip(frame["t"], frame["count"]), start=1):
        t = parse_float(t_cell, row, "t")
        if t in seen:
            raise ParseError(f"duplicate time stamp {t}", row=row, column="t")
        seen.add(t)
        count = parse_float(count_cell, row, "count")
        if count < 0:
            raise ParseError("count must be non-negative", row=row, column="count")
        points.append(TimeSeriesPoint(t=t, count=count))
    return points


def measurements_to_frame(measurements: Sequence[Measurement], axes: Sequence[str] = ("x", "y", "z")) -> pd.DataFrame:
    dim = measurements[0].dim
    names = list(axes[:dim]) + [f"d{k + 1}" for k in range(len(axes), dim)]
    data = {ID_COLUMN: [m.id for m in measurements]}
    for k, name in enumerate(names):
        data[name] = [m.values[k] for m in measurements]
    for k, name in enumerate(names):
        data[ERROR_PREFIX + name] = [m.errors[k] for m in measurements]
    return pd.DataFrame(data)


def render_csv(frame: pd.DataFrame, metadata: Iterable[str] = ()) -> str:
    """Metadata as `# ` lines followed by the frame; float text is repr-exact."""
    header = "".join(f"# {line}\n" for line in metadata)
    return header + frame.to_csv(index=False, lineterminator="\n")


def write_text(text: str, path: Optional[Source] = None) -> None:
    """Write to path, or to stdout when path is None or '-'."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    Path(path).write_text(text, encoding="utf-8")
    logger.info("wrote {}", path)

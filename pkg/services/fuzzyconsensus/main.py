"""
Command-line front end for fuzzyconsensus.

Subcommands read CSV, run one analysis and write CSV (stdout by default)
plus optional SVG. Logs go to stderr. Exit codes: 0 success, 1 input or
parse error, 2 unsupported request, 3 numerical or internal failure.
"""

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import ValidationError

from shared import BaseTool

from . import TOOL_NAME, __version__
from .aggregate import (
    build_curve,
    curve_to_frame,
    histogram,
    integral,
    local_maxima,
    normal_pdf,
    smooth_timeseries,
)
from .consensus import classify, consensus, result_summary_frame
from .datasets import REFERENCE_TARGETS, sensor_measurements
from .errors import FuzzyConsensusError, InvalidInputError
from .estimators import check_reference, deviations_exceed_median, report_to_frame, robustness_report
from .io_csv import (
    measurements_to_frame,
    read_measurement_table,
    read_timeseries,
    read_values,
    render_csv,
    write_text,
)
from .models import (
    ConsensusMode,
    HistogramSpec,
    Measurement,
    MemberStatus,
    OutputFormat,
    RunConfig,
    ToolSettings,
)
from .survey import (
    analyze_survey,
    load_survey,
    question_summary_frame,
    survey_estimator_comparison,
    verdicts_frame,
)
from .svg import render_svg
from .synthetic import GENERATOR, normal_sample


def _floats(text: str) -> Tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    return values


def _normal(text: str) -> Tuple[float, float]:
    values = _floats(text)
    if len(values) != 2 or values[1] <= 0:
        raise argparse.ArgumentTypeError(f"expected MU,SIGMA with SIGMA > 0, got {text!r}")
    return values


class ToolArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with the input-error code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(InvalidInputError.exit_code, f"{self.prog}: error: {message}\n")


class FuzzyConsensusTool(BaseTool):
    """Resolves settings and runs one subcommand."""

    def __init__(self, verbosity: int = 0):
        super().__init__(TOOL_NAME, __version__, verbosity=verbosity)

    def resolve_settings(self, args: argparse.Namespace) -> ToolSettings:
        """Explicit flag, then FUZZYCONS_* environment, then built-in default."""

        def pick(flag: str, value):
            explicit = getattr(args, flag, None)
            return explicit if explicit is not None else value

        return ToolSettings(
            grid_max_cells=pick("max_cells", self.get_env_int("GRID_MAX_CELLS", 4_000_000)),
            min_depth=pick("min_depth", self.get_env_float("MIN_DEPTH", 2.0)),
            membership_threshold=pick("membership_threshold", self.get_env_float("MEMBERSHIP_THRESHOLD", 1.0)),
            irls_tol=self.get_env_float("IRLS_TOL", 1e-10),
            irls_max_iter=self.get_env_int("IRLS_MAX_ITER", 200),
            svg_width=pick("width", self.get_env_int("SVG_WIDTH", 800)),
            svg_height=pick("height", self.get_env_int("SVG_HEIGHT", 500)),
            metrics_file=pick("metrics_file", self.get_env_var("METRICS_FILE")),
        )


def run_config(args: argparse.Namespace, settings: ToolSettings) -> RunConfig:
    flags = {k: v for k, v in vars(args).items() if k not in ("handler", "verbose")}
    flags["settings"] = settings.model_dump()
    inputs = tuple(str(getattr(args, name)) for name in ("input", "contaminated") if getattr(args, name, None))
    error = getattr(args, "error", None)
    return RunConfig(
        subcommand=args.command,
        inputs=inputs,
        error=tuple(error) if error is not None else None,
        mode=getattr(args, "mode", None),
        normalize=bool(getattr(args, "normalize", False)),
        seed=getattr(args, "seed", None),
        output_format=OutputFormat.SVG if getattr(args, "svg", None) else OutputFormat.CSV,
        output=getattr(args, "output", None),
        flags=flags,
    )


def _metadata(config: RunConfig, extra: Optional[Dict[str, str]] = None) -> List[str]:
    fields = {"generator": GENERATOR}
    fields.update(extra or {})
    return config.metadata_lines(TOOL_NAME, __version__, fields)


def _emit(frame: pd.DataFrame, config: RunConfig, path: Optional[str], extra: Optional[Dict[str, str]] = None) -> None:
    write_text(render_csv(frame, _metadata(config, extra)), path)


def cmd_gen(args, settings: ToolSettings, config: RunConfig) -> None:
    values = normal_sample(args.n, args.mu, args.sigma, args.seed)
    _emit(pd.DataFrame({"x": values}), config, args.output)


def _curve_svg(
    curve_frame: pd.DataFrame,
    settings: ToolSettings,
    label: str,
    overlays: Sequence[Tuple[str, np.ndarray, np.ndarray]] = (),
    bars=None,
    title: Optional[str] = None,
) -> str:
    series = [(label, curve_frame["x"].to_numpy(), curve_frame["value"].to_numpy())]
    series.extend(overlays)
    return render_svg(series, width=settings.svg_width, height=settings.svg_height, bars=bars, title=title)


def cmd_curve(args, settings: ToolSettings, config: RunConfig) -> None:
    values = read_values(args.input)
    if len(args.error) != 1:
        raise InvalidInputError("curve takes a single --error value")
    measurements = [
        Measurement(id=f"v{i + 1}", values=(v,), errors=(args.error[0],))
        for i, v in enumerate(values)
    ]
    curve = build_curve(measurements, normalize=args.normalize)
    frame = curve_to_frame(curve)
    peaks = local_maxima(curve)
    _emit(frame, config, args.output, {"local_maxima": str(len(peaks))})

    if args.svg:
        # overlays share the curve's area so the shapes are comparable
        area = integral(curve) or 1.0
        bins = histogram(values, HistogramSpec(bin_count=args.bins))
        bars = [(iv, area * count / (len(values) * iv.width)) for iv, count in bins]
        overlays = []
        if args.normal:
            mu, sigma = args.normal
            xs = np.linspace(mu - 4 * sigma, mu + 4 * sigma, 200)
            overlays.append((f"N({mu:g}, {sigma:g})", xs, area * normal_pdf(xs, mu, sigma)))
        write_text(_curve_svg(frame, settings, "aggregate membership", overlays, bars, args.title), args.svg)


def cmd_consensus(args, settings: ToolSettings, config: RunConfig) -> None:
    axes, measurements = read_measurement_table(args.input, args.error)
    result = consensus(
        measurements,
        mode=ConsensusMode(args.mode),
        membership_threshold=settings.membership_threshold,
        resolution=args.resolution,
        max_cells=settings.grid_max_cells,
    )
    verdict = classify(measurements, result, min_depth=settings.min_depth)
    erroneous = set(verdict.erroneous)
    status = pd.DataFrame({
        "id": [m.id for m in measurements],
        "status": [
            (MemberStatus.OUTLIER if m.id in erroneous else MemberStatus.MEMBER).value
            for m in measurements
        ],
    })
    summary = result_summary_frame(result, verdict, axes)
    summary_line = {
        "depth": repr(result.depth),
        "zones": str(len(result.zones)),
        "estimate": ",".join(repr(v) for v in result.point_estimate),
        "no_consensus": str(verdict.no_consensus).lower(),
    }
    _emit(status, config, args.output, summary_line)
    if args.summary:
        _emit(summary, config, args.summary)


def _common_errors(measurements: Sequence[Measurement], axes: Sequence[str]) -> Dict[str, float]:
    errors = {}
    for k, axis in enumerate(axes):
        distinct = {m.errors[k] for m in measurements}
        if len(distinct) != 1:
            raise InvalidInputError(f"report needs one common error per variable, {axis} has {sorted(distinct)}")
        errors[axis] = distinct.pop()
    return errors


def cmd_report(args, settings: ToolSettings, config: RunConfig) -> None:
    axes, clean = read_measurement_table(args.input, args.error)
    contaminated_axes, contaminated = read_measurement_table(args.contaminated, args.error)
    if axes != contaminated_axes:
        raise InvalidInputError(f"variables differ: {axes} vs {contaminated_axes}")
    errors = _common_errors(clean + contaminated, axes)

    report = robustness_report(
        {axis: [m.values[k] for m in clean] for k, axis in enumerate(axes)},
        {axis: [m.values[k] for m in contaminated] for k, axis in enumerate(axes)},
        error=errors,
        tol=settings.irls_tol,
        max_iter=settings.irls_max_iter,
    )
    extra = {}
    if args.check_targets:
        misses = check_reference(report, REFERENCE_TARGETS)
        extra["reference_misses"] = str(len(misses))
        extra["m_deviations_exceed_median"] = str(deviations_exceed_median(report)).lower()
    _emit(report_to_frame(report), config, args.output, extra)


def cmd_timeseries(args, settings: ToolSettings, config: RunConfig) -> None:
    points = read_timeseries(args.input)
    curve = smooth_timeseries(points, args.time_error, normalize=args.normalize)
    frame = curve_to_frame(curve)
    peaks = local_maxima(curve)
    _emit(frame, config, args.output, {"local_maxima": json.dumps([[p.lo, p.hi] for p in peaks])})
    if args.svg:
        ordered = sorted(points, key=lambda p: p.t)
        raw = ("counts", np.array([p.t for p in ordered]), np.array([p.count for p in ordered]))
        write_text(_curve_svg(frame, settings, "smoothed", [raw], title=args.title), args.svg)


def cmd_survey(args, settings: ToolSettings, config: RunConfig) -> None:
    table = load_survey(args.input, scale_min=args.scale_min, scale_max=args.scale_max)
    analysis = analyze_survey(
        table,
        grade_error=args.grade_error,
        flag_threshold=args.flag_threshold,
        min_answers=args.min_answers,
        membership_threshold=settings.membership_threshold,
        min_depth=settings.min_depth,
    )
    extra = {"flagged": ",".join(analysis.removed) or "none"}
    if args.contaminated:
        contaminated = load_survey(args.contaminated, scale_min=args.scale_min, scale_max=args.scale_max)
        comparison = survey_estimator_comparison(table, contaminated, grade_error=args.grade_error)
        extra["max_deviation"] = json.dumps(comparison.max_deviation, sort_keys=True)
        if args.comparison:
            _emit(report_to_frame(comparison.questions), config, args.comparison)
    _emit(verdicts_frame(analysis), config, args.output, extra)
    if args.summary:
        _emit(question_summary_frame(analysis, table.questions), config, args.summary)


def cmd_example(args, settings: ToolSettings, config: RunConfig) -> None:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, contaminated in (("clean.csv", False), ("contaminated.csv", True)):
        frame = measurements_to_frame(sensor_measurements(contaminated=contaminated))
        write_text(render_csv(frame, _metadata(config)), out_dir / name)


def build_parser() -> argparse.ArgumentParser:
    parser = ToolArgumentParser(
        prog=TOOL_NAME,
        description="Fuzzy measurement curves, max-overlap consensus and robust estimators.",
        epilog=f"Random numbers: {GENERATOR}.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logs")
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {__version__}")
    parser.add_argument("--metrics-file", default=None, help="write Prometheus metrics to this file")
    sub = parser.add_subparsers(dest="command", required=True)

    def output(p):
        p.add_argument("-o", "--output", default=None, help="output CSV path (stdout when omitted)")

    p = sub.add_parser("gen", help="seeded normal sample")
    p.add_argument("--n", type=int, default=250)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=42)
    output(p)
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("curve", help="aggregate membership curve of a values CSV")
    p.add_argument("input", type=Path)
    p.add_argument("--error", type=_floats, required=True, help="measurement error of every value")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--bins", type=int, default=15, help="histogram bins drawn in the SVG")
    p.add_argument("--normal", type=_normal, default=None, metavar="MU,SIGMA", help="reference normal density overlay")
    p.add_argument("--svg", default=None, help="SVG output path")
    p.add_argument("--title", default=None, help="SVG heading")
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    output(p)
    p.set_defaults(handler=cmd_curve)

    p = sub.add_parser("consensus", help="consensus and outlier status of a measurement CSV")
    p.add_argument("input", type=Path)
    p.add_argument("--mode", choices=[m.value for m in ConsensusMode], default=ConsensusMode.CRISP.value)
    p.add_argument("--error", type=_floats, default=None, help="default error, one value or one per dimension")
    p.add_argument("--min-depth", type=float, default=None)
    p.add_argument("--membership-threshold", type=float, default=None)
    p.add_argument("--resolution", type=int, default=2, help="grid subdivisions between breakpoints")
    p.add_argument("--max-cells", type=int, default=None, help="grid cell limit")
    p.add_argument("--summary", default=None, help="per-zone summary CSV path")
    output(p)
    p.set_defaults(handler=cmd_consensus)

    p = sub.add_parser("report", help="before/after estimator comparison")
    p.add_argument("input", type=Path, help="clean measurement CSV")
    p.add_argument("contaminated", type=Path, help="contaminated measurement CSV")
    p.add_argument("--error", type=_floats, default=None)
    p.add_argument("--check-targets", action="store_true", help="compare with the sensor-example reference values")
    output(p)
    p.set_defaults(handler=cmd_report)

    p = sub.add_parser("timeseries", help="smooth a t,count series")
    p.add_argument("input", type=Path)
    p.add_argument("--time-error", type=float, default=1.0)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--svg", default=None)
    p.add_argument("--title", default=None, help="SVG heading")
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    output(p)
    p.set_defaults(handler=cmd_timeseries)

    p = sub.add_parser("survey", help="flag respondents outside the per-question consensus")
    p.add_argument("input", type=Path)
    p.add_argument("--grade-error", type=float, default=1.0)
    p.add_argument("--flag-threshold", type=float, default=0.5)
    p.add_argument("--min-answers", type=int, default=3)
    p.add_argument("--scale-min", type=int, default=1)
    p.add_argument("--scale-max", type=int, default=7)
    p.add_argument("--membership-threshold", type=float, default=None)
    p.add_argument("--min-depth", type=float, default=None)
    p.add_argument("--contaminated", type=Path, default=None, help="second survey for the estimator comparison")
    p.add_argument("--comparison", default=None, help="estimator comparison CSV path")
    p.add_argument("--summary", default=None, help="per-question summary CSV path")
    output(p)
    p.set_defaults(handler=cmd_survey)

    p = sub.add_parser("example", help="write the built-in sensor example CSVs")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(handler=cmd_example)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    tool = FuzzyConsensusTool(verbosity=args.verbose)
    tool.log_startup(args.command)

    started = time.perf_counter()
    status = "ok"
    exit_code = 0
    settings = None
    try:
        settings = tool.resolve_settings(args)
        config = run_config(args, settings)
        args.handler(args, settings, config)
    except FuzzyConsensusError as exc:
        status, exit_code = type(exc).__name__, exc.exit_code
        logger.error("{}: {}", args.command, exc)
    except ValidationError as exc:
        status, exit_code = "ValidationError", 1
        logger.error("{}: invalid input: {}", args.command, exc)
    except Exception as exc:
        status, exit_code = "internal", 3
        tool.log_error(exc, args.command)
    finally:
        tool.command_count.labels(command=args.command, status=status).inc()
        tool.latency_histogram.labels(command=args.command).observe(time.perf_counter() - started)

    metrics_file = settings.metrics_file if settings else args.metrics_file
    try:
        tool.write_metrics(metrics_file)
    except OSError as exc:
        tool.log_error(exc, "write_metrics")
    return exit_code


if __name__ == "__main__":
    sys.exit(main())

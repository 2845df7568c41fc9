"""
Shared runtime for fuzzyconsensus entry points.

Provides logging setup, environment-driven configuration and the
Prometheus metrics registry used by the command-line front end and
the estimators.
"""

import os
import sys
from typing import Optional

from dotenv import load_dotenv
from loguru import logger
from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile

ENV_PREFIX = "FUZZYCONS_"

REGISTRY = CollectorRegistry()

COMMAND_COUNT = Counter(
    "fuzzycons_commands_total",
    "Total CLI commands",
    ["command", "status"],
    registry=REGISTRY,
)
COMMAND_LATENCY = Histogram(
    "fuzzycons_command_seconds",
    "Command latency",
    ["command"],
    registry=REGISTRY,
)
IRLS_ITERATIONS = Histogram(
    "fuzzycons_irls_iterations",
    "IRLS iterations per M-estimate",
    buckets=(1, 2, 5, 10, 20, 50, 100, 200),
    registry=REGISTRY,
)
FALLBACKS = Counter(
    "fuzzycons_fallbacks_total",
    "Estimator fallbacks to the median",
    ["kind"],
    registry=REGISTRY,
)

ENV_KEYS_TO_LOG = [
    "FUZZYCONS_LOG_LEVEL",
    "FUZZYCONS_GRID_MAX_CELLS",
    "FUZZYCONS_MIN_DEPTH",
    "FUZZYCONS_MEMBERSHIP_THRESHOLD",
    "FUZZYCONS_IRLS_TOL",
    "FUZZYCONS_IRLS_MAX_ITER",
]

VERBOSITY_LEVELS = {0: None, 1: "INFO"}


class BaseTool:
    """Base class with common functionality for all fuzzyconsensus entry points"""

    def __init__(self, tool_name: str, version: str = "1.0.0", verbosity: int = 0, load_env: bool = True):
        self.tool_name = tool_name
        self.version = version
        if load_env:
            load_dotenv()
        self._setup_logging(verbosity)
        self.command_count = COMMAND_COUNT
        self.latency_histogram = COMMAND_LATENCY

    def _setup_logging(self, verbosity: int):
        """Route loguru to stderr (stdout carries CSV) and optionally to a log file"""
        level = VERBOSITY_LEVELS.get(verbosity, "DEBUG") if verbosity else None
        if level is None:
            level = os.getenv(f"{ENV_PREFIX}LOG_LEVEL", "WARNING").upper()
        logger.remove()
        logger.add(
            sys.stderr,
            level=level,
            format="<green>{time:HH:mm:ss}</green> | <level>{level}</level> | <cyan>{name}</cyan> - {message}",
        )
        log_file = os.getenv(f"{ENV_PREFIX}LOG_FILE")
        if log_file:
            logger.add(
                log_file,
                rotation="1 day",
                retention="7 days",
                level="INFO",
                format="{time:YYYY-MM-DD HH:mm:ss} | {level} | {name}:{function}:{line} - {message}",
            )
        self.logger = logger.bind(tool=self.tool_name)
        self.log_level = level

    def log_error(self, error: Exception, context: str = ""):
        """Log errors with context"""
        self.logger.opt(exception=error).error(f"Error in {context}: {error}")

    def get_env_var(self, key: str, default: Optional[str] = None) -> Optional[str]:
        """Get a prefixed environment variable with logging"""
        value = os.getenv(f"{ENV_PREFIX}{key}")
        if value is None:
            self.logger.debug(f"Environment variable {ENV_PREFIX}{key} not set, using default: {default}")
            return default
        return value

    def get_env_int(self, key: str, default: Optional[int] = None) -> int:
        """Get environment variable as integer, with optional default"""
        raw_default = str(default) if default is not None else None
        value = self.get_env_var(key, raw_default)

        if value is None:
            if default is None:
                raise ValueError(f"Environment variable {ENV_PREFIX}{key} is required and has no default")
            return default

        try:
            return int(value)
        except (TypeError, ValueError):
            if default is None:
                raise ValueError(f"Invalid integer value for {ENV_PREFIX}{key}: {value}")
            self.logger.warning(f"Invalid integer value for {ENV_PREFIX}{key}, using default: {default}")
            return default

    def get_env_float(self, key: str, default: Optional[float] = None) -> float:
        """Get environment variable as float, with optional default"""
        raw_default = repr(default) if default is not None else None
        value = self.get_env_var(key, raw_default)

        if value is None:
            if default is None:
                raise ValueError(f"Environment variable {ENV_PREFIX}{key} is required and has no default")
            return default

        try:
            return float(value)
        except (TypeError, ValueError):
            if default is None:
                raise ValueError(f"Invalid float value for {ENV_PREFIX}{key}: {value}")
            self.logger.warning(f"Invalid float value for {ENV_PREFIX}{key}, using default: {default}")
            return default

    def log_startup(self, command: str):
        """Emit startup information for the command"""
        env_snapshot = {
            key: value
            for key, value in os.environ.items()
            if key in ENV_KEYS_TO_LOG and value is not None
        }
        self.logger.info("{} {} starting command={}", self.tool_name, self.version, command)
        self.logger.debug("ENV snapshot: {}", env_snapshot)

    def write_metrics(self, path: Optional[str]):
        """Write the metrics registry in text exposition format"""
        if not path:
            return
        write_to_textfile(path, REGISTRY)
        self.logger.info("Metrics written to {}", path)

"""Fuzzy-number data representation, max-overlap consensus and robust location estimators."""

__version__ = "1.0.0"
TOOL_NAME = "fuzzyconsensus"

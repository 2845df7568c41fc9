from .base_tool import (
    BaseTool,
    COMMAND_COUNT,
    COMMAND_LATENCY,
    FALLBACKS,
    IRLS_ITERATIONS,
    REGISTRY,
)

__all__ = ["BaseTool", "COMMAND_COUNT", "COMMAND_LATENCY", "FALLBACKS", "IRLS_ITERATIONS", "REGISTRY"]

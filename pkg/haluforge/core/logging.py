"""Logging setup for HaluForge."""

import sys
from typing import Any

from loguru import logger


def configure_logging(level: str = "INFO", json_logs: bool = False,
                      sink: Any = sys.stderr) -> None:
    """Install a single loguru sink for the process."""
    logger.remove()
    if json_logs:
        logger.add(sink, level=level.upper(), serialize=True)
    else:
        logger.add(
            sink,
            level=level.upper(),
            format="<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | "
                   "{name}:{function} - <level>{message}</level>"
        )

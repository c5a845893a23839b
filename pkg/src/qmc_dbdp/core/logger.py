"""
Logging Configuration

Sets up logging for experiment runs with colorized console output and optional
rotating file logging.
"""

import logging
import logging.handlers
import os
import sys
from typing import Optional, Union

import colorlog

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def parse_level(level: Union[int, str]) -> int:
    """
    Convert a level name such as ``"info"`` into a ``logging`` constant.

    Raises:
        ValueError: For an unknown level name
    """
    if isinstance(level, int):
        return level
    value = logging.getLevelName(level.upper())
    if not isinstance(value, int):
        raise ValueError(f"Unknown log level: {level}")
    return value


def setup_logging(
    level: Union[int, str] = logging.INFO,
    log_file: Optional[str] = None,
    max_size_mb: int = 10,
    backup_count: int = 5,
):
    """
    Configure the root logger.

    Console output goes to stderr so result tables printed on stdout stay clean.

    Args:
        level (Union[int, str]): Logging level or level name
        log_file (Optional[str]): Path to the log file (None for console only)
        max_size_mb (int): Maximum log file size in MB before rotation
        backup_count (int): Number of rotated log files to keep
    """
    level = parse_level(level)
    root_logger = logging.getLogger()
    root_logger.setLevel(level)

    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    console_handler = logging.StreamHandler(stream=sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(
        colorlog.ColoredFormatter(
            "%(log_color)s" + LOG_FORMAT,
            datefmt=DATE_FORMAT,
            log_colors={
                "DEBUG": "cyan",
                "INFO": "green",
                "WARNING": "yellow",
                "ERROR": "red",
                "CRITICAL": "bold_red",
            },
        )
    )
    root_logger.addHandler(console_handler)

    if log_file:
        try:
            log_dir = os.path.dirname(log_file)
            if log_dir:
                os.makedirs(log_dir, exist_ok=True)

            file_handler = logging.handlers.RotatingFileHandler(
                filename=log_file,
                maxBytes=max_size_mb * 1024 * 1024,
                backupCount=backup_count,
                encoding="utf-8",
            )
            file_handler.setLevel(level)
            file_handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
            root_logger.addHandler(file_handler)
            logging.info("Logging to file: %s", log_file)
        except OSError as e:
            logging.error("Failed to set up file logging: %s", str(e))

    # numpy overflow and invalid-value warnings end up in the run log
    logging.captureWarnings(True)

    logging.debug("Logging initialized")
    return root_logger

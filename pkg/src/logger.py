"""Logging configuration for the application."""

import logging
import logging.handlers
import sys
from typing import Optional

from config import LOG_BACKUP_COUNT, LOG_FORMAT, LOG_LEVEL, LOG_MAX_BYTES, LOGS_DIR


def setup_logger(name: str, level: Optional[str] = None) -> logging.Logger:
    """
    Configure logger with file and console handlers.

    The console handler writes to stderr; stdout is reserved for command
    output.

    Args:
        name (str): Logger name (typically __name__)
        level (str): Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL);
            defaults to config.LOG_LEVEL

    Returns:
        logging.Logger: Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, (level or LOG_LEVEL).upper()))

    # Avoid duplicate handlers
    if logger.handlers:
        return logger

    log_format = logging.Formatter(LOG_FORMAT)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(log_format)
    console_handler.setLevel(logging.WARNING)
    logger.addHandler(console_handler)

    try:
        LOGS_DIR.mkdir(exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            LOGS_DIR / f"{name}.log", maxBytes=LOG_MAX_BYTES, backupCount=LOG_BACKUP_COUNT
        )
    except OSError:
        # read-only checkout: console only
        return logger
    file_handler.setFormatter(log_format)
    logger.addHandler(file_handler)

    return logger

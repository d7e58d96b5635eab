import logging
import os
import sys
from logging.handlers import TimedRotatingFileHandler

from .constants import LOG_FORMAT, LOGGER_NAME


# Custom filter to filter log records based on severity level
class SeverityFilter(logging.Filter):
    def __init__(self, severity):
        super().__init__()
        self.severity = severity

    def filter(self, record):
        return record.levelno == self.severity


def setup_logging(level: str = "INFO", log_dir: str | None = None) -> logging.Logger:
    """Configure the package logger.

    Everything goes to stderr so stdout carries only the machine-readable
    report. With log_dir, info/warning/error records are also split into
    one rotating file per severity.
    """
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)
    logger.propagate = False
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(LOG_FORMAT)

    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setLevel(level)
    stream_handler.setFormatter(formatter)
    logger.addHandler(stream_handler)

    if log_dir:
        for severity in (logging.INFO, logging.WARNING, logging.ERROR):
            name = logging.getLevelName(severity).lower()
            os.makedirs(os.path.join(log_dir, name), exist_ok=True)
            handler = TimedRotatingFileHandler(
                filename=os.path.join(log_dir, name, f"{name}.log"), when="midnight", backupCount=7
            )
            handler.setLevel(severity)
            handler.setFormatter(formatter)
            handler.addFilter(SeverityFilter(severity))
            logger.addHandler(handler)

    return logger

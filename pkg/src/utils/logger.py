"""Logging configuration with colored console output and optional file logging."""
import logging
import sys
from pathlib import Path
from typing import Optional, TextIO

from colorama import Fore, Style, init

# Initialize colorama for cross-platform colored output
init(autoreset=True)

LOGGER_NAME = "chirpscatter"


class ExperimentContext(logging.Filter):
    """Stamps every record with the running experiment and its seed."""

    def __init__(self) -> None:
        super().__init__()
        self.run = "-"

    def filter(self, record: logging.LogRecord) -> bool:
        record.run = self.run
        return True


_context = ExperimentContext()


class ColoredFormatter(logging.Formatter):
    """Formatter that colors the level name for console output."""

    COLORS = {
        "DEBUG": Fore.CYAN,
        "INFO": Fore.BLUE,
        "WARNING": Fore.YELLOW,
        "ERROR": Fore.RED,
        "CRITICAL": Fore.RED + Style.BRIGHT,
    }

    def format(self, record: logging.LogRecord) -> str:
        color = self.COLORS.get(record.levelname, "")
        record = logging.makeLogRecord(record.__dict__)
        record.levelname = f"{color}{record.levelname:<7}{Style.RESET_ALL}"
        return super().format(record)


def setup_logger(
    name: str = LOGGER_NAME,
    log_file: Optional[Path] = None,
    console_level: int = logging.INFO,
    file_level: int = logging.DEBUG,
    verbose: bool = False,
    stream: Optional[TextIO] = None,
) -> logging.Logger:
    """Set up the package logger with a console handler and an optional file.

    Args:
        name: Logger name
        log_file: Path to a log file; no file handler when None
        console_level: Logging level for console output
        file_level: Logging level for file output
        verbose: If True, use DEBUG level for console
        stream: Console stream (stderr by default, so stdout stays clean for
            command output)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)
    logger.handlers.clear()
    logger.propagate = False

    if verbose:
        console_level = logging.DEBUG

    console_handler = logging.StreamHandler(stream or sys.stderr)
    console_handler.setLevel(console_level)
    console_handler.setFormatter(
        ColoredFormatter(
            fmt="[%(threadName)-12s] %(levelname)s %(message)s",
            datefmt="%H:%M:%S",
        )
    )
    logger.addHandler(console_handler)

    if log_file is not None:
        log_file = Path(log_file)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, mode="w", encoding="utf-8")
        file_handler.setLevel(file_level)
        file_handler.addFilter(_context)
        file_handler.setFormatter(
            logging.Formatter(
                fmt="%(asctime)s %(run)s [%(threadName)s] %(levelname)-8s %(message)s",
                datefmt="%Y-%m-%d %H:%M:%S",
            )
        )
        logger.addHandler(file_handler)
        logger.debug(f"Logging to {log_file}")

    return logger


def bind_experiment(kind: str, seed: int) -> None:
    """Tag subsequent file log records with ``kind:seed``."""
    _context.run = f"{kind}:{seed}"


def get_logger(name: str = LOGGER_NAME) -> logging.Logger:
    """Get the package logger (or a named child of it)."""
    return logging.getLogger(name)

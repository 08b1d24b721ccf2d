"""Color constants and formatting for terminal diagnostics."""
import sys
from typing import Optional, TextIO

from colorama import Fore, Style


class Colors:
    """Color constants for console output."""

    GREEN = Fore.GREEN
    YELLOW = Fore.YELLOW
    RED = Fore.RED
    CYAN = Fore.CYAN
    BLUE = Fore.BLUE

    BRIGHT = Style.BRIGHT
    RESET = Style.RESET_ALL

    INFO = BLUE
    SUCCESS = GREEN
    WARNING = YELLOW
    ERROR = RED
    HEADER = CYAN + BRIGHT


def colored(text: str, color: str, stream: Optional[TextIO] = None) -> str:
    """Return colored text, or plain text when ``stream`` is not a terminal."""
    stream = stream or sys.stdout
    if not getattr(stream, "isatty", lambda: False)():
        return text
    return f"{color}{text}{Colors.RESET}"


def header(text: str, stream: Optional[TextIO] = None) -> str:
    return colored(text, Colors.HEADER, stream)


def success(text: str, stream: Optional[TextIO] = None) -> str:
    return colored(text, Colors.SUCCESS, stream)


def error(text: str, stream: Optional[TextIO] = None) -> str:
    """Format text as an error diagnostic (stderr by default)."""
    return colored(text, Colors.ERROR, stream or sys.stderr)


def warning(text: str, stream: Optional[TextIO] = None) -> str:
    return colored(text, Colors.WARNING, stream or sys.stderr)

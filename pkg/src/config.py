import logging
import os

from colorama import Fore, Style, just_fix_windows_console
from dotenv import load_dotenv

load_dotenv()


class Config:
    # Default replicate worker count for benchmark runs
    WORKERS = int(os.getenv("PSO_WORKERS", "1"))
    OUTPUT_DIR = os.getenv("PSO_OUTPUT_DIR", "./results")
    LOG_LEVEL = os.getenv("PSO_LOG_LEVEL", "INFO")

    # Environment
    ENV = os.getenv("ENV", "development")


_LEVEL_COLORS = {
    logging.DEBUG: Style.DIM,
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.RED + Style.BRIGHT,
}


class _ColorFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        line = super().format(record)
        color = _LEVEL_COLORS.get(record.levelno)
        return f"{color}{line}{Style.RESET_ALL}" if color else line


def configure_logging(level: str = "") -> None:
    """Install one colored stderr handler on the root logger (idempotent)."""
    just_fix_windows_console()
    root = logging.getLogger()
    root.setLevel((level or Config.LOG_LEVEL).upper())
    if not any(getattr(h, "_pso_handler", False) for h in root.handlers):
        handler = logging.StreamHandler()
        formatter = logging.Formatter if Config.ENV == "production" else _ColorFormatter
        handler.setFormatter(formatter("%(asctime)s %(levelname)-7s %(message)s", "%H:%M:%S"))
        handler._pso_handler = True
        root.addHandler(handler)

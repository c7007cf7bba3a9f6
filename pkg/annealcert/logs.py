"""Logging setup: rich console on stderr, optional log file, [tag] prefixes."""

from __future__ import annotations

import logging
import os
from datetime import datetime
from pathlib import Path
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

ROOT_LOGGER = "annealcert"

# stdout carries JSON; everything human goes to stderr
console = Console(stderr=True)


def env_flag(value) -> bool:
    return str(value).lower() in ("1", "true", "yes", "on")


class TaggedLogger(logging.LoggerAdapter):
    """Prefixes every message with ``[tag]``."""

    def process(self, msg, kwargs):
        return f"[{self.extra['tag']}] {msg}", kwargs


def get_logger(tag: str) -> TaggedLogger:
    return TaggedLogger(logging.getLogger(f"{ROOT_LOGGER}.{tag}"), {"tag": tag})


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> logging.Logger:
    """Install the console handler (and a file handler when ``log_file`` is set).

    Safe to call more than once; handlers are replaced, not stacked.
    """
    if level is None:
        level = "DEBUG" if env_flag(os.environ.get("ANNEAL_DEBUG", "0")) else "INFO"

    root = logging.getLogger(ROOT_LOGGER)
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()

    root.setLevel(level.upper())
    root.propagate = False
    root.addHandler(RichHandler(console=console, show_path=False, markup=False, rich_tracebacks=True))

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        fh = logging.FileHandler(log_path, encoding="utf-8")
        fh.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
        root.addHandler(fh)

    return root


_progress = get_logger("progress")


def log_progress(stage: str, message: str, percent: Optional[float] = None) -> None:
    """Timestamped stage line for long runs."""
    timestamp = datetime.now().strftime("%H:%M:%S")
    if percent is not None:
        _progress.info(f"{timestamp} {stage} ({percent:.0f}%) - {message}")
    else:
        _progress.info(f"{timestamp} {stage} - {message}")

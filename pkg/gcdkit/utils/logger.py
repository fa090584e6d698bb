"""
Logging configuration with colorized console output and UTC / IR timestamps
"""

import logging
import os
import re
import sys
from datetime import datetime, timezone
from typing import Any, Optional

import colorama
import jdatetime
import pytz

from gcdkit.core.config import settings

_KV_PATTERN = re.compile(r"(?<!\S)([A-Za-z_][\w.]*)=(\"[^\"]*\"|'[^']*'|\S*)")
_TEHRAN = pytz.timezone("Asia/Tehran")


class ColoredFormatter(logging.Formatter):
    """Formatter producing `[ts][level] message [context]` lines"""

    COLORS = {
        "utc_timestamp": "\033[96m",
        "ir_timestamp": "\033[94m",
        "debug": "\033[90m",
        "info": "\033[92m",
        "warn": "\033[93m",
        "error": "\033[91m",
        "context": "\033[95m",
        "key": "\033[36m",
        "reset": "\033[0m",
    }

    LEVEL_NAMES = {
        "DEBUG": "debug",
        "INFO": "info",
        "WARNING": "warn",
        "ERROR": "error",
        "CRITICAL": "error",
    }

    def __init__(self, use_colors: bool = True):
        super().__init__()
        self.use_colors = use_colors and self._should_use_colors()
        self.timestamp_mode = settings.LOG_TIMESTAMP
        self.precision = settings.LOG_TIMESTAMP_PRECISION

    def _should_use_colors(self) -> bool:
        if os.environ.get("NO_COLOR", settings.NO_COLOR) == "1":
            return False
        if settings.LOG_COLOR == "false":
            return False
        if settings.LOG_COLOR == "true":
            return True
        return hasattr(sys.stdout, "isatty") and sys.stdout.isatty()

    def _colorize(self, text: str, color_key: str) -> str:
        if not self.use_colors:
            return text
        return f"{self.COLORS.get(color_key, '')}{text}{self.COLORS['reset']}"

    def _fraction(self, record: logging.LogRecord) -> str:
        if self.precision == 3:
            return f"{int(record.msecs):03d}"
        return f"{int(record.msecs * 1000):06d}"

    def _format_timestamps(self, record: logging.LogRecord) -> str:
        utc_dt = datetime.fromtimestamp(record.created, tz=timezone.utc)
        fraction = self._fraction(record)
        parts = []
        if self.timestamp_mode in ("utc", "both"):
            stamp = f"[{utc_dt.strftime('%Y-%m-%d %H:%M:%S')}.{fraction} UTC]"
            parts.append(self._colorize(stamp, "utc_timestamp"))
        if self.timestamp_mode in ("ir", "both"):
            jdt = jdatetime.datetime.fromgregorian(datetime=utc_dt.astimezone(_TEHRAN))
            stamp = f"[{jdt.strftime('%Y-%m-%d %H:%M:%S')}.{fraction} IR]"
            parts.append(self._colorize(stamp, "ir_timestamp"))
        return "".join(parts)

    def _format_context(self, record: logging.LogRecord) -> str:
        context = getattr(record, "context", None)
        if context is None:
            head, _, tail = record.name.partition(".")
            if head == "gcdkit" and tail:
                context = tail
            elif record.name != "root":
                context = record.name
        return " " + self._colorize(f"[{context}]", "context") if context else ""

    def _colorize_kvs(self, message: str) -> str:
        if not self.use_colors or "=" not in message:
            return message
        return _KV_PATTERN.sub(
            lambda m: f"{self._colorize(m.group(1), 'key')}={m.group(2)}", message
        )

    def format(self, record: logging.LogRecord) -> str:
        level = self.LEVEL_NAMES.get(record.levelname, record.levelname.lower())
        message = self._colorize_kvs(record.getMessage())
        if record.levelname in ("ERROR", "CRITICAL"):
            message = self._colorize(message, "error")

        line = (
            f"{self._format_timestamps(record)}{self._colorize(f'[{level}]', level)} "
            f"{message}{self._format_context(record)}"
        )
        if record.exc_info:
            line += f"\n{self.formatException(record.exc_info)}"
        return line


class StructuredLogger:
    """Emits `event key=value ...` messages through a stdlib logger"""

    def __init__(self, logger: logging.Logger):
        self.logger = logger

    @staticmethod
    def _format_kvs(**kwargs: Any) -> str:
        parts = []
        for key, value in kwargs.items():
            key = key.replace("-", "_").replace(" ", "_").lower()
            if isinstance(value, float):
                value = f"{value:.6g}"
            elif isinstance(value, str) and (" " in value or '"' in value or "=" in value):
                value = f'"{value}"'
            parts.append(f"{key}={value}")
        return " ".join(parts)

    def _log(self, level: int, message: str, context: Optional[str], **kwargs: Any) -> None:
        if not self.logger.isEnabledFor(level):
            return
        extra = {"context": context} if context else {}
        full_message = f"{message} {self._format_kvs(**kwargs)}".strip()
        self.logger.log(level, full_message, extra=extra)

    def debug(self, message: str, context: Optional[str] = None, **kwargs: Any) -> None:
        self._log(logging.DEBUG, message, context, **kwargs)

    def info(self, message: str, context: Optional[str] = None, **kwargs: Any) -> None:
        self._log(logging.INFO, message, context, **kwargs)

    def warning(self, message: str, context: Optional[str] = None, **kwargs: Any) -> None:
        self._log(logging.WARNING, message, context, **kwargs)

    def error(self, message: str, context: Optional[str] = None, **kwargs: Any) -> None:
        self._log(logging.ERROR, message, context, **kwargs)


def setup_logging(level: Optional[str] = None) -> None:
    """
    Install console (and optional file) handlers on the root logger.

    Args:
        level: Overrides LOG_LEVEL for the console handler
    """
    colorama.just_fix_windows_console()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(getattr(logging, (level or settings.LOG_LEVEL).upper()))
    console_handler.setFormatter(ColoredFormatter(use_colors=True))

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    root_logger.handlers.clear()
    root_logger.addHandler(console_handler)

    if settings.LOG_FILE:
        file_handler = logging.FileHandler(settings.LOG_FILE, encoding="utf-8")
        file_handler.setLevel(logging.INFO)
        file_handler.setFormatter(ColoredFormatter(use_colors=False))
        root_logger.addHandler(file_handler)

    logging.getLogger("numpy").setLevel(logging.WARNING)
    logging.getLogger("gcdkit").debug("logging_configured")


def get_structured_logger(name: str) -> StructuredLogger:
    """Get a structured logger for a module"""
    return StructuredLogger(logging.getLogger(name))

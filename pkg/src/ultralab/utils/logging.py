"""Logging utilities.

Library modules only ever call :func:`get_logger`; handlers are installed
once per process by :func:`setup_logging`, which the command-line worker
calls before running an experiment.  Console output is colored with
``colorlog`` when stderr is a terminal.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping
from typing import IO, Any

import logging
import logging.config
import os
import sys
from logging import Logger

import colorlog
import numpy as np

__all__ = [
    "CompositeLogger",
    "DefaultFormatter",
    "ExtensionFormatter",
    "Severity",
    "create_logconfig",
    "formatter",
    "get_logger",
    "level_number",
    "setup_logging",
]

#: Record attributes that are not user ``extra=`` data.
LOG_RECORD_BUILTINS: frozenset[str] = frozenset(logging.makeLogRecord({}).__dict__) | {
    "asctime",
    "message",
    "extra",
    "log_color",
    "taskName",
}

DEFAULT_FORMAT = "[%(asctime)s] [%(levelname)s] %(name)s: %(message)s %(extra)s"
DEFAULT_COLOR_FORMAT = (
    "[%(asctime)s] [%(levelname)s] %(name)s: %(log_color)s%(message)s%(reset)s %(extra)s"
)
DEFAULT_COLORS = {**colorlog.default_log_colors, "DEBUG": "blue", "INFO": "white"}

DEFAULT_FORMATTERS = {
    "default": {
        "()": "ultralab.utils.logging.DefaultFormatter",
        "format": DEFAULT_FORMAT,
    },
    "colored": {
        "()": "ultralab.utils.logging.ExtensionFormatter",
        "format": DEFAULT_COLOR_FORMAT,
        "log_colors": DEFAULT_COLORS,
    },
}

#: Set by ``setup_logging`` if the console stream is a TTY.
LOG_ISATTY: bool = False

Severity = int | str

ArgFormatter = Callable[[Any], Any]
_formatter_registry: set[ArgFormatter] = set()


def get_logger(name: str) -> Logger:
    """Get logger by name."""
    logger = logging.getLogger(name)
    if not logger.handlers:
        logger.addHandler(logging.NullHandler())
    return logger


def level_number(level: Severity) -> int:
    """Convert ``"info"``, ``"INFO"`` or ``20`` to ``20``."""
    if isinstance(level, bool) or not isinstance(level, (int, str)):
        raise TypeError(f"Unexpected type {type(level)}")
    if isinstance(level, int):
        return level
    number = logging.getLevelName(level.upper())
    if not isinstance(number, int):
        raise ValueError(f"Unknown log level: {level!r}")
    return number


class CompositeLogger:
    """Logger wrapper that passes every message through ``formatter``.

    The worker uses it to prefix messages with the running subcommand:

    .. code-block:: pycon

        >>> log = CompositeLogger(logger, formatter=lambda s, m, *a, **kw: f"[prop21] {m}")
        >>> log.info("checked %d tuples", 1830)
    """

    def __init__(self, logger: Logger, formatter: Callable[..., str] | None = None) -> None:
        self.logger = logger
        self.formatter = formatter

    def log(self, severity: int, message: str, *args: Any, **kwargs: Any) -> None:
        kwargs.setdefault("stacklevel", 2)
        if self.formatter is not None:
            message = self.formatter(severity, message, *args, **kwargs)
        self.logger.log(severity, message, *args, **kwargs)

    # the shortcuts sit one frame deeper than ``log``
    def debug(self, message: str, *args: Any, **kwargs: Any) -> None:
        self.log(logging.DEBUG, message, *args, stacklevel=kwargs.pop("stacklevel", 3), **kwargs)

    def info(self, message: str, *args: Any, **kwargs: Any) -> None:
        self.log(logging.INFO, message, *args, stacklevel=kwargs.pop("stacklevel", 3), **kwargs)

    def warning(self, message: str, *args: Any, **kwargs: Any) -> None:
        self.log(logging.WARNING, message, *args, stacklevel=kwargs.pop("stacklevel", 3), **kwargs)

    def error(self, message: str, *args: Any, **kwargs: Any) -> None:
        self.log(logging.ERROR, message, *args, stacklevel=kwargs.pop("stacklevel", 3), **kwargs)

    def exception(self, message: str, *args: Any, **kwargs: Any) -> None:
        kwargs["exc_info"] = True
        self.error(message, *args, stacklevel=kwargs.pop("stacklevel", 4), **kwargs)


def formatter(fun: ArgFormatter) -> ArgFormatter:
    """Register a formatter for positional log arguments.

    A formatter returns the replacement value, or ``None`` to pass.
    """
    _formatter_registry.add(fun)
    return fun


@formatter
def _format_numpy_scalar(arg: Any) -> Any:
    return arg.item() if isinstance(arg, np.generic) else None


@formatter
def _format_numpy_array(arg: Any) -> Any:
    if isinstance(arg, np.ndarray):
        return np.array2string(arg, precision=6, threshold=8)
    return None


def _format_extra(record: logging.LogRecord) -> str:
    return ", ".join(
        f"{key}={value!r}"
        for key, value in record.__dict__.items()
        if key not in LOG_RECORD_BUILTINS
    )


class DefaultFormatter(logging.Formatter):
    """Plain formatter that appends ``extra=`` data as ``key=value``."""

    default_time_format = r"%Y-%m-%dT%H:%M:%S"

    def format(self, record: logging.LogRecord) -> str:
        record.extra = _format_extra(record)  # type: ignore[attr-defined]
        return super().format(record)


class ExtensionFormatter(colorlog.ColoredFormatter):  # type: ignore[misc]
    """Colored formatter that also reduces numpy arguments to text."""

    default_time_format = r"%Y-%m-%dT%H:%M:%S"

    def __init__(self, stream: IO | None = None, **kwargs: Any) -> None:
        super().__init__(stream=stream or sys.stderr, **kwargs)

    def format(self, record: logging.LogRecord) -> str:
        if isinstance(record.args, Mapping):
            record.args = {k: self.format_arg(v) for k, v in record.args.items()}
        elif record.args is not None:
            args = record.args if isinstance(record.args, tuple) else (record.args,)
            record.args = tuple(self.format_arg(arg) for arg in args)
        record.extra = _format_extra(record)  # type: ignore[attr-defined]
        return super().format(record)

    def format_arg(self, arg: Any) -> Any:
        for fun in _formatter_registry:
            reduced = fun(arg)
            if reduced is not None:
                arg = reduced
        return arg


def create_logconfig(
    *,
    handlers: dict | None = None,
    root: dict | None = None,
    loggers: dict | None = None,
) -> dict:
    """Build a :func:`logging.config.dictConfig` mapping."""
    return {
        "version": 1,
        # keep loggers created at import time by numeric modules
        "disable_existing_loggers": False,
        "formatters": DEFAULT_FORMATTERS,
        "handlers": handlers or {},
        "loggers": loggers or {},
        "root": root or {},
    }


def setup_logging(
    *,
    log_level: Severity | None = None,
    log_file: os.PathLike | str | IO | None = None,
    log_handlers: Iterable[logging.Handler] | None = None,
    logging_config: dict | None = None,
) -> int:
    """Configure logging for a run and return the numeric level.

    Reports go to stdout, so console logging defaults to stderr.
    ``log_file`` is either a path or an open stream.
    """
    global LOG_ISATTY
    if isinstance(log_file, (str, os.PathLike)):
        stream, filename = None, log_file
    else:
        stream, filename = (log_file if log_file is not None else sys.stderr), None
        isatty = getattr(stream, "isatty", None)
        try:
            LOG_ISATTY = bool(isatty()) if isatty is not None else False
        except (AttributeError, ValueError):
            LOG_ISATTY = False

    level = logging.WARNING if log_level is None else level_number(log_level)
    _setup_logging(
        level=level,
        stream=stream,
        filename=filename,
        log_handlers=log_handlers,
        logging_config=logging_config,
    )
    return level


def _setup_logging(
    *,
    level: int = logging.WARNING,
    stream: IO | None = None,
    filename: str | os.PathLike | None = None,
    log_handlers: Iterable[logging.Handler] | None = None,
    logging_config: dict | None = None,
) -> None:
    if stream is not None and filename is not None:
        raise ValueError("log to a stream or to a file, not both")
    handlers: dict[str, dict] = {}
    if stream is not None:
        handlers["console"] = {
            "level": level,
            "class": "colorlog.StreamHandler",
            "formatter": "colored" if LOG_ISATTY else "default",
            "stream": stream,
        }
    elif filename is not None:
        handlers["file"] = {
            "level": level,
            "class": "logging.FileHandler",
            "formatter": "default",
            "filename": str(filename),
        }
    config = create_logconfig(handlers=handlers, root={"level": level, "handlers": list(handlers)})

    # user sections extend the defaults, section by section
    for section, value in (logging_config or {}).items():
        if isinstance(value, Mapping) and isinstance(config.get(section), Mapping):
            config[section] = {**config[section], **value}
        else:
            config[section] = value

    logging.config.dictConfig(config)
    for handler in log_handlers or ():
        logging.root.addHandler(handler)

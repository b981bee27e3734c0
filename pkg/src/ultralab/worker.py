"""Worker - Runs experiments from the command-line.

Workers add logging setup, console output and the exit-code contract
around a single experiment run.
"""

from __future__ import annotations

import logging as _logging
import os
import sys
import traceback
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from logging import Handler, Logger
from typing import IO, Any, NoReturn

from .exceptions import ConfigError, NumericError, UltralabError, UsageError
from .utils import logging
from .utils.logging import CompositeLogger, Severity

__all__ = [
    "EX_OK",
    "EX_VIOLATION",
    "EX_NUMERIC",
    "EX_USAGE",
    "EX_SOFTWARE",
    "Worker",
    "exit_code_for",
    "exiting",
]

logger = logging.get_logger(__name__)

EX_OK = getattr(os, "EX_OK", 0)
EX_VIOLATION = 1
EX_NUMERIC = 2
EX_USAGE = getattr(os, "EX_USAGE", 64)
EX_SOFTWARE = getattr(os, "EX_SOFTWARE", 70)


def exit_code_for(exc: BaseException) -> int:
    """Exit code for an exception escaping a run."""
    if isinstance(exc, (NumericError, MemoryError)):
        return EX_NUMERIC
    if isinstance(exc, (UsageError, ConfigError)):
        return EX_USAGE
    if isinstance(exc, UltralabError):
        # malformed operator, weight or parameter input
        return EX_USAGE
    return EX_SOFTWARE


@contextmanager
def exiting(*, print_exception: bool = False, file: IO = sys.stderr) -> Iterator[None]:
    try:
        yield
    except MemoryError:
        file.write("Out of memory!\n")
        sys.exit(EX_NUMERIC)
    except Exception as exc:
        if print_exception:
            print(f"Command raised exception: {exc!r}", file=file)
            traceback.print_tb(exc.__traceback__, file=file)
        sys.exit(exit_code_for(exc))
    sys.exit(EX_OK)


class Worker:
    """Run one experiment from the command-line."""

    quiet: bool
    debug: bool
    stdout: IO
    stderr: IO
    log_level: Severity | None
    log_file: str | os.PathLike | IO | None
    log_handlers: list[Handler]
    logging_config: dict | None

    def __init__(
        self,
        *,
        label: str = "",
        debug: bool = False,
        quiet: bool = False,
        log_level: Severity | None = _logging.WARNING,
        log_file: str | os.PathLike | IO | None = None,
        log_handlers: list[Handler] | None = None,
        stdout: IO | None = sys.stdout,
        stderr: IO | None = sys.stderr,
        override_logging: bool = True,
        logging_config: dict | None = None,
    ) -> None:
        self.label = label
        self.debug = debug
        self.quiet = quiet
        self.log_level = log_level
        self.log_file = log_file
        self.log_handlers = log_handlers or []
        self.stdout = sys.stdout if stdout is None else stdout
        self.stderr = sys.stderr if stderr is None else stderr
        self.override_logging = override_logging
        self.logging_config = logging_config
        self.log = CompositeLogger(logger, formatter=self._format_log)

    def _format_log(self, severity: int, msg: str, *args: Any, **kwargs: Any) -> str:
        return f"[{self.label}] {msg}" if self.label else msg

    def say(self, msg: str) -> None:
        """Write message to standard out."""
        self._say(msg)

    def carp(self, msg: str) -> None:
        """Write warning to standard err."""
        self._say(msg, file=self.stderr)

    def _say(self, msg: str, file: IO | None = None, end: str = "\n", **kwargs: Any) -> None:
        if file is None:
            file = self.stdout
        if not self.quiet:
            print(msg, file=file, end=end, **kwargs)  # noqa: T003

    def _setup_logging(self) -> None:
        _loglevel: int = 0
        try:
            _loglevel = logging.setup_logging(
                log_level=self.log_level,
                log_file=self.log_file,
                log_handlers=self.log_handlers,
                logging_config=self.logging_config,
            )
        except Exception as exc:
            try:
                self.stderr.write(f"CANNOT SETUP LOGGING: {exc!r} from\n")
                traceback.print_stack(file=self.stderr)
            except Exception:  # noqa: S110
                pass
            raise
        self.on_setup_root_logger(_logging.root, _loglevel)

    def on_setup_root_logger(self, logger: Logger, level: int) -> None: ...

    def execute(self, fun: Callable[[Worker], int]) -> int:
        """Run ``fun`` and map its outcome to an exit code."""
        if self.override_logging:
            self._setup_logging()
        try:
            code = fun(self)
        except MemoryError:
            self.carp("Out of memory!")
            return EX_NUMERIC
        except Exception as exc:
            code = exit_code_for(exc)
            if code == EX_SOFTWARE or self.debug:
                self.log.exception("Error: %r", exc)
            else:
                self.carp(f"{type(exc).__name__}: {exc}")
            return code
        self.log.info("finished", extra={"exit_code": code})
        return code

    def execute_from_commandline(self, fun: Callable[[Worker], int]) -> NoReturn:
        raise SystemExit(self.execute(fun))

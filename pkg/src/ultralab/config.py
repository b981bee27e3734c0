"""Experiment configuration.

An INI file with the sections ``[weights] [operator] [function]
[analysis] [metivier] [run] [output]``; every key is optional and falls
back to the documented default.  Command-line flags override file
values through :meth:`ExperimentConfig.merge`.

.. code-block:: ini

    [weights]
    weight = gevrey:s=2
    jmax = 60

    [metivier]
    eps = 0.1
    metivier_box = -0.5,0.5,-0.5,0.5
"""

from __future__ import annotations

import configparser
import io
import math
import os
from collections.abc import Callable, Mapping
from dataclasses import MISSING, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from ultralab.exceptions import ConfigError, UltralabError
from ultralab.utils.logging import get_logger
from ultralab.utils.text import didyoumean, parse_floats

__all__ = ["SECTIONS", "ExperimentConfig", "load_config"]

logger = get_logger(__name__)

SECTIONS = ("weights", "operator", "function", "analysis", "metivier", "run", "output")

#: default console log level when no flag or config value is given.
LOG_LEVEL_ENV = "ULTRALAB_LOG_LEVEL"


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "yes", "true", "on"):
        return True
    if value in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text: str) -> float | None:
    return None if not text.strip() or text.strip().lower() == "none" else float(text)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(parse_floats(text))


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _option(default: Any, section: str, parse: Callable[[str], Any] = str, help: str = "") -> Any:
    return field(default=default, metadata={"section": section, "parse": parse, "help": help})


@dataclass(frozen=True)
class ExperimentConfig:
    """Every knob of every subcommand, grouped by INI section."""

    # [weights]
    weight: str = _option("gevrey:s=2", "weights", help="weight spec, kind:key=value,...")
    normalized: bool = _option(True, "weights", _bool, "shift weights to vanish on [0, 1]")
    ladder_min: int = _option(-2, "weights", int, "smallest log2 of the lambda ladder")
    ladder_max: int = _option(1, "weights", int, "largest log2 of the lambda ladder")
    jmax: int = _option(60, "weights", int, "largest j, h, r for the property suite")
    shift_base: float = _option(3.0, "weights", float, "L of the shift inequality")
    conjugate_tol: float = _option(1e-12, "weights", float, "relative tolerance of phi*")
    ys: tuple[float, ...] = _option(
        (0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0), "weights", _floats, "y values for conjugate tables"
    )

    # [operator]
    operator: str = _option("1*D[2,0] + 1*D[0,2]", "operator", help="operator text")
    other: str = _option("", "operator", help="second operand of compose")
    power: int = _option(2, "operator", int, "iterate power")

    # [function]
    function: str = _option("sin(pi*x1)*sin(pi*x2)", "function", help="test function text")

    # [analysis]
    box: str = _option("0,1,0,1", "analysis", help="box a1,b1,a2,b2,...")
    nodes: int = _option(129, "analysis", int, "Simpson nodes per axis")
    iterates: int = _option(6, "analysis", int, "J, iterates in the norm table")
    derivatives: int = _option(12, "analysis", int, "N, derivative orders in the growth table")
    pmax: int = _option(4, "analysis", int, "largest p of the recursion constant")
    k: float = _option(1.0, "analysis", float, "k of the recursion constant")
    delta_points: int = _option(32, "analysis", int, "geometric delta grid points in [1e-3, 1]")
    workers: int = _option(1, "analysis", int, "threads for independent rows")

    # [metivier]
    s: float = _option(2.0, "metivier", float, "Gevrey order of the weight")
    sigma: float = _option(1.5, "metivier", float, "Gevrey order of the bump")
    eps: float = _option(0.1, "metivier", float, "bump dilation exponent")
    delta: float = _option(0.5, "metivier", float, "bump radius parameter")
    metivier_operator: str = _option("1*D[2,0]", "metivier", help="non-elliptic operator")
    x0: tuple[float, ...] = _option((0.0, 0.0), "metivier", _floats, "center")
    xi0: tuple[float, ...] = _option((0.0, 1.0), "metivier", _floats, "unit characteristic direction")
    alpha_max: int = _option(25, "metivier", int, "largest directional derivative order")
    q_max: int = _option(6, "metivier", int, "largest iterate power")
    tol: float = _option(1e-10, "metivier", float, "quadrature tolerance")
    metivier_weight: str = _option("logpower:s=2", "metivier", help="intermediate weight")
    target_s: float | None = _option(None, "metivier", _optional_float, "order s' > s of the target")
    metivier_box: str = _option("", "metivier", help="optional box K for L2 iterate norms")
    control: bool = _option(True, "metivier", _bool, "also run the elliptic control")

    # [run]
    seed: int = _option(0, "run", int, "seed for sampled checks")
    dry_run: bool = _option(False, "run", _bool, "validate only")
    log_level: str = _option("WARNING", "run", help="console log level")
    log_file: str = _option("", "run", help="log file instead of stderr")

    # [output]
    out: str = _option("ultralab-report", "output", help="report path prefix")
    json: bool = _option(True, "output", _bool, "write the JSON report")
    csv: bool = _option(True, "output", _bool, "write the CSV table")

    @classmethod
    def defaults(cls) -> ExperimentConfig:
        level = os.environ.get(LOG_LEVEL_ENV)
        return cls(log_level=level) if level else cls()

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> ExperimentConfig:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file {str(path)!r} does not exist")
        return cls.from_ini(path.read_text(encoding="utf-8"))

    @classmethod
    def from_ini(cls, source: str | Mapping[str, Mapping[str, str]]) -> ExperimentConfig:
        """Parse INI text or a section mapping."""
        parser = configparser.ConfigParser(interpolation=None)
        try:
            if isinstance(source, Mapping):
                parser.read_dict(source)
            else:
                parser.read_string(source)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc}") from exc

        known = {f.name: f for f in fields(cls)}
        values: dict[str, Any] = {}
        for section in parser.sections():
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]. {didyoumean(SECTIONS, section)}")
            for key, raw in parser.items(section):
                name = key.replace("-", "_")
                f = known.get(name)
                if f is None or f.metadata["section"] != section:
                    options = [n for n, g in known.items() if g.metadata["section"] == section]
                    raise ConfigError(
                        f"unknown key {key!r} in [{section}]. {didyoumean(options, name)}"
                    )
                try:
                    values[name] = f.metadata["parse"](raw)
                except ValueError as exc:
                    raise ConfigError(f"bad value for {section}.{key}: {exc}") from exc
        config = replace(cls.defaults(), **values)
        logger.debug("config loaded", extra={"keys": sorted(values)})
        return config

    def merge(self, **overrides: Any) -> ExperimentConfig:
        """Copy with every non-``None`` override applied."""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def validate(self) -> ExperimentConfig:
        """Check ranges and dimension agreement; returns ``self``."""
        from ultralab.analysis import Box
        from ultralab.pdo import parse_operator
        from ultralab.symbolic import parse
        from ultralab.weights import weight_from_spec

        problems = []
        for name in ("jmax", "iterates", "derivatives", "pmax", "alpha_max", "q_max"):
            if getattr(self, name) < 0:
                problems.append(f"{name} must be nonnegative")
        if self.ladder_min > self.ladder_max:
            problems.append("ladder_min must not exceed ladder_max")
        if self.nodes < 3 or self.nodes % 2 == 0:
            problems.append("nodes must be an odd integer >= 3")
        for name in ("k", "tol", "conjugate_tol", "shift_base", "delta"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                problems.append(f"{name} must be positive")
        if self.delta_points < 1 or self.workers < 1:
            problems.append("delta_points and workers must be positive")
        if self.target_s is not None and not self.target_s > self.s:
            problems.append("target_s must exceed s")
        if len(self.x0) != len(self.xi0):
            problems.append("x0 and xi0 must have the same length")
        if problems:
            raise ConfigError("; ".join(problems))

        try:
            weight_from_spec(self.weight, normalized=self.normalized)
            weight_from_spec(self.metivier_weight)
            P = parse_operator(self.operator)
            parse(self.function, Box.parse(self.box).dim)
            if self.other:
                parse_operator(self.other, P.dim)
            M = parse_operator(self.metivier_operator)
            if len(self.x0) != M.dim:
                raise ConfigError(f"x0 has {len(self.x0)} components, operator has dimension {M.dim}")
            if self.metivier_box and Box.parse(self.metivier_box).dim != M.dim:
                raise ConfigError("metivier box and operator differ in dimension")
        except ConfigError:
            raise
        except UltralabError as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc
        return self

    def to_ini(self) -> str:
        parser = configparser.ConfigParser(interpolation=None)
        for section in SECTIONS:
            parser.add_section(section)
        for f in fields(self):
            parser.set(f.metadata["section"], f.name, _format(getattr(self, f.name)))
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    def as_dict(self) -> dict[str, Any]:
        return {f.name: (list(v) if isinstance(v := getattr(self, f.name), tuple) else v) for f in fields(self)}

    @classmethod
    def describe(cls) -> list[tuple[str, str, str, str]]:
        """``(section, key, default, help)`` rows for documentation."""
        rows = []
        for f in fields(cls):
            default = f.default if f.default is not MISSING else None
            rows.append((f.metadata["section"], f.name, _format(default), f.metadata["help"]))
        return rows


def load_config(path: str | os.PathLike | None = None, **overrides: Any) -> ExperimentConfig:
    base = ExperimentConfig.from_file(path) if path else ExperimentConfig.defaults()
    return base.merge(**overrides)

"""Weight function catalog.

Every weight is described by its kind and real parameters, and knows
both ``ω(t)`` and ``φ(x) = ω(e^x)`` in closed form.  Normalized weights
are shifted so that they vanish on ``[0, 1]``::

    ω̃(t) = max(0, ω(t) - ω(1))

Weights are addressed by a short text specification, ``gevrey:s=2``,
``explog:alpha=0.5,beta=1`` or ``custom:/path/to/table.txt``.
"""

from __future__ import annotations

import math
import os
from abc import ABC, abstractmethod
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import ClassVar

import numpy as np

from ultralab.exceptions import ParameterError
from ultralab.utils.logging import get_logger
from ultralab.utils.text import didyoumean

__all__ = [
    "Weight",
    "GevreyWeight",
    "LogPowerWeight",
    "SubLogWeight",
    "ExpLogWeight",
    "TableWeight",
    "WEIGHT_KINDS",
    "CATALOG_DEFAULTS",
    "weight_from_spec",
    "catalog",
]

logger = get_logger(__name__)


def _logaddexp(a: float, b: float) -> float:
    hi = max(a, b)
    return hi + math.log1p(math.exp(-abs(a - b)))


class Weight(ABC):
    """Weight function ``ω`` and its exponential form ``φ = ω∘exp``."""

    kind: ClassVar[str]
    defaults: ClassVar[Mapping[str, float]] = {}

    params: dict[str, float]
    normalized: bool

    def __init__(self, *, normalized: bool = True, **params: float) -> None:
        unknown = set(params) - set(self.defaults)
        if unknown:
            name = sorted(unknown)[0]
            raise ParameterError(
                f"Unknown parameter {name!r} for {self.kind} weight. "
                f"{didyoumean(self.defaults, name)}"
            )
        self.params = {**self.defaults, **{k: float(v) for k, v in params.items()}}
        self.normalized = normalized
        self._validate()
        self._offset = self.raw_omega(1.0) if normalized else 0.0

    def _validate(self) -> None: ...

    @abstractmethod
    def raw_omega(self, t: float) -> float: ...

    @abstractmethod
    def raw_phi(self, x: float) -> float: ...

    @abstractmethod
    def raw_phi_array(self, x: np.ndarray) -> np.ndarray: ...

    def omega(self, t: float) -> float:
        """Evaluate ``ω(t)`` for ``t >= 0``."""
        if t < 0:
            raise ParameterError(f"weight argument must be nonnegative, got {t}")
        if self.normalized and t <= 1.0:
            return 0.0
        if t == 0:
            return self.raw_omega(0.0)
        return self.phi(math.log(t))

    def phi(self, x: float) -> float:
        """Evaluate ``φ(x) = ω(e^x)``."""
        try:
            value = self.raw_phi(x) - self._offset
        except OverflowError:
            return math.inf
        if self.normalized:
            return 0.0 if x <= 0 else max(0.0, value)
        return value

    def omega_array(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        positive = t > 0
        with np.errstate(divide="ignore"):
            out[positive] = self.phi_array(np.log(t[positive]))
        out[~positive] = 0.0 if self.normalized else self.raw_omega(0.0)
        return out

    def phi_array(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            value = self.raw_phi_array(x) - self._offset
        if self.normalized:
            value = np.where(x <= 0, 0.0, np.maximum(value, 0.0))
        return value

    @property
    def spec(self) -> str:
        """Text specification that recreates this weight."""
        args = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.kind}:{args}" if args else self.kind

    def __repr__(self) -> str:
        suffix = "" if self.normalized else " raw"
        return f"<{type(self).__name__}: {self.spec}{suffix}>"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Weight):
            return NotImplemented
        return (self.spec, self.normalized) == (other.spec, other.normalized)

    def __hash__(self) -> int:
        return hash((self.spec, self.normalized))


class GevreyWeight(Weight):
    """``ω(t) = t^{1/s}``, the Gevrey class of order ``s``."""

    kind = "gevrey"
    defaults = {"s": 2.0}

    def _validate(self) -> None:
        if not self.params["s"] > 1:
            raise ParameterError(f"gevrey weight requires s > 1, got s={self.params['s']}")

    @property
    def s(self) -> float:
        return self.params["s"]

    def raw_omega(self, t: float) -> float:
        return t ** (1.0 / self.s)

    def raw_phi(self, x: float) -> float:
        return math.exp(x / self.s)

    def raw_phi_array(self, x: np.ndarray) -> np.ndarray:
        return np.exp(x / self.s)

    def conjugate_closed_form(self, y: float) -> float:
        """``φ*`` of the normalized weight, exact for every ``y >= 0``."""
        s = self.s
        if y * s <= 1.0:
            return 0.0
        return s * y * (math.log(s * y) - 1.0) + 1.0


class LogPowerWeight(Weight):
    """``ω(t) = t^{1/s}/log t`` started at ``t = e^{2s}`` where it is increasing.

    The live branch is shifted down by ``e²/(2s)`` so that it meets zero
    continuously at the start point.
    """

    kind = "logpower"
    defaults = {"s": 2.0}

    def _validate(self) -> None:
        if not self.params["s"] > 1:
            raise ParameterError(
                f"logpower weight requires s > 1, got s={self.params['s']}"
            )

    @property
    def s(self) -> float:
        return self.params["s"]

    @property
    def start(self) -> float:
        """Start of the live branch in ``x = log t``."""
        return 2.0 * self.s

    def raw_omega(self, t: float) -> float:
        if t <= 0:
            return 0.0
        return self.raw_phi(math.log(t))

    def raw_phi(self, x: float) -> float:
        s = self.s
        if x <= self.start:
            return 0.0
        return math.exp(x / s) / x - math.e**2 / (2.0 * s)

    def raw_phi_array(self, x: np.ndarray) -> np.ndarray:
        s = self.s
        live = x > self.start
        safe = np.where(live, x, self.start + 1.0)
        return np.where(live, np.exp(safe / s) / safe - math.e**2 / (2.0 * s), 0.0)


class SubLogWeight(Weight):
    """``ω(t) = t/(log(e+t))^β``, just below linear growth."""

    kind = "sublog"
    defaults = {"beta": 2.0}

    def _validate(self) -> None:
        if not self.params["beta"] > 1:
            raise ParameterError(
                f"sublog weight requires beta > 1, got beta={self.params['beta']}"
            )

    def raw_omega(self, t: float) -> float:
        return t / math.log(math.e + t) ** self.params["beta"]

    def raw_phi(self, x: float) -> float:
        return math.exp(x) / _logaddexp(1.0, x) ** self.params["beta"]

    def raw_phi_array(self, x: np.ndarray) -> np.ndarray:
        return np.exp(x) / np.logaddexp(1.0, x) ** self.params["beta"]


class ExpLogWeight(Weight):
    """``ω(t) = exp(β (log(1+t))^α)``, slower than every power of ``t``."""

    kind = "explog"
    defaults = {"alpha": 0.5, "beta": 1.0}

    def _validate(self) -> None:
        alpha, beta = self.params["alpha"], self.params["beta"]
        if not 0 < alpha < 1:
            raise ParameterError(f"explog weight requires 0 < alpha < 1, got {alpha}")
        if not beta > 0:
            raise ParameterError(f"explog weight requires beta > 0, got {beta}")

    def raw_omega(self, t: float) -> float:
        alpha, beta = self.params["alpha"], self.params["beta"]
        return math.exp(beta * math.log1p(t) ** alpha)

    def raw_phi(self, x: float) -> float:
        alpha, beta = self.params["alpha"], self.params["beta"]
        return math.exp(beta * _logaddexp(0.0, x) ** alpha)

    def raw_phi_array(self, x: np.ndarray) -> np.ndarray:
        alpha, beta = self.params["alpha"], self.params["beta"]
        return np.exp(beta * np.logaddexp(0.0, x) ** alpha)


class TableWeight(Weight):
    """Weight given by a two-column table ``(t, ω(t))``.

    Values are linearly interpolated; beyond the last node the last
    slope is continued.
    """

    kind = "custom"

    ts: np.ndarray
    values: np.ndarray
    source: str

    def __init__(
        self,
        ts: Sequence[float],
        values: Sequence[float],
        *,
        source: str = "<table>",
        normalized: bool = True,
    ) -> None:
        self.ts = np.asarray(ts, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.source = source
        super().__init__(normalized=normalized)

    @classmethod
    def from_file(cls, path: str | os.PathLike, *, normalized: bool = True) -> TableWeight:
        try:
            data = np.loadtxt(Path(path), ndmin=2)
        except (OSError, ValueError) as exc:
            raise ParameterError(f"Cannot read weight table {path}: {exc}") from exc
        if data.shape[1] != 2:
            raise ParameterError(f"Weight table {path} must have two columns")
        return cls(data[:, 0], data[:, 1], source=str(path), normalized=normalized)

    def _validate(self) -> None:
        ts, values = self.ts, self.values
        if ts.ndim != 1 or ts.shape != values.shape or len(ts) < 2:
            raise ParameterError("weight table needs at least two (t, ω) rows")
        if np.any(np.diff(ts) <= 0):
            raise ParameterError("weight table t column must be strictly increasing")
        if ts[0] < 0:
            raise ParameterError("weight table t column must be nonnegative")
        if not np.all(np.isfinite(values)):
            raise ParameterError("weight table values must be finite")

    @property
    def spec(self) -> str:
        return f"custom:{self.source}"

    def raw_omega_array(self, t: np.ndarray) -> np.ndarray:
        ts, values = self.ts, self.values
        slope = (values[-1] - values[-2]) / (ts[-1] - ts[-2])
        inner = np.interp(t, ts, values)
        return np.where(t > ts[-1], values[-1] + slope * (t - ts[-1]), inner)

    def raw_omega(self, t: float) -> float:
        return float(self.raw_omega_array(np.asarray(t, dtype=float)))

    def raw_phi(self, x: float) -> float:
        return self.raw_omega(math.exp(x))

    def raw_phi_array(self, x: np.ndarray) -> np.ndarray:
        return self.raw_omega_array(np.exp(x))


WEIGHT_KINDS: Mapping[str, type[Weight]] = {
    cls.kind: cls
    for cls in (GevreyWeight, LogPowerWeight, SubLogWeight, ExpLogWeight, TableWeight)
}

#: default parameters of the four closed-form catalog entries.
CATALOG_DEFAULTS: tuple[str, ...] = (
    "gevrey:s=2",
    "logpower:s=2",
    "sublog:beta=2",
    "explog:alpha=0.5,beta=1",
)


def weight_from_spec(spec: str, *, normalized: bool = True) -> Weight:
    """Parse a weight specification such as ``gevrey:s=2``."""
    kind, _, rest = spec.strip().partition(":")
    kind = kind.strip().lower()
    try:
        cls = WEIGHT_KINDS[kind]
    except KeyError:
        raise ParameterError(
            f"Unknown weight kind {kind!r}. {didyoumean(WEIGHT_KINDS, kind)}"
        ) from None
    if cls is TableWeight:
        if not rest:
            raise ParameterError("custom weight requires a table path: custom:<path>")
        return TableWeight.from_file(rest, normalized=normalized)
    params: dict[str, float] = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ParameterError(f"Weight parameter {item!r} is not of the form key=value")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise ParameterError(f"Weight parameter {key!r} is not a number: {value!r}") from None
    weight = cls(normalized=normalized, **params)
    logger.debug("weight parsed", extra={"weight": weight.spec})
    return weight


def catalog(*, normalized: bool = True) -> list[Weight]:
    """The catalog weights at their default parameters."""
    return [weight_from_spec(spec, normalized=normalized) for spec in CATALOG_DEFAULTS]

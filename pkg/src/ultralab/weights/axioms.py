"""Sampled checks of the weight function axioms."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.integrate import simpson

from ultralab.utils.logging import get_logger

from .catalog import Weight

__all__ = ["SampleSpec", "AxiomVerdict", "AxiomReport", "check_axioms"]

logger = get_logger(__name__)

HOLDS = "holds"
FAILS = "fails"
CONVERGENT = "convergent"
DIVERGENT = "divergent"
INCONCLUSIVE = "inconclusive"

#: fitted tail exponents inside this band leave quasianalyticity undecided.
TAIL_BAND = (0.9, 1.1)


@dataclass(frozen=True)
class SampleSpec:
    """Sampling grids for the axiom checks."""

    t_min: float = 1e-2
    t_max: float = 1e8
    points: int = 801
    lambdas: Sequence[float] = (1.5, 2.0, 4.0, 8.0, 16.0, 64.0, 256.0, 1024.0)
    x_points: int = 2001
    integral_points: int = 20001

    def t_grid(self) -> np.ndarray:
        return np.geomspace(self.t_min, self.t_max, self.points)


@dataclass(frozen=True)
class AxiomVerdict:
    axiom: str
    verdict: str
    constants: dict[str, float] = field(default_factory=dict)
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict in (HOLDS, CONVERGENT, DIVERGENT)

    def as_dict(self) -> dict[str, Any]:
        return {
            "axiom": self.axiom,
            "verdict": self.verdict,
            "constants": self.constants,
            "detail": self.detail,
        }


@dataclass
class AxiomReport:
    weight: str
    verdicts: dict[str, AxiomVerdict] = field(default_factory=dict)

    def __getitem__(self, axiom: str) -> AxiomVerdict:
        return self.verdicts[axiom]

    def add(self, verdict: AxiomVerdict) -> None:
        self.verdicts[verdict.axiom] = verdict

    @property
    def ok(self) -> bool:
        return all(v.verdict != FAILS for v in self.verdicts.values())

    def as_dict(self) -> dict[str, Any]:
        return {
            "weight": self.weight,
            "verdicts": {k: v.as_dict() for k, v in self.verdicts.items()},
        }


def _monotone(w: Weight, ts: np.ndarray) -> AxiomVerdict:
    values = w.omega_array(np.concatenate(([0.0], ts)))
    drops = np.diff(values)
    worst = float(drops.min())
    vanish = 0.0
    if w.normalized:
        vanish = float(np.abs(values[np.concatenate(([True], ts <= 1.0))]).max())
    ok = worst >= -1e-12 * max(1.0, float(np.abs(values).max())) and vanish == 0.0
    return AxiomVerdict(
        "monotone",
        HOLDS if ok else FAILS,
        {"min_increment": worst, "max_on_unit_interval": vanish},
    )


def _alpha(w: Weight, ts: np.ndarray) -> AxiomVerdict:
    ratio = w.omega_array(2.0 * ts) / (w.omega_array(ts) + 1.0)
    L = float(np.max(ratio))
    return AxiomVerdict("alpha", HOLDS if math.isfinite(L) else FAILS, {"L": L})


def _alpha0(w: Weight, ts: np.ndarray, lambdas: Sequence[float]) -> AxiomVerdict:
    omega = w.omega_array(ts)
    live = np.nonzero(omega >= 1.0)[0]
    if not len(live):
        return AxiomVerdict("alpha0", INCONCLUSIVE, detail="ω stays below 1 on the grid")
    t0 = float(ts[live[0]])
    C = 0.0
    for lam in lambdas:
        sel = (ts >= t0) & (lam * ts <= ts[-1])
        if not np.any(sel):
            continue
        ratio = w.omega_array(lam * ts[sel]) / (lam * omega[sel])
        C = max(C, float(ratio.max()))
    return AxiomVerdict(
        "alpha0", HOLDS if math.isfinite(C) else FAILS, {"C": C, "t0": t0}
    )


def _gamma(w: Weight, ts: np.ndarray) -> AxiomVerdict:
    omega = w.omega_array(ts)
    sel = (omega > 0) & (ts > 1.0)
    if np.count_nonzero(sel) < 8:
        return AxiomVerdict("gamma", INCONCLUSIVE, detail="too few live samples")
    t, om = ts[sel], omega[sel]
    ratio = np.log(t) / om
    tail = slice(len(t) // 2, None)
    slope = float(np.polyfit(np.log(t[tail]), np.log(ratio[tail]), 1)[0])
    return AxiomVerdict(
        "gamma",
        HOLDS if slope < 0 else FAILS,
        {"last_ratio": float(ratio[-1]), "tail_slope": slope},
    )


def _delta(w: Weight, spec: SampleSpec) -> AxiomVerdict:
    x = np.linspace(0.0, math.log(spec.t_max), spec.x_points)
    phi = w.phi_array(x)
    second = phi[2:] - 2.0 * phi[1:-1] + phi[:-2]
    scale = max(1.0, float(np.abs(phi).max()))
    residual = float(second.min())
    return AxiomVerdict(
        "delta",
        HOLDS if residual >= -1e-9 * scale else FAILS,
        {"convexity_residual": residual},
    )


def _quasianalytic(w: Weight, spec: SampleSpec) -> AxiomVerdict:
    # ∫_1^T ω(t)/t² dt = ∫_0^{log T} φ(u) e^{-u} du
    log_T = math.log(spec.t_max)
    u = np.linspace(0.0, log_T, spec.integral_points)
    integrand = w.phi_array(u) * np.exp(-u)
    integral = float(simpson(integrand, x=u))

    tail_t = np.geomspace(spec.t_max / 100.0, spec.t_max, 201)
    f = w.omega_array(tail_t) / tail_t**2
    if np.any(f <= 0):
        return AxiomVerdict("beta", INCONCLUSIVE, {"integral": integral})
    p = -float(np.polyfit(np.log(tail_t), np.log(f), 1)[0])
    constants = {"integral": integral, "tail_exponent": p}
    lo, hi = TAIL_BAND
    if p >= hi:
        coef = float(f[-1]) * spec.t_max**p
        constants["extrapolated"] = integral + coef * spec.t_max ** (1.0 - p) / (p - 1.0)
        return AxiomVerdict("beta", CONVERGENT, constants, "non-quasianalytic")
    if p <= lo:
        return AxiomVerdict("beta", DIVERGENT, constants, "quasianalytic")

    # inside the band: logarithmic growth shows as equal increments per decade
    decades = np.arange(max(1.0, log_T / math.log(10) - 4.0), log_T / math.log(10) + 1e-9)
    edges = np.log(10.0) * decades
    increments = []
    for a, b in zip(edges, edges[1:]):
        uu = np.linspace(a, b, 2001)
        increments.append(float(simpson(w.phi_array(uu) * np.exp(-uu), x=uu)))
    constants["decade_increments_min"] = min(increments)
    constants["decade_increments_max"] = max(increments)
    if increments and min(increments) > 0 and min(increments) / max(increments) >= 0.95:
        return AxiomVerdict("beta", DIVERGENT, constants, "quasianalytic")
    return AxiomVerdict("beta", INCONCLUSIVE, constants, "tail exponent inside band")


def check_axioms(w: Weight, spec: SampleSpec | None = None) -> AxiomReport:
    """Sampled verdicts for monotonicity and the (α), (α₀), (γ), (δ), (β) axioms."""
    spec = spec or SampleSpec()
    ts = spec.t_grid()
    report = AxiomReport(w.spec)
    report.add(_monotone(w, ts))
    report.add(_alpha(w, ts))
    report.add(_alpha0(w, ts, spec.lambdas))
    report.add(_gamma(w, ts))
    report.add(_delta(w, spec))
    report.add(_quasianalytic(w, spec))
    logger.debug("axioms checked", extra={"weight": w.spec})
    return report

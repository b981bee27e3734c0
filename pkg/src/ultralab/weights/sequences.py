"""Associated sequence ``a_{j,λ} = e^{λφ*(j/λ)}/j!`` and its inequality suite.

Everything is computed in the log domain: ``P_λ(k) = λφ*(k/λ)`` and
``log a_{j,λ} = P_λ(j) - log j!``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.special import gammaln

from ultralab.exceptions import ParameterError
from ultralab.utils.logging import get_logger
from ultralab.utils.text import pluralize

from .catalog import Weight
from .conjugate import YoungConjugate

__all__ = [
    "AssocSeqValue",
    "Violation",
    "Prop21Report",
    "ShiftBound",
    "DEFAULT_LADDER",
    "dyadic_ladder",
    "assoc_seq",
    "check_prop21",
    "bound_shift",
]

logger = get_logger(__name__)


def dyadic_ladder(kmin: int, kmax: int) -> list[float]:
    """``[2^k for k in kmin..kmax]``."""
    if kmin > kmax:
        raise ParameterError(f"empty ladder: kmin={kmin} > kmax={kmax}")
    return [2.0**k for k in range(kmin, kmax + 1)]


#: λ ladder used by the property suite unless told otherwise.
DEFAULT_LADDER: tuple[float, ...] = tuple(dyadic_ladder(-2, 1))

#: reporting cap per property, the total count is always kept.
MAX_WITNESSES = 50


def _conjugate_of(source: Weight | YoungConjugate) -> YoungConjugate:
    if isinstance(source, YoungConjugate):
        return source
    return YoungConjugate(source)


@dataclass(frozen=True)
class AssocSeqValue:
    j: int
    lam: float
    log_value: float

    @property
    def value(self) -> float:
        return math.exp(self.log_value)


def assoc_seq(source: Weight | YoungConjugate, j: int, lam: float) -> AssocSeqValue:
    """``a_{j,λ}`` in log form."""
    if j < 0:
        raise ParameterError(f"j must be nonnegative, got {j}")
    if not lam > 0:
        raise ParameterError(f"λ must be positive, got {lam}")
    conj = _conjugate_of(source)
    if j == 0:
        return AssocSeqValue(0, lam, 0.0)
    log_value = lam * conj(j / lam) - float(gammaln(j + 1))
    return AssocSeqValue(j, lam, log_value)


@dataclass(frozen=True)
class Violation:
    prop: str
    index: dict[str, float]
    lhs: float
    rhs: float

    @property
    def excess(self) -> float:
        return self.lhs - self.rhs

    def as_dict(self) -> dict[str, Any]:
        return {
            "property": self.prop,
            "index": self.index,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "excess": self.excess,
        }


@dataclass
class Prop21Report:
    weight: str
    jmax: int
    ladder: list[float]
    slack: float
    checked: dict[str, int] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def failed(self, prop: str) -> bool:
        return self.counts.get(prop, 0) > 0

    def as_dict(self) -> dict[str, Any]:
        return {
            "weight": self.weight,
            "jmax": self.jmax,
            "ladder": self.ladder,
            "slack": self.slack,
            "checked": dict(sorted(self.checked.items())),
            "counts": dict(sorted(self.counts.items())),
            "violations": [v.as_dict() for v in self.violations],
        }


class _Collector:
    def __init__(self, report: Prop21Report, log_slack: float) -> None:
        self.report = report
        self.log_slack = log_slack

    def check(
        self,
        prop: str,
        lhs: np.ndarray,
        rhs: np.ndarray,
        names: Sequence[str],
        grids: Sequence[np.ndarray],
        *,
        slack: float | None = None,
        extra: dict[str, float] | None = None,
    ) -> None:
        lhs, rhs = np.broadcast_arrays(lhs, rhs)
        tolerance = self.log_slack if slack is None else slack
        valid = np.isfinite(lhs) | np.isfinite(rhs)
        bad = valid & (lhs > rhs + tolerance)
        report = self.report
        report.checked[prop] = report.checked.get(prop, 0) + int(np.count_nonzero(valid))
        nbad = int(np.count_nonzero(bad))
        report.counts[prop] = report.counts.get(prop, 0) + nbad
        if not nbad:
            return
        listed = sum(1 for v in report.violations if v.prop == prop)
        for pos in np.argwhere(bad)[: max(0, MAX_WITNESSES - listed)]:
            index = {name: float(grid[tuple(pos)]) for name, grid in zip(names, grids)}
            if extra:
                index.update(extra)
            report.violations.append(
                Violation(prop, index, float(lhs[tuple(pos)]), float(rhs[tuple(pos)]))
            )


def _log_table(conj: YoungConjugate, lam: float, kmax: int) -> np.ndarray:
    """``P_λ(k) = λφ*(k/λ)`` for ``k = 0..kmax``."""
    return np.array([lam * conj(k / lam) for k in range(kmax + 1)], dtype=float)


def check_prop21(
    source: Weight | YoungConjugate,
    jmax: int = 60,
    ladder: Sequence[float] = DEFAULT_LADDER,
    slack: float = 1e-9,
    *,
    shift_L: float = 3.0,
    shift_nmax: int = 3,
) -> Prop21Report:
    """Check the inequality suite of the associated sequence.

    Properties are named ``"1"`` to ``"8"`` (``"5"`` is the shift bound,
    checked by :func:`bound_shift`), ``"superadditive"`` for the weaker
    binomial chain that must hold at zero slack, and ``"shift"`` for the
    inequality behind the shift bound.
    """
    if jmax < 0:
        raise ParameterError(f"jmax must be nonnegative, got {jmax}")
    if slack < 0:
        raise ParameterError(f"slack must be nonnegative, got {slack}")
    ladder = sorted(float(lam) for lam in ladder)
    if not ladder or ladder[0] <= 0:
        raise ParameterError("λ ladder must be a nonempty list of positive reals")
    conj = _conjugate_of(source)
    report = Prop21Report(conj.weight.spec, jmax, ladder, slack)
    collect = _Collector(report, math.log1p(slack))

    kmax = 2 * jmax + 1
    k = np.arange(kmax + 1)
    lf = gammaln(k + 1.0)
    j1 = np.arange(jmax + 1)
    J, H = np.meshgrid(j1, j1, indexing="ij")
    J3, H3, R3 = np.meshgrid(j1, j1, j1, indexing="ij")

    tables: dict[float, np.ndarray] = {}
    for lam in ladder:
        tables[lam] = P = _log_table(conj, lam, kmax)
        Q = tables.get(lam / 2.0)
        if Q is None:
            Q = _log_table(conj, lam / 2.0, kmax)
        A = P - lf
        B = Q - lf
        at = {"lambda": lam}

        # (1) a_j a_h <= a_{j+h}
        collect.check("1", A[J] + A[H], A[J + H], ("j", "h"), (J, H), extra=at)
        # superadditivity chain, never allowed to fail; both sides vanish
        # exactly on the j = 0 and h = 0 edges
        collect.check(
            "superadditive",
            P[J] + P[H] - P[J + H],
            lf[J + H] - lf[J] - lf[H],
            ("j", "h"),
            (J, H),
            slack=0.0,
            extra=at,
        )
        # (2) a_j <= a_{j+1}
        collect.check("2", A[j1], A[j1 + 1], ("j",), (j1,), extra=at)
        # (4) a_{j+h,λ} <= a_{j,λ/2} a_{h,λ/2}
        collect.check("4", A[J + H], B[J] + B[H], ("j", "h"), (J, H), extra=at)
        # (6) (j!/h!) a_{j-h} <= e^{P(j+r)}/e^{P(h+r)} for h <= j
        lower = H3 <= J3
        lhs6 = np.where(lower, lf[J3] - lf[H3] + A[np.abs(J3 - H3)], -np.inf)
        rhs6 = np.where(lower, P[J3 + R3] - P[H3 + R3], np.inf)
        collect.check("6", lhs6, rhs6, ("j", "h", "r"), (J3, H3, R3), extra=at)
        # (7) P(j) + P(r+h) <= Q(j+h) + Q(r)
        collect.check(
            "7", P[J3] + P[R3 + H3], Q[J3 + H3] + Q[R3], ("j", "h", "r"), (J3, H3, R3), extra=at
        )
        # (8) increments P(q+1) - P(q) non-decreasing
        inc = np.diff(P[: jmax + 2])
        collect.check("8", inc[:-1], inc[1:], ("q",), (j1[:-1],), extra=at)
        # shift inequality with n <= shift_nmax
        for n in range(1, shift_nmax + 1):
            scale = lam * shift_L**n
            ys = np.linspace(0.0, 2.0 * jmax, 4 * jmax + 1)
            lhs = np.array([scale * conj(y / scale) for y in ys]) + n * ys
            rhs = np.array([lam * conj(y / lam) for y in ys]) + lam * sum(
                shift_L**h for h in range(1, n + 1)
            )
            collect.check("shift", lhs, rhs, ("y",), (ys,), extra={**at, "n": n})

    # (3) λ -> a_{j,λ} non-increasing along the ladder
    for lam_lo, lam_hi in zip(ladder, ladder[1:]):
        collect.check(
            "3",
            tables[lam_hi][j1] - lf[j1],
            tables[lam_lo][j1] - lf[j1],
            ("j",),
            (j1,),
            extra={"lambda": lam_hi, "lambda_prev": lam_lo},
        )

    total = sum(report.counts.values())
    logger.info(
        "property suite finished with %d %s",
        total,
        pluralize(total, "violation"),
        extra={"weight": report.weight, "jmax": jmax},
    )
    return report


@dataclass(frozen=True)
class ShiftBound:
    rho: float
    lam: float
    L: float
    n: int
    lam_prime: float
    log_D: float
    verified: bool
    witness: int | None
    jmax: int

    @property
    def D(self) -> float:
        return math.exp(self.log_D)

    def as_dict(self) -> dict[str, Any]:
        return {
            "rho": self.rho,
            "lambda": self.lam,
            "L": self.L,
            "n": self.n,
            "lambda_prime": self.lam_prime,
            "log_D": self.log_D,
            "verified": self.verified,
            "witness": self.witness,
            "jmax": self.jmax,
        }


def bound_shift(
    source: Weight | YoungConjugate,
    rho: float,
    lam: float,
    L: float = 3.0,
    jmax: int = 60,
    slack: float = 1e-9,
) -> ShiftBound:
    """Trade the geometric factor ``ρ^j`` for a smaller ``λ'``.

    Verifies ``ρ^j e^{λφ*(j/λ)} <= D e^{λ'φ*(j/λ')}`` for ``j <= jmax`` with
    ``n = ⌊log ρ + 1⌋``, ``λ' = λ/L^n`` and ``D = e^{λn}``.
    """
    if not rho > 0 or not lam > 0:
        raise ParameterError(f"ρ and λ must be positive, got ρ={rho}, λ={lam}")
    if not L > 0:
        raise ParameterError(f"L must be positive, got {L}")
    conj = _conjugate_of(source)
    n = max(0, math.floor(math.log(rho) + 1.0))
    lam_prime = lam / L**n
    log_D = lam * n
    log_slack = math.log1p(slack)
    witness = None
    for j in range(jmax + 1):
        lhs = j * math.log(rho) + lam * conj(j / lam)
        rhs = log_D + lam_prime * conj(j / lam_prime)
        if lhs > rhs + log_slack:
            witness = j
            logger.warning(
                "shift bound fails", extra={"j": j, "rho": rho, "lambda": lam}
            )
            break
    return ShiftBound(rho, lam, L, n, lam_prime, log_D, witness is None, witness, jmax)

"""Oscillatory counterexample for non-elliptic operators.

``u(x) = ∫_1^∞ g(ρ^ε(x-x₀)) e^{-ρ^η} e^{iρ⟨x-x₀,ξ₀⟩} dρ`` with a Gevrey-σ
bump ``g`` lies in the iterate class of a non-elliptic ``P`` with
``P_m(ξ₀) = 0`` while its derivatives along ``ξ₀`` grow like
``Γ((α+1)/η)``, faster than the weight allows.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from typing import Any

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammaincc, gammainccinv, gammaln

from ultralab.analysis import Box, QuadratureGrid, gevrey_order
from ultralab.analysis.growth import RoumieuFit, fit_roumieu
from ultralab.exceptions import AccuracyError, ConstraintError, DimensionError, ParameterError
from ultralab.pdo import LinearPDO, apply, iterate, parse_operator, principal_symbol, sphere_samples
from ultralab.symbolic import (
    Const,
    Exp,
    Expr,
    GBump,
    MultiIndex,
    Pow,
    Prod,
    Sum,
    Var,
    evaluate,
    gbump_profile,
    simplify,
    substitute,
)
from ultralab.utils.futures import map_rows
from ultralab.utils.logging import get_logger
from ultralab.weights import GevreyWeight, Weight, YoungConjugate, weight_from_spec

__all__ = [
    "DEFAULT_OPERATOR",
    "MetivierParams",
    "QuadratureResult",
    "DirectionalDerivative",
    "CounterexampleReport",
    "bump",
    "bump_taylor",
    "bump_derivative_at_origin",
    "upper_gamma_integral",
    "truncation_radius",
    "adaptive_panels",
    "eval_u",
    "directional_derivative_u",
    "integrand",
    "iterate_integrand",
    "apply_iterate_under_integral",
    "rho_power_coefficients",
    "center_expansion",
    "iterate_at_center",
    "iterate_l2_norms",
    "counterexample_report",
]

logger = get_logger(__name__)

DEFAULT_OPERATOR = "1*D[2,0]"


#: Gauss–Legendre nodes per panel; the error estimate compares with twice as many.
PANEL_NODES = 16
PANEL_BUDGET = 50_000
INITIAL_PANELS = 32

#: closed-form derivatives are cross-checked by quadrature up to this order.
QUADRATURE_ALPHA_MAX = 10

#: exponent gaps below this count as equal.
GAP_TOLERANCE = 0.05

#: fewest window points for the joint α log α fit.
STIRLING_FIT_MIN = 8


def bump(sigma: float, delta: float, n: int) -> Expr:
    """``g(x) = exp(1 - (1 - |x/(2δ)|²)^{-1/(σ-1)})`` on ``|x| < 2δ``, zero outside."""
    if not sigma > 1:
        raise ParameterError(f"bump order must exceed 1, got sigma={sigma}")
    if not delta > 0:
        raise ParameterError(f"bump radius must be positive, got delta={delta}")
    scale = Const(1.0 / (2.0 * delta))
    return GBump(sigma, 0.0, tuple(Prod((scale, Var(f"x{i + 1}"))) for i in range(n)))


def bump_taylor(sigma: float, delta: float, order: int) -> np.ndarray:
    """Taylor coefficients ``b_0..b_order`` of ``τ ↦ g(τξ)`` for unit ``ξ``.

    With ``c = 1/(4δ²)`` and ``k = 1/(σ-1)`` the exponent is
    ``H(τ) = -Σ_{n≥1} (k)_n/n! cⁿ τ^{2n}`` and ``g = e^H`` satisfies
    ``j b_j = Σ_i i H_i b_{j-i}``.
    """
    if order < 0:
        raise ParameterError(f"order must be nonnegative, got {order}")
    k = 1.0 / (sigma - 1.0)
    c = 1.0 / (4.0 * delta**2)
    H = np.zeros(order + 1)
    rising = 1.0
    for n in range(1, order // 2 + 1):
        rising *= (k + n - 1) / n
        H[2 * n] = -rising * c**n
    b = np.zeros(order + 1)
    b[0] = 1.0
    for j in range(1, order + 1):
        i = np.arange(1, j + 1)
        b[j] = float(np.sum(i * H[i] * b[j - i])) / j
    return b


def bump_derivative_at_origin(sigma: float, delta: float, gamma: Sequence[int]) -> float:
    """``∂^γ g(0)``; only all-even ``γ`` contribute."""
    gamma = MultiIndex(gamma)
    if any(g % 2 for g in gamma):
        return 0.0
    n = gamma.order // 2
    b = bump_taylor(sigma, delta, gamma.order)[gamma.order]
    mu = MultiIndex(g // 2 for g in gamma)
    multinomial = math.factorial(n) // mu.factorial
    return float(gamma.factorial * multinomial) * b


@dataclass(frozen=True)
class MetivierParams:
    """Parameters of the counterexample, validated on construction."""

    s: float = 2.0
    sigma: float = 1.5
    eps: float = 0.1
    delta: float = 0.5
    operator: str = DEFAULT_OPERATOR
    x0: tuple[float, ...] = (0.0, 0.0)
    xi0: tuple[float, ...] = (0.0, 1.0)
    #: require ``P_m(ξ₀) = 0``; off for the elliptic control run
    characteristic: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        object.__setattr__(self, "xi0", tuple(float(v) for v in self.xi0))
        if not self.s > 1:
            raise ConstraintError(f"s must exceed 1, got {self.s}")
        if not 1 < self.sigma < self.s:
            raise ConstraintError(f"sigma must lie in (1, s) = (1, {self.s}), got {self.sigma}")
        if not self.delta > 0:
            raise ConstraintError(f"delta must be positive, got {self.delta}")
        P = self.pdo
        if len(self.x0) != P.dim or len(self.xi0) != P.dim:
            raise DimensionError(
                f"x0 and xi0 must have {P.dim} components to match the operator"
            )
        if not P.is_constant_coefficient():
            raise ParameterError("the counterexample needs a constant-coefficient operator")
        if P.order < 1:
            raise ParameterError("the counterexample needs an operator of order m >= 1")
        bound = self.eps_bound
        if not 0 < self.eps < bound:
            raise ConstraintError(
                f"eps must lie in (0, m(s-sigma)/(2ms-sigma)) = (0, {bound:.6g}), got {self.eps}"
            )
        eta = self.eta
        if not (0 < eta < 1 and 1 / eta > self.s):
            raise ConstraintError(f"eta = {eta:.6g} must satisfy 0 < eta < 1 and 1/eta > s")
        if abs(math.hypot(*self.xi0) - 1.0) > 1e-12:
            raise ConstraintError(f"xi0 must be a unit vector, |xi0| = {math.hypot(*self.xi0)!r}")
        if self.characteristic:
            peak = max(
                abs(principal_symbol(P, self.x0, xi)) for xi in sphere_samples(P.dim)
            )
            value = abs(principal_symbol(P, self.x0, self.xi0))
            if not value < 1e-10 * peak:
                raise ConstraintError(
                    f"|P_m(xi0)| = {value:.3g} is not below 1e-10 of the sphere maximum {peak:.3g}"
                )

    @cached_property
    def pdo(self) -> LinearPDO:
        return parse_operator(self.operator)

    @property
    def dim(self) -> int:
        return self.pdo.dim

    @property
    def m(self) -> int:
        return self.pdo.order

    @property
    def eps_bound(self) -> float:
        m = self.m
        return m * (self.s - self.sigma) / (2 * m * self.s - self.sigma)

    @property
    def eta(self) -> float:
        return (self.m - self.eps) / (self.m * self.s)

    def control(self) -> MetivierParams:
        """Same ``u`` with the Laplacian-type operator in place of ``P``."""
        text = " + ".join(
            "1*D[" + ",".join("2" if j == i else "0" for j in range(self.dim)) + "]"
            for i in range(self.dim)
        )
        return replace(self, operator=text, characteristic=False)

    def as_dict(self) -> dict[str, Any]:
        return {
            "s": self.s,
            "sigma": self.sigma,
            "eps": self.eps,
            "delta": self.delta,
            "operator": self.pdo.to_text(),
            "m": self.m,
            "x0": list(self.x0),
            "xi0": list(self.xi0),
            "eta": self.eta,
            "eps_bound": self.eps_bound,
            "characteristic": self.characteristic,
        }


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error: float
    panels: int
    rho_max: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "re": self.value.real,
            "im": self.value.imag,
            "abs": abs(self.value),
            "error": self.error,
            "panels": self.panels,
            "rho_max": self.rho_max,
        }


def upper_gamma_integral(p: float, eta: float) -> float:
    """``∫_1^∞ ρ^p e^{-ρ^η} dρ = (1/η) Γ((p+1)/η, 1)``."""
    a = (p + 1.0) / eta
    q = float(gammaincc(a, 1.0))
    if q == 0:
        return 0.0
    return math.exp(float(gammaln(a)) + math.log(q)) / eta


def truncation_radius(eta: float, p: float, tol: float) -> float:
    """``ρ_max`` with both ``e^{-ρ^η}`` and the relative tail of ``ρ^p e^{-ρ^η}`` below ``tol/10``."""
    plain = math.log(10.0 / tol) ** (1.0 / eta)
    tail = float(gammainccinv((p + 1.0) / eta, tol / 10.0)) ** (1.0 / eta)
    return max(1.0, plain, tail)


@lru_cache(maxsize=8)
def _rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(n)


def adaptive_panels(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float,
    *,
    max_width: float | None = None,
    nodes: int = PANEL_NODES,
    max_panels: int = PANEL_BUDGET,
) -> tuple[complex, float, int]:
    """Adaptive Gauss–Legendre panels on ``[a, b]``.

    Each panel is integrated with ``n`` and ``2n`` nodes; panels whose
    share of ``Σ|I_2n - I_n|`` is too large are halved until the total
    is below ``tol·max(1, |I|)``.  Returns ``(value, error, panels)``.
    """
    if not b > a:
        return 0j, 0.0, 0
    if a > 0:
        edges = np.geomspace(a, b, INITIAL_PANELS + 1)
    else:
        edges = np.linspace(a, b, INITIAL_PANELS + 1)
    panels: list[tuple[float, float]] = []
    for lo, hi in zip(edges, edges[1:]):
        pieces = 1 if not max_width else max(1, math.ceil((hi - lo) / max_width))
        cuts = np.linspace(lo, hi, pieces + 1)
        panels.extend(zip(cuts, cuts[1:]))

    x1, w1 = _rule(nodes)
    x2, w2 = _rule(2 * nodes)
    known: dict[tuple[float, float], tuple[complex, float]] = {}
    while True:
        fresh = [p for p in panels if p not in known]
        if fresh:
            lo = np.array([p[0] for p in fresh])[:, None]
            hi = np.array([p[1] for p in fresh])[:, None]
            half, mid = (hi - lo) / 2.0, (hi + lo) / 2.0
            coarse = (f((half * x1 + mid).ravel()).reshape(len(fresh), -1) @ w1) * half[:, 0]
            fine = (f((half * x2 + mid).ravel()).reshape(len(fresh), -1) @ w2) * half[:, 0]
            for p, c, v in zip(fresh, coarse, fine):
                known[p] = (complex(v), float(abs(v - c)))
        panels.sort()
        value = sum((known[p][0] for p in panels), 0j)
        errors = np.array([known[p][1] for p in panels])
        error = float(errors.sum())
        target = tol * max(1.0, abs(value))
        if error <= target:
            return value, error, len(panels)
        if len(panels) >= max_panels:
            raise AccuracyError(
                f"quadrature did not reach tolerance {tol:g} within {max_panels} panels",
                error / max(1.0, abs(value)),
            )
        share = target / len(panels)
        worst = set(np.nonzero(errors > share)[0]) or {int(np.argmax(errors))}
        refined = []
        for i, (lo_, hi_) in enumerate(panels):
            if i in worst:
                mid_ = (lo_ + hi_) / 2.0
                refined += [(lo_, mid_), (mid_, hi_)]
            else:
                refined.append((lo_, hi_))
        panels = refined


def _offset(params: MetivierParams, x: Sequence[float]) -> np.ndarray:
    if len(x) != params.dim:
        raise DimensionError(f"point must have {params.dim} components")
    return np.asarray(x, dtype=float) - np.asarray(params.x0)


def _limits(params: MetivierParams, r: np.ndarray, p: float, tol: float, scale: float) -> tuple[float, float | None]:
    """Upper integration limit and panel width bound for offset ``r``."""
    upper = scale * truncation_radius(params.eta, p, tol)
    radius = float(np.linalg.norm(r))
    if radius > 0:
        upper = min(upper, (2.0 * params.delta / radius) ** (1.0 / params.eps))
    k = float(np.dot(r, params.xi0))
    return upper, (math.pi / abs(k) if k else None)


def eval_u(
    params: MetivierParams,
    x: Sequence[float],
    tol: float = 1e-10,
    *,
    rho_max_scale: float = 1.0,
) -> QuadratureResult:
    """``u(x)`` by adaptive panel quadrature of the truncated integral."""
    r = _offset(params, x)
    radius = float(np.linalg.norm(r))
    if radius >= 2.0 * params.delta:
        return QuadratureResult(0j, 0.0, 0, 1.0)
    upper, width = _limits(params, r, 0.0, tol, rho_max_scale)
    c = radius**2 / (4.0 * params.delta**2)
    k = float(np.dot(r, params.xi0))
    eta, eps, sigma = params.eta, params.eps, params.sigma

    def f(rho: np.ndarray) -> np.ndarray:
        return gbump_profile(sigma, 0.0, c * rho ** (2 * eps)) * np.exp(-(rho**eta) + 1j * k * rho)

    value, error, panels = adaptive_panels(f, 1.0, upper, tol, max_width=width)
    return QuadratureResult(value, error + tol / 10.0 * max(1.0, abs(value)), panels, upper)


@dataclass(frozen=True)
class DirectionalDerivative:
    """``D^α_{ξ₀} u(x₀)``: full Leibniz sum and its leading term."""

    alpha: int
    closed: complex
    leading_closed: float
    value: complex | None = None
    leading: complex | None = None
    error: float | None = None

    def as_dict(self) -> dict[str, Any]:
        def pair(z: complex | None) -> dict[str, float] | None:
            return None if z is None else {"re": z.real, "im": z.imag}

        return {
            "alpha": self.alpha,
            "closed": pair(self.closed),
            "abs_closed": abs(self.closed),
            "leading_closed": self.leading_closed,
            "value": pair(self.value),
            "leading": pair(self.leading),
            "error": self.error,
        }


def _leibniz_terms(params: MetivierParams, alpha: int) -> list[tuple[complex, float]]:
    """``(coefficient, ρ-power)`` pairs of ``D^α`` applied under the integral at ``x₀``."""
    b = bump_taylor(params.sigma, params.delta, alpha)
    terms = []
    for j in range(0, alpha + 1, 2):
        if b[j] == 0:
            continue
        coef = math.comb(alpha, j) * math.factorial(j) * b[j] * (-1j) ** j
        terms.append((complex(coef), alpha - j + params.eps * j))
    return terms


def directional_derivative_u(
    params: MetivierParams, alpha: int, tol: float = 1e-10, *, quadrature: bool = True
) -> DirectionalDerivative:
    """Differentiate ``α`` times along ``ξ₀`` under the integral, at ``x₀``.

    The bump contributes its even Taylor coefficients with ``ρ^{εj}``,
    the oscillatory factor ``ρ^{α-j}``; the ``j = 0`` term is the leading
    ``∫ρ^α e^{-ρ^η}dρ = (1/η)Γ((α+1)/η, 1)``.
    """
    if alpha < 0:
        raise ParameterError(f"alpha must be nonnegative, got {alpha}")
    eta = params.eta
    terms = _leibniz_terms(params, alpha)
    closed = sum((c * upper_gamma_integral(p, eta) for c, p in terms), 0j)
    leading_closed = upper_gamma_integral(alpha, eta)
    if not quadrature:
        return DirectionalDerivative(alpha, closed, leading_closed)

    upper = truncation_radius(eta, alpha, tol)
    coefs = np.array([c for c, _ in terms])
    powers = np.array([p for _, p in terms])

    def full(rho: np.ndarray) -> np.ndarray:
        return (rho[:, None] ** powers[None, :] @ coefs) * np.exp(-(rho**eta))

    def lead(rho: np.ndarray) -> np.ndarray:
        return rho**alpha * np.exp(-(rho**eta)) + 0j

    value, error, _ = adaptive_panels(full, 1.0, upper, tol)
    leading, _, _ = adaptive_panels(lead, 1.0, upper, tol)
    return DirectionalDerivative(alpha, closed, leading_closed, value, leading, error)


def integrand(params: MetivierParams) -> Expr:
    """``g(ρ^ε(x-x₀)) e^{iρ⟨x-x₀,ξ₀⟩}`` over ``x1..xn`` and ``rho``."""
    rho = Var("rho")
    scale = Const(1.0 / (2.0 * params.delta))
    offsets = [Sum((Var(f"x{i + 1}"), Const(-v))) for i, v in enumerate(params.x0)]
    args = tuple(Prod((scale, Pow(rho, params.eps), r)) for r in offsets)
    phase = Sum(tuple(Prod((Const(xi), r)) for xi, r in zip(params.xi0, offsets) if xi))
    oscillation = Exp(Prod((Const(1j), rho, phase))) if phase.terms else Const(1)
    return simplify(Prod((GBump(params.sigma, 0.0, args), oscillation)), expand=True)


@lru_cache(maxsize=64)
def iterate_integrand(params: MetivierParams, q: int) -> Expr:
    """``P^q`` applied to :func:`integrand` in ``x``, by repeated application."""
    if q < 0:
        raise ParameterError(f"q must be nonnegative, got {q}")
    if q == 0:
        return integrand(params)
    result = apply(params.pdo, iterate_integrand(params, q - 1))
    logger.debug("iterate integrand", extra={"q": q, "chars": len(result.key)})
    return result


def apply_iterate_under_integral(
    params: MetivierParams, q: int, x: Sequence[float], tol: float = 1e-10
) -> QuadratureResult:
    """``P^q u(x)`` from the symbolic iterate of the integrand."""
    r = _offset(params, x)
    if float(np.linalg.norm(r)) >= 2.0 * params.delta:
        return QuadratureResult(0j, 0.0, 0, 1.0)
    G = iterate_integrand(params, q)
    upper, width = _limits(params, r, float(q * params.m), tol, 1.0)
    env = {f"x{i + 1}": float(v) for i, v in enumerate(x)}
    eta = params.eta

    def f(rho: np.ndarray) -> np.ndarray:
        return evaluate(G, {**env, "rho": rho}) * np.exp(-(rho**eta))

    value, error, panels = adaptive_panels(f, 1.0, upper, tol, max_width=width)
    return QuadratureResult(value, error + tol / 10.0 * max(1.0, abs(value)), panels, upper)


def _round_power(p: float) -> float:
    return round(p, 9) + 0.0


def rho_power_coefficients(params: MetivierParams, q: int) -> dict[float, complex]:
    """``ρ``-power expansion of the ``q``-th iterate integrand at ``x₀``."""
    G = iterate_integrand(params, q)
    at_center = simplify(
        substitute(G, {f"x{i + 1}": v for i, v in enumerate(params.x0)}), expand=True
    )
    coefficients: dict[float, complex] = {}
    for term in at_center.terms if isinstance(at_center, Sum) else (at_center,):
        coef, power = 1 + 0j, 0.0
        for f in term.factors if isinstance(term, Prod) else (term,):
            if isinstance(f, Const):
                coef *= f.value
            elif isinstance(f, Var) and f.name == "rho":
                power += 1.0
            elif isinstance(f, Pow) and isinstance(f.base, Var) and f.base.name == "rho":
                power += f.exponent
            else:
                raise ParameterError(f"unexpected factor {f.key} in the expansion at x0")
        key = _round_power(power)
        coefficients[key] = coefficients.get(key, 0j) + coef
    return dict(sorted(coefficients.items()))


def center_expansion(params: MetivierParams, q: int) -> dict[float, complex]:
    """Closed-form ``ρ``-power expansion of ``P^q`` applied to the integrand at ``x₀``.

    ``∂^β[g(ρ^ε y) e^{iρ⟨y,ξ₀⟩}](0) = Σ_{γ≤β} C(β,γ) ρ^{ε|γ|} ∂^γg(0) (iρξ₀)^{β-γ}``.
    """
    Pq = iterate(params.pdo, q)
    xi0 = params.xi0
    coefficients: dict[float, complex] = {}
    for beta, c in Pq.coefficients.items():
        assert isinstance(c, Const)
        for gamma in beta.below():
            dg = bump_derivative_at_origin(params.sigma, params.delta, gamma)
            if dg == 0:
                continue
            rest = beta - gamma
            osc = math.prod(xi0[i] ** rest[i] for i in range(len(rest))) * 1j ** rest.order
            if osc == 0:
                continue
            key = _round_power(params.eps * gamma.order + rest.order)
            coefficients[key] = coefficients.get(key, 0j) + c.value * beta.binom(gamma) * dg * osc
    return dict(sorted(coefficients.items()))


def iterate_at_center(params: MetivierParams, q: int) -> complex:
    """Closed-form ``P^q u(x₀)``."""
    eta = params.eta
    return sum(
        (c * upper_gamma_integral(p, eta) for p, c in center_expansion(params, q).items()), 0j
    )


def iterate_l2_norms(
    params: MetivierParams,
    J: int,
    K: Box,
    grid: QuadratureGrid | None = None,
    tol: float = 1e-8,
    *,
    workers: int = 1,
) -> list[float]:
    """``q ↦ ‖P^q u‖_{L²(K)}`` by Simpson over pointwise quadratures."""
    if K.dim != params.dim:
        raise DimensionError(f"box has {K.dim} axes, expected {params.dim}")
    grid = grid or QuadratureGrid(17)
    if K.empty:
        return [0.0] * (J + 1)
    points = grid.points(K)
    flat = np.column_stack([points[f"x{i + 1}"].ravel() for i in range(params.dim)])
    norms = []
    for q in range(J + 1):
        values = map_rows(
            lambda x: apply_iterate_under_integral(params, q, x, tol).value, flat, workers=workers
        )
        squared = np.abs(np.array(values)).reshape(points["x1"].shape) ** 2
        norms.append(math.sqrt(max(0.0, float(np.real(grid.integrate(K, squared))))))
    return norms


@dataclass
class CounterexampleReport:
    params: MetivierParams
    weight: str
    target: str
    derivatives: list[DirectionalDerivative]
    iterates: list[complex]
    derivative_exponent: float | None = None
    iterate_exponent: float | None = None
    alpha_log_alpha_slope: float | None = None
    plain_slope: float | None = None
    iterate_norms: list[float] | None = None
    fits: dict[str, RoumieuFit] = field(default_factory=dict)
    caveats: list[str] = field(default_factory=list)

    @property
    def gap(self) -> float | None:
        if self.derivative_exponent is None or self.iterate_exponent is None:
            return None
        return self.derivative_exponent - self.iterate_exponent

    @property
    def verdict(self) -> str | None:
        gap = self.gap
        if gap is None:
            return None
        assert self.iterate_exponent is not None
        if gap > GAP_TOLERANCE and self.iterate_exponent <= self.params.s + GAP_TOLERANCE:
            return "counterexample"
        if abs(gap) < GAP_TOLERANCE:
            return "no counterexample"
        return "inconclusive"

    def as_dict(self) -> dict[str, Any]:
        return {
            "params": self.params.as_dict(),
            "weight": self.weight,
            "target": self.target,
            "derivatives": [d.as_dict() for d in self.derivatives],
            "iterates": [{"q": q, "re": z.real, "im": z.imag, "abs": abs(z)} for q, z in enumerate(self.iterates)],
            "iterate_norms": self.iterate_norms,
            "derivative_exponent": self.derivative_exponent,
            "iterate_exponent": self.iterate_exponent,
            "alpha_log_alpha_slope": self.alpha_log_alpha_slope,
            "plain_slope": self.plain_slope,
            "inverse_eta": 1.0 / self.params.eta,
            "gap": self.gap,
            "verdict": self.verdict,
            "fits": {k: v.as_dict() for k, v in self.fits.items()},
            "caveats": self.caveats,
        }


def _derivative_window(alpha_max: int) -> list[int]:
    if alpha_max >= 25:
        return list(range(10, 26))
    return list(range(max(1, alpha_max // 2), alpha_max + 1))


def _alpha_log_alpha_slopes(window: Sequence[int], logs: Sequence[float]) -> tuple[float, float | None]:
    a = np.asarray(window, dtype=float)
    x = a * np.log(a)
    plain = float(np.polyfit(x, logs, 1)[0])
    if len(a) < STIRLING_FIT_MIN:
        return plain, None
    basis = np.column_stack([x, a, np.log(a), np.ones_like(a), 1.0 / a])
    coef, *_ = np.linalg.lstsq(basis, np.asarray(logs, dtype=float), rcond=None)
    return plain, float(coef[0])


def counterexample_report(
    params: MetivierParams,
    weight: Weight | str = "logpower:s=2",
    target_s: float | None = None,
    J: int = 6,
    alpha_max: int = 25,
    K: Box | None = None,
    tol: float = 1e-10,
    *,
    grid: QuadratureGrid | None = None,
    workers: int = 1,
) -> CounterexampleReport:
    """Derivative side against iterate side for the counterexample ``u``.

    Exponents are fitted Gevrey orders: ``|D^α u(x₀)|`` in ``α`` and
    ``|P^q u(x₀)|`` in ``qm`` for ``q ≥ 1``.  The ``α log α`` slope of
    ``log|D^α u|`` is fitted jointly with ``α``, ``log α``, ``1`` and ``1/α``,
    which absorb the lower Stirling terms; the one-variable slope is kept
    as ``plain_slope`` and sits about 5% below ``1/η`` on ``[10, 25]``.
    """
    if J < 0 or alpha_max < 0:
        raise ParameterError("J and alpha_max must be nonnegative")
    w = weight_from_spec(weight) if isinstance(weight, str) else weight
    target = GevreyWeight(s=target_s if target_s is not None else params.s + 0.5)
    if not target.s > params.s:
        raise ParameterError(f"target order must exceed s={params.s}, got {target.s}")

    derivatives = map_rows(
        lambda a: directional_derivative_u(
            params, a, tol, quadrature=a <= QUADRATURE_ALPHA_MAX
        ),
        range(alpha_max + 1),
        workers=workers,
    )
    iterates = [iterate_at_center(params, q) for q in range(J + 1)]
    report = CounterexampleReport(params, w.spec, target.spec, derivatives, iterates)

    window = _derivative_window(alpha_max)
    if len(window) >= 3:
        logs = [math.log(abs(derivatives[a].closed)) for a in window]
        report.derivative_exponent = gevrey_order(window, logs).order
        report.plain_slope, report.alpha_log_alpha_slope = _alpha_log_alpha_slopes(window, logs)
    else:
        report.caveats.append("derivative window too short for an exponent fit")

    # q = 0 is dominated by the Γ(·, 1) truncation, not by growth
    fitted = [q for q in range(1, J + 1) if abs(iterates[q]) > 0]
    orders = [q * params.m for q in fitted]
    iterate_logs = [math.log(abs(iterates[q])) for q in fitted]
    if len(orders) >= 3:
        report.iterate_exponent = gevrey_order(orders, iterate_logs).order
    else:
        report.caveats.append("iterate window too short for an exponent fit")

    if K is not None:
        report.iterate_norms = iterate_l2_norms(params, J, K, grid, max(tol, 1e-8), workers=workers)

    conj = YoungConjugate(w)
    iterate_table = report.iterate_norms or [abs(z) for z in iterates]
    derivative_table = [abs(d.closed) for d in derivatives]
    report.fits["iterate"] = fit_roumieu(iterate_table, conj, params.m)
    report.fits["derivative"] = fit_roumieu(derivative_table, conj, 1)
    report.fits["derivative_target"] = fit_roumieu(derivative_table, YoungConjugate(target), 1)
    if len(iterate_table) < 4 or len(derivative_table) < 4:
        report.caveats.append("finite window: fewer than four rows per side")

    logger.info(
        "counterexample report",
        extra={
            "derivative_exponent": report.derivative_exponent,
            "iterate_exponent": report.iterate_exponent,
            "verdict": report.verdict,
        },
    )
    return report

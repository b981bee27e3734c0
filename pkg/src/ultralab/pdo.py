"""Linear partial differential operators with expression coefficients.

Operators are stored in ∂-form, ``P = Σ c_α(x) ∂^α``.  The D-form
``Σ a_α(x) D^α`` with ``D = (1/i)∂`` is used for text input and
output only: ``c_α = (-i)^{|α|} a_α``.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from ultralab.exceptions import DimensionError, ParameterError, ParseError, TermBudgetExceeded
from ultralab.symbolic import (
    ZERO,
    Const,
    DerivativeMarker,
    DerivativeTable,
    Expr,
    MultiIndex,
    Parser,
    Prod,
    Sum,
    count_terms,
    evaluate,
    simplify,
    variables,
    walk,
)
from ultralab.utils.logging import get_logger
from ultralab.utils.text import format_index

if TYPE_CHECKING:
    from ultralab.analysis.domain import Box

__all__ = [
    "TERM_BUDGET",
    "LinearPDO",
    "SymbolValue",
    "EllipticityVerdict",
    "identity",
    "parse_operator",
    "apply",
    "compose",
    "iterate",
    "add",
    "scale",
    "commutator",
    "principal_symbol",
    "sphere_samples",
    "ellipticity_check",
]

logger = get_logger(__name__)

#: monomial terms allowed across the coefficients of one composition.
TERM_BUDGET = 1_000_000

MIN_X_SAMPLES = 5
MIN_SPHERE_SAMPLES = {1: 2, 2: 64, 3: 256}
DEFAULT_HIGH_DIM_SAMPLES = 1024


def _d_factor(order: int) -> complex:
    """``(-i)^order``, exact for integer powers."""
    return (1, -1j, -1, 1j)[order % 4]


def _check_coefficient(dim: int, coef: Expr) -> None:
    allowed = {f"x{k}" for k in range(1, dim + 1)}
    stray = variables(coef) - allowed
    if stray:
        raise DimensionError(
            f"coefficient {coef.key} uses {', '.join(sorted(stray))} outside dimension {dim}"
        )


@dataclass(frozen=True)
class LinearPDO:
    """``Σ_α c_α(x) ∂^α``; zero coefficients are dropped."""

    dim: int
    coefficients: Mapping[MultiIndex, Expr] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise DimensionError(f"operator dimension must be positive, got {self.dim}")
        normalized: dict[MultiIndex, Expr] = {}
        for alpha, coef in self.coefficients.items():
            alpha = MultiIndex(alpha)
            if alpha.dim != self.dim:
                raise DimensionError(f"multi-index {tuple(alpha)} does not have {self.dim} components")
            coef = simplify(coef, expand=True)
            if isinstance(coef, Const) and coef.is_zero:
                continue
            _check_coefficient(self.dim, coef)
            normalized[alpha] = coef
        object.__setattr__(self, "coefficients", dict(sorted(normalized.items())))

    def __hash__(self) -> int:
        return hash((self.dim, self.to_text(form="d")))

    def __str__(self) -> str:
        return self.to_text()

    @classmethod
    def from_text(cls, text: str, dim: int | None = None) -> LinearPDO:
        return parse_operator(text, dim)

    @property
    def order(self) -> int:
        return max((alpha.order for alpha in self.coefficients), default=0)

    @property
    def terms(self) -> int:
        return sum(count_terms(c) for c in self.coefficients.values())

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def d_coefficient(self, alpha: Sequence[int]) -> Expr:
        """D-form coefficient ``a_α = i^{|α|} c_α``."""
        alpha = MultiIndex(alpha)
        c = self.coefficients.get(alpha)
        if c is None:
            return ZERO
        return simplify(Prod((Const(1 / _d_factor(alpha.order)), c)), expand=True)

    def is_constant_coefficient(self) -> bool:
        return all(isinstance(c, Const) for c in self.coefficients.values())

    def principal_part(self) -> LinearPDO:
        m = self.order
        return LinearPDO(
            self.dim, {a: c for a, c in self.coefficients.items() if a.order == m}
        )

    def to_text(self, form: str = "D") -> str:
        """Operator text, ``coef*D[α]`` terms (``form="d"`` for ∂-form)."""
        if self.is_zero:
            return f"0*{form}[{format_index(MultiIndex.zero(self.dim))}]"
        parts = []
        for alpha, c in self.coefficients.items():
            coef = self.d_coefficient(alpha) if form == "D" else c
            text = f"({coef.key})" if isinstance(coef, Sum) else coef.key
            parts.append(f"{text}*{form}[{format_index(alpha)}]")
        return " + ".join(parts)

    def as_dict(self) -> dict[str, Any]:
        return {"dim": self.dim, "order": self.order, "text": self.to_text()}


@dataclass(frozen=True)
class SymbolValue:
    x: tuple[float, ...]
    xi: tuple[float, ...]
    value: complex

    def as_dict(self) -> dict[str, Any]:
        return {
            "x": list(self.x),
            "xi": list(self.xi),
            "re": self.value.real,
            "im": self.value.imag,
            "abs": abs(self.value),
        }


@dataclass(frozen=True)
class EllipticityVerdict:
    """Outcome of a sampled ellipticity test (never a proof)."""

    elliptic: bool
    c_min: float
    c_max: float
    threshold: float
    witness: SymbolValue | None
    x_samples: int
    sphere_samples: int
    sampled: bool = True

    def as_dict(self) -> dict[str, Any]:
        return {
            "verdict": "elliptic" if self.elliptic else "non-elliptic",
            "sampled": self.sampled,
            "c_min": self.c_min,
            "c_max": self.c_max,
            "threshold": self.threshold,
            "witness": self.witness.as_dict() if self.witness else None,
            "x_samples": self.x_samples,
            "sphere_samples": self.sphere_samples,
        }


def identity(dim: int) -> LinearPDO:
    return LinearPDO(dim, {MultiIndex.zero(dim): Const(1)})


def parse_operator(text: str, dim: int | None = None) -> LinearPDO:
    """Parse ``coef*D[α] + ...`` (D-form) or ``coef*d[α]`` (∂-form) text."""
    tree = Parser(text, dim=dim, markers=("D", "d")).parse()
    terms = tree.terms if isinstance(tree, Sum) else (tree,)
    parts: dict[MultiIndex, list[Expr]] = {}
    for term in terms:
        factors = term.factors if isinstance(term, Prod) else (term,)
        markers = [f for f in factors if isinstance(f, DerivativeMarker)]
        if len(markers) != 1:
            raise ParseError(
                f"operator term {term.key!r} needs exactly one D[...] marker", text, 0
            )
        (marker,) = markers
        rest = tuple(f for f in factors if f is not marker)
        if any(isinstance(node, DerivativeMarker) for f in rest for node in walk(f)):
            raise ParseError(f"misplaced derivative marker in {term.key!r}", text, 0)
        alpha = marker.alpha
        if dim is None:
            dim = alpha.dim
        elif alpha.dim != dim:
            raise DimensionError(f"multi-index {tuple(alpha)} does not have {dim} components")
        coef: Expr = Prod(rest) if len(rest) > 1 else (rest[0] if rest else Const(1))
        if marker.kind == "D":
            coef = Prod((Const(_d_factor(alpha.order)), coef))
        parts.setdefault(alpha, []).append(coef)
    assert dim is not None
    return LinearPDO(
        dim, {alpha: cs[0] if len(cs) == 1 else Sum(tuple(cs)) for alpha, cs in parts.items()}
    )


def _check_budget(terms: int, budget: int) -> None:
    if terms > budget:
        raise TermBudgetExceeded(budget, terms)


def apply(P: LinearPDO, f: Expr, *, budget: int = TERM_BUDGET) -> Expr:
    """``P f`` simplified with products expanded."""
    derivatives = DerivativeTable(f)
    parts = []
    for alpha, c in P.coefficients.items():
        d = derivatives[alpha]
        if not (isinstance(d, Const) and d.is_zero):
            parts.append(Prod((c, d)))
    _check_budget(sum(count_terms(p.factors[1]) for p in parts), budget)
    if not parts:
        return ZERO
    return simplify(Sum(tuple(parts)), expand=True)


def compose(P: LinearPDO, Q: LinearPDO, *, budget: int = TERM_BUDGET) -> LinearPDO:
    """``P ∘ Q`` by the Leibniz rule.

    ``c_α ∂^α (b_β ∂^β) = Σ_{γ≤α} C(α,γ) c_α (∂^γ b_β) ∂^{α-γ+β}``.
    """
    if P.dim != Q.dim:
        raise DimensionError(f"cannot compose operators of dimension {P.dim} and {Q.dim}")
    memo = {beta: DerivativeTable(b) for beta, b in Q.coefficients.items()}
    parts: dict[MultiIndex, list[Expr]] = {}
    for alpha, a in P.coefficients.items():
        for gamma in alpha.below():
            weight = alpha.binom(gamma)
            for beta, derivatives in memo.items():
                db = derivatives[gamma]
                if isinstance(db, Const) and db.is_zero:
                    continue
                parts.setdefault(alpha - gamma + beta, []).append(
                    Prod((Const(weight), a, db))
                )
    raw_terms = sum(len(v) for v in parts.values())
    _check_budget(raw_terms, budget)
    result = LinearPDO(
        P.dim, {k: v[0] if len(v) == 1 else Sum(tuple(v)) for k, v in parts.items()}
    )
    _check_budget(result.terms, budget)
    return result


def iterate(P: LinearPDO, q: int, *, budget: int = TERM_BUDGET) -> LinearPDO:
    """``P^q``; ``q = 0`` is the identity."""
    if q < 0:
        raise ParameterError(f"iterate count must be nonnegative, got {q}")
    result = identity(P.dim)
    for step in range(1, q + 1):
        result = compose(P, result, budget=budget)
        logger.debug(
            "iterate", extra={"q": step, "coefficients": len(result.coefficients), "terms": result.terms}
        )
    return result


def add(P: LinearPDO, Q: LinearPDO) -> LinearPDO:
    if P.dim != Q.dim:
        raise DimensionError(f"cannot add operators of dimension {P.dim} and {Q.dim}")
    parts: dict[MultiIndex, list[Expr]] = {}
    for op in (P, Q):
        for alpha, c in op.coefficients.items():
            parts.setdefault(alpha, []).append(c)
    return LinearPDO(P.dim, {k: v[0] if len(v) == 1 else Sum(tuple(v)) for k, v in parts.items()})


def scale(P: LinearPDO, factor: Expr | complex) -> LinearPDO:
    f = factor if isinstance(factor, Expr) else Const(factor)
    return LinearPDO(P.dim, {k: Prod((f, c)) for k, c in P.coefficients.items()})


def commutator(P: LinearPDO, Q: LinearPDO) -> LinearPDO:
    """``P∘Q - Q∘P``."""
    return add(compose(P, Q), scale(compose(Q, P), -1))


def _symbol_coefficients(P: LinearPDO) -> list[tuple[MultiIndex, Expr]]:
    m = P.order
    return [(alpha, P.d_coefficient(alpha)) for alpha in P.coefficients if alpha.order == m]


def principal_symbol(P: LinearPDO, x: Sequence[float], xi: Sequence[float]) -> complex:
    """``P_m(x, ξ) = Σ_{|α|=m} a_α(x) ξ^α`` in the D convention."""
    if len(x) != P.dim or len(xi) != P.dim:
        raise DimensionError(f"point and covector must have {P.dim} components")
    env = {f"x{k + 1}": float(v) for k, v in enumerate(x)}
    total = 0j
    for alpha, a in _symbol_coefficients(P):
        total += complex(evaluate(a, env)) * math.prod(float(v) ** k for v, k in zip(xi, alpha))
    return total


def sphere_samples(dim: int, count: int | None = None, *, seed: int = 0) -> np.ndarray:
    """Deterministic unit covectors, shape ``(count, dim)``."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    minimum = MIN_SPHERE_SAMPLES.get(dim, DEFAULT_HIGH_DIM_SAMPLES)
    count = max(minimum, count or minimum)
    if dim == 2:
        theta = np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)
        return np.column_stack((np.cos(theta), np.sin(theta)))
    if dim == 3:
        # Fibonacci lattice
        k = np.arange(count) + 0.5
        z = 1.0 - 2.0 * k / count
        r = np.sqrt(1.0 - z**2)
        theta = math.pi * (1.0 + math.sqrt(5.0)) * k
        return np.column_stack((r * np.cos(theta), r * np.sin(theta), z))
    points = np.random.default_rng(seed).standard_normal((count, dim))
    return points / np.linalg.norm(points, axis=1, keepdims=True)


def _box_intervals(K: Box | Iterable[tuple[float, float]]) -> list[tuple[float, float]]:
    return [(float(a), float(b)) for a, b in getattr(K, "intervals", K)]


def ellipticity_check(
    P: LinearPDO,
    K: Box | Iterable[tuple[float, float]],
    x_samples: int = MIN_X_SAMPLES,
    sphere_samples_count: int | None = None,
    threshold: float = 1e-9,
    *,
    seed: int = 0,
) -> EllipticityVerdict:
    """Sample ``|P_m(x, ξ)|`` over ``K × S^{n-1}``.

    The threshold is relative to the largest sampled magnitude.
    """
    intervals = _box_intervals(K)
    if len(intervals) != P.dim:
        raise DimensionError(f"box has {len(intervals)} axes, operator dimension is {P.dim}")
    per_axis = max(MIN_X_SAMPLES, x_samples)
    axes = [np.linspace(a, b, per_axis) for a, b in intervals]
    grids = np.meshgrid(*axes, indexing="ij")
    xs = np.column_stack([g.ravel() for g in grids])
    xis = sphere_samples(P.dim, sphere_samples_count, seed=seed)

    env = {f"x{k + 1}": xs[:, k] for k in range(P.dim)}
    values = np.zeros((len(xs), len(xis)), dtype=complex)
    for alpha, a in _symbol_coefficients(P):
        coef = evaluate(a, env)
        monomial = np.prod(xis ** np.asarray(alpha, dtype=float), axis=1)
        values += coef[:, None] * monomial[None, :]
    magnitude = np.abs(values)
    c_max = float(magnitude.max())
    c_min = float(magnitude.min())
    cutoff = threshold * c_max
    ix, ik = np.unravel_index(int(np.argmin(magnitude)), magnitude.shape)
    elliptic = c_max > 0 and c_min >= cutoff
    witness = None
    if not elliptic:
        witness = SymbolValue(
            tuple(float(v) for v in xs[ix]), tuple(float(v) for v in xis[ik]), complex(values[ix, ik])
        )
    logger.debug(
        "ellipticity sampled",
        extra={"c_min": c_min, "c_max": c_max, "points": len(xs), "covectors": len(xis)},
    )
    return EllipticityVerdict(
        bool(elliptic), c_min, c_max, cutoff, witness, len(xs), len(xis)
    )

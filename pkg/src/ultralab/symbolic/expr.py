"""Immutable expression trees with exact differentiation.

Nodes compare and hash by their canonical printed form (``key``), which
is also the text serialization: ``parse(e.key)`` rebuilds ``e`` for every
expression produced by :func:`simplify` or the parser.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Any, ClassVar

import numpy as np

from ultralab.exceptions import DomainError, ParameterError, TermBudgetExceeded
from ultralab.utils.text import abbr

__all__ = [
    "Expr",
    "Const",
    "Var",
    "Sum",
    "Prod",
    "Pow",
    "Func",
    "Exp",
    "Log",
    "Sin",
    "Cos",
    "GBump",
    "ZERO",
    "ONE",
    "I",
    "as_expr",
    "negate",
    "differentiate",
    "evaluate",
    "evaluate_at",
    "simplify",
    "substitute",
    "variables",
    "count_terms",
]

#: products distributed by ``simplify(expand=True)`` may not exceed this.
EXPANSION_BUDGET = 1_000_000

Number = int | float | complex


def format_real(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _format_number(v: float) -> str:
    text = format_real(v)
    return f"({text})" if v < 0 else text


def _is_real(v: complex) -> bool:
    return v.imag == 0


class Expr:
    """Base class of expression nodes."""

    precedence: ClassVar[int] = 100

    def children(self) -> tuple[Expr, ...]:
        return ()

    @cached_property
    def key(self) -> str:
        return self._text()

    def _text(self) -> str:
        raise NotImplementedError()

    def __str__(self) -> str:
        return self.key

    def __repr__(self) -> str:
        return f"<{type(self).__name__}: {abbr(self.key, 60)}>"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Expr):
            return NotImplemented
        return self is other or self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __add__(self, other: Any) -> Expr:
        return Sum((self, as_expr(other)))

    def __radd__(self, other: Any) -> Expr:
        return Sum((as_expr(other), self))

    def __sub__(self, other: Any) -> Expr:
        return Sum((self, negate(as_expr(other))))

    def __rsub__(self, other: Any) -> Expr:
        return Sum((as_expr(other), negate(self)))

    def __mul__(self, other: Any) -> Expr:
        return Prod((self, as_expr(other)))

    def __rmul__(self, other: Any) -> Expr:
        return Prod((as_expr(other), self))

    def __truediv__(self, other: Any) -> Expr:
        return Prod((self, Pow(as_expr(other), -1.0)))

    def __neg__(self) -> Expr:
        return negate(self)

    def __pow__(self, exponent: float) -> Expr:
        return Pow(self, exponent)

    def _eval(self, env: Mapping[str, np.ndarray], memo: dict[str, Any]) -> Any:
        raise NotImplementedError()

    def _diff(self, name: str, memo: dict[str, Expr | None]) -> Expr | None:
        raise NotImplementedError()

    def _simplify(self, expand: bool, memo: dict[str, Expr]) -> Expr:
        return self

    def rebuild(self, children: Sequence[Expr]) -> Expr:
        return self


@dataclass(frozen=True, eq=False)
class Const(Expr):
    value: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", complex(self.value))

    def _text(self) -> str:
        v = self.value
        if _is_real(v):
            return _format_number(v.real)
        im = v.imag
        if v.real == 0:
            return f"({format_real(im)}*i)"
        sign = "+" if im >= 0 else "-"
        return f"({format_real(v.real)}{sign}{format_real(abs(im))}*i)"

    @property
    def is_zero(self) -> bool:
        return self.value == 0

    def _eval(self, env: Mapping[str, np.ndarray], memo: dict[str, Any]) -> Any:
        return self.value

    def _diff(self, name: str, memo: dict[str, Expr | None]) -> Expr | None:
        return None


ZERO = Const(0)
ONE = Const(1)
I = Const(1j)  # noqa: E741


@dataclass(frozen=True, eq=False)
class Var(Expr):
    name: str

    def _text(self) -> str:
        return self.name

    def _eval(self, env: Mapping[str, np.ndarray], memo: dict[str, Any]) -> Any:
        try:
            return env[self.name]
        except KeyError:
            raise DomainError("no value bound for variable", self.name) from None

    def _diff(self, name: str, memo: dict[str, Expr | None]) -> Expr | None:
        return ONE if name == self.name else None


@dataclass(frozen=True, eq=False)
class Sum(Expr):
    terms: tuple[Expr, ...]

    precedence = 10

    def children(self) -> tuple[Expr, ...]:
        return self.terms

    def rebuild(self, children: Sequence[Expr]) -> Expr:
        return Sum(tuple(children))

    def _text(self) -> str:
        return " + ".join(f"({t.key})" if isinstance(t, Sum) else t.key for t in self.terms)

    def _eval(self, env: Mapping[str, np.ndarray], memo: dict[str, Any]) -> Any:
        total: Any = 0
        for t in self.terms:
            total = total + _evaluate(t, env, memo)
        return total

    def _diff(self, name: str, memo: dict[str, Expr | None]) -> Expr | None:
        parts = [d for d in (_differentiate(t, name, memo) for t in self.terms) if d is not None]
        if not parts:
            return None
        return parts[0] if len(parts) == 1 else Sum(tuple(parts))

    def _simplify(self, expand: bool, memo: dict[str, Expr]) -> Expr:
        return _collect_sum(_flatten(Sum, (_simplify(t, expand, memo) for t in self.terms)))


@dataclass(frozen=True, eq=False)
class Prod(Expr):
    factors: tuple[Expr, ...]

    precedence = 20

    def children(self) -> tuple[Expr, ...]:
        return self.factors

    def rebuild(self, children: Sequence[Expr]) -> Expr:
        return Prod(tuple(children))

    def _text(self) -> str:
        return "*".join(
            f"({f.key})" if isinstance(f, (Sum, Prod)) else f.key for f in self.factors
        )

    def _eval(self, env: Mapping[str, np.ndarray], memo: dict[str, Any]) -> Any:
        total: Any = 1
        for f in self.factors:
            total = total * _evaluate(f, env, memo)
        return total

    def _diff(self, name: str, memo: dict[str, Expr | None]) -> Expr | None:
        parts: list[Expr] = []
        factors = self.factors
        for i, f in enumerate(factors):
            d = _differentiate(f, name, memo)
            if d is None:
                continue
            rest = factors[:i] + factors[i + 1 :]
            parts.append(Prod(rest + (d,)) if rest else d)
        if not parts:
            return None
        return parts[0] if len(parts) == 1 else Sum(tuple(parts))

    def _simplify(self, expand: bool, memo: dict[str, Expr]) -> Expr:
        return _collect_product(
            _flatten(Prod, (_simplify(f, expand, memo) for f in self.factors)), expand, memo
        )


@dataclass(frozen=True, eq=False)
class Pow(Expr):
    base: Expr
    exponent: float

    precedence = 30

    def __post_init__(self) -> None:
        exponent = self.exponent
        if isinstance(exponent, complex):
            if exponent.imag != 0:
                raise ParameterError("exponents must be real constants")
            exponent = exponent.real
        object.__setattr__(self, "exponent", float(exponent))

    def children(self) -> tuple[Expr, ...]:
        return (self.base,)

    def rebuild(self, children: Sequence[Expr]) -> Expr:
        return Pow(children[0], self.exponent)

    def _text(self) -> str:
        base = self.base
        plain = isinstance(base, (Var, Func, GBump)) or (
            isinstance(base, Const) and _is_real(base.value) and base.value.real >= 0
        )
        btext = base.key if plain else f"({base.key})"
        return f"{btext}^{_format_number(self.exponent)}"

    @property
    def integral(self) -> bool:
        return self.exponent.is_integer()

    def _eval(self, env: Mapping[str, np.ndarray], memo: dict[str, Any]) -> Any:
        base = np.asarray(_evaluate(self.base, env, memo), dtype=complex)
        if self.integral:
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                return base ** int(self.exponent)
        if np.any(base.imag != 0) or np.any(base.real <= 0):
            raise DomainError("non-integer power of a non-positive base", abbr(self.key, 80))
        return base.real**self.exponent

    def _diff(self, name: str, memo: dict[str, Expr | None]) -> Expr | None:
        d = _differentiate(self.base, name, memo)
        if d is None:
            return None
        p = self.exponent
        return Prod((Const(p), Pow(self.base, p - 1.0), d))

    def _simplify(self, expand: bool, memo: dict[str, Expr]) -> Expr:
        return _make_power(_simplify(self.base, expand, memo), self.exponent, expand, memo)


@dataclass(frozen=True, eq=False)
class Func(Expr):
    """Elementary function of one argument."""

    arg: Expr

    name: ClassVar[str]
    precedence = 40

    def children(self) -> tuple[Expr, ...]:
        return (self.arg,)

    def rebuild(self, children: Sequence[Expr]) -> Expr:
        return type(self)(children[0])

    def _text(self) -> str:
        return f"{self.name}({self.arg.key})"

    def fold(self, value: complex) -> complex | None:
        raise NotImplementedError()

    def _simplify(self, expand: bool, memo: dict[str, Expr]) -> Expr:
        arg = _simplify(self.arg, expand, memo)
        if isinstance(arg, Const):
            folded = self.fold(arg.value)
            if folded is not None:
                return Const(folded)
        return type(self)(arg)


class Exp(Func):
    name = "exp"

    def fold(self, value: complex) -> complex | None:
        return cmath.exp(value)

    def _eval(self, env: Mapping[str, np.ndarray], memo: dict[str, Any]) -> Any:
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(_evaluate(self.arg, env, memo))

    def _diff(self, name: str, memo: dict[str, Expr | None]) -> Expr | None:
        d = _differentiate(self.arg, name, memo)
        return None if d is None else Prod((self, d))


class Log(Func):
    name = "log"

    def fold(self, value: complex) -> complex | None:
        if _is_real(value) and value.real > 0:
            return math.log(value.real)
        return None

    def _eval(self, env: Mapping[str, np.ndarray], memo: dict[str, Any]) -> Any:
        arg = np.asarray(_evaluate(self.arg, env, memo), dtype=complex)
        if np.any(arg.imag != 0) or np.any(arg.real <= 0):
            raise DomainError("log of a non-positive value", abbr(self.key, 80))
        return np.log(arg.real)

    def _diff(self, name: str, memo: dict[str, Expr | None]) -> Expr | None:
        d = _differentiate(self.arg, name, memo)
        return None if d is None else Prod((d, Pow(self.arg, -1.0)))


class Sin(Func):
    name = "sin"

    def fold(self, value: complex) -> complex | None:
        return cmath.sin(value)

    def _eval(self, env: Mapping[str, np.ndarray], memo: dict[str, Any]) -> Any:
        return np.sin(_evaluate(self.arg, env, memo))

    def _diff(self, name: str, memo: dict[str, Expr | None]) -> Expr | None:
        d = _differentiate(self.arg, name, memo)
        return None if d is None else Prod((Cos(self.arg), d))


class Cos(Func):
    name = "cos"

    def fold(self, value: complex) -> complex | None:
        return cmath.cos(value)

    def _eval(self, env: Mapping[str, np.ndarray], memo: dict[str, Any]) -> Any:
        return np.cos(_evaluate(self.arg, env, memo))

    def _diff(self, name: str, memo: dict[str, Expr | None]) -> Expr | None:
        d = _differentiate(self.arg, name, memo)
        return None if d is None else Prod((Const(-1), Sin(self.arg), d))


FUNCTIONS: Mapping[str, type[Func]] = {cls.name: cls for cls in (Exp, Log, Sin, Cos)}


def gbump_profile(sigma: float, power: float, w: np.ndarray) -> np.ndarray:
    """``(1-w)^{-p} exp(1 - (1-w)^{-k})`` for ``w < 1``, zero elsewhere."""
    k = 1.0 / (sigma - 1.0)
    w = np.asarray(w, dtype=float)
    inside = w < 1.0
    one_minus = np.where(inside, 1.0 - w, 1.0)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        log_value = 1.0 - one_minus ** (-k) - power * np.log(one_minus)
        value = np.exp(log_value)
    return np.where(inside, value, 0.0)


@dataclass(frozen=True, eq=False)
class GBump(Expr):
    """Gevrey bump profile of the radial argument ``w = Σ r_i²``.

    ``power = 0`` is the profile itself, the other powers appear in its
    derivatives.
    """

    sigma: float
    power: float
    args: tuple[Expr, ...]

    precedence = 40

    def __post_init__(self) -> None:
        if not self.sigma > 1:
            raise ParameterError(f"bump order must exceed 1, got sigma={self.sigma}")
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "power", float(self.power))

    @property
    def k(self) -> float:
        return 1.0 / (self.sigma - 1.0)

    def children(self) -> tuple[Expr, ...]:
        return self.args

    def rebuild(self, children: Sequence[Expr]) -> Expr:
        return GBump(self.sigma, self.power, tuple(children))

    def _text(self) -> str:
        args = ", ".join(a.key for a in self.args)
        if self.power == 0:
            return f"gbump({format_real(self.sigma)}, {args})"
        return f"gbumpw({format_real(self.sigma)}, {format_real(self.power)}, {args})"

    def _eval(self, env: Mapping[str, np.ndarray], memo: dict[str, Any]) -> Any:
        w: Any = 0.0
        for a in self.args:
            r = np.asarray(_evaluate(a, env, memo), dtype=complex)
            if np.any(np.abs(r.imag) > 1e-12 * (1.0 + np.abs(r.real))):
                raise DomainError("bump argument must be real", abbr(self.key, 80))
            w = w + r.real**2
        return gbump_profile(self.sigma, self.power, w)

    def _diff(self, name: str, memo: dict[str, Expr | None]) -> Expr | None:
        inner: list[Expr] = []
        for a in self.args:
            d = _differentiate(a, name, memo)
            if d is not None:
                inner.append(Prod((Const(2), a, d)))
        if not inner:
            return None
        dw = inner[0] if len(inner) == 1 else Sum(tuple(inner))
        p, k = self.power, self.k
        outer_terms: list[Expr] = []
        if p != 0:
            outer_terms.append(Prod((Const(p), GBump(self.sigma, p + 1.0, self.args))))
        outer_terms.append(Prod((Const(-k), GBump(self.sigma, p + k + 1.0, self.args))))
        outer = outer_terms[0] if len(outer_terms) == 1 else Sum(tuple(outer_terms))
        return Prod((dw, outer))

    def _simplify(self, expand: bool, memo: dict[str, Expr]) -> Expr:
        args = tuple(_simplify(a, expand, memo) for a in self.args)
        if all(isinstance(a, Const) for a in args):
            values = [cast_const(a) for a in args]
            if all(_is_real(v) for v in values):
                w = sum(v.real**2 for v in values)
                return Const(float(gbump_profile(self.sigma, self.power, np.asarray(w))))
        return GBump(self.sigma, self.power, args)


def cast_const(e: Expr) -> complex:
    assert isinstance(e, Const)
    return e.value


def as_expr(value: Expr | Number) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float, complex, np.number)):
        return Const(complex(value))
    raise TypeError(f"Cannot convert {type(value).__name__} to expression")


def negate(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(-e.value)
    if isinstance(e, Prod):
        return Prod((Const(-1),) + e.factors)
    return Prod((Const(-1), e))


# -- evaluation


def _evaluate(e: Expr, env: Mapping[str, np.ndarray], memo: dict[str, Any]) -> Any:
    k = e.key
    try:
        return memo[k]
    except KeyError:
        pass
    value = e._eval(env, memo)
    if not np.all(np.isfinite(value)):
        raise DomainError("expression is not finite", abbr(k, 80))
    memo[k] = value
    return value


def evaluate(e: Expr, env: Mapping[str, Any]) -> np.ndarray:
    """Vectorized complex evaluation; ``env`` maps variable names to arrays."""
    arrays = {name: np.asarray(v) for name, v in env.items()}
    shape = np.broadcast_shapes(*(a.shape for a in arrays.values())) if arrays else ()
    value = _evaluate(e, arrays, {})
    return np.array(np.broadcast_to(np.asarray(value, dtype=complex), shape))


def evaluate_at(
    e: Expr, point: Sequence[float], *, rho: float | None = None
) -> complex:
    """Evaluate at ``x = point`` (and optionally ``rho``)."""
    env: dict[str, Any] = {f"x{i + 1}": float(v) for i, v in enumerate(point)}
    if rho is not None:
        env["rho"] = float(rho)
    return complex(evaluate(e, env))


# -- differentiation


def _differentiate(e: Expr, name: str, memo: dict[str, Expr | None]) -> Expr | None:
    k = e.key
    if k in memo:
        return memo[k]
    d = e._diff(name, memo)
    memo[k] = d
    return d


def differentiate(e: Expr, name: str, *, expand: bool = False) -> Expr:
    """Exact partial derivative with respect to the variable ``name``."""
    d = _differentiate(e, name, {})
    if d is None:
        return ZERO
    return simplify(d, expand=expand)


# -- simplification


def _simplify(e: Expr, expand: bool, memo: dict[str, Expr]) -> Expr:
    k = e.key
    try:
        return memo[k]
    except KeyError:
        pass
    r = e._simplify(expand, memo)
    memo[k] = r
    return r


def simplify(e: Expr, *, expand: bool = False) -> Expr:
    """Normalize an expression.

    Flattens sums and products, multiplies constants, merges powers of
    equal bases, collects like monomials and folds constant function
    calls.  With ``expand`` products are distributed over sums.
    """
    return _simplify(e, expand, {})


def _flatten(kind: type[Sum] | type[Prod], items: Iterable[Expr]) -> list[Expr]:
    out: list[Expr] = []
    for item in items:
        if isinstance(item, kind):
            out.extend(item.children())
        else:
            out.append(item)
    return out


def _split_term(t: Expr) -> tuple[complex, tuple[Expr, ...]]:
    if isinstance(t, Const):
        return t.value, ()
    if isinstance(t, Prod):
        coef = 1 + 0j
        rest = []
        for f in t.factors:
            if isinstance(f, Const):
                coef *= f.value
            else:
                rest.append(f)
        return coef, tuple(rest)
    return 1 + 0j, (t,)


def _build_term(coef: complex, factors: tuple[Expr, ...]) -> Expr:
    if not factors or coef == 0:
        return Const(coef)
    if coef == 1:
        return factors[0] if len(factors) == 1 else Prod(factors)
    return Prod((Const(coef),) + factors)


def _collect_sum(terms: list[Expr]) -> Expr:
    coefs: dict[str, complex] = {}
    monomials: dict[str, tuple[Expr, ...]] = {}
    for t in terms:
        coef, factors = _split_term(t)
        mk = "*".join(f.key for f in factors)
        coefs[mk] = coefs.get(mk, 0j) + coef
        monomials.setdefault(mk, factors)
    built = [
        _build_term(coefs[mk], monomials[mk]) for mk in sorted(coefs) if coefs[mk] != 0
    ]
    if not built:
        return ZERO
    return built[0] if len(built) == 1 else Sum(tuple(built))


def _make_power(base: Expr, p: float, expand: bool, memo: dict[str, Expr]) -> Expr:
    if p == 0:
        return ONE
    if p == 1:
        return base
    integral = float(p).is_integer()
    if isinstance(base, Const):
        v = base.value
        if v == 0 and p < 0:
            return Pow(base, p)
        if integral:
            return Const(v ** int(p))
        if _is_real(v) and v.real > 0:
            return Const(v.real**p)
        return Pow(base, p)
    if isinstance(base, Pow) and integral:
        return _make_power(base.base, base.exponent * p, expand, memo)
    if isinstance(base, Prod) and integral:
        return _collect_product([_make_power(f, p, expand, memo) for f in base.factors], expand, memo)
    if expand and isinstance(base, Sum) and integral and 1 < p <= 64:
        return _distribute(1 + 0j, [base] * int(p), expand, memo)
    return Pow(base, p)


def _collect_product(factors: list[Expr], expand: bool, memo: dict[str, Expr]) -> Expr:
    coef = 1 + 0j
    bases: dict[str, Expr] = {}
    exponents: dict[str, float] = {}
    for f in factors:
        if isinstance(f, Const):
            coef *= f.value
            continue
        if isinstance(f, Pow):
            base, p = f.base, f.exponent
        else:
            base, p = f, 1.0
        bk = base.key
        bases.setdefault(bk, base)
        exponents[bk] = exponents.get(bk, 0.0) + p
    if coef == 0:
        return ZERO

    rest: list[Expr] = []
    for bk in bases:
        r = _make_power(bases[bk], exponents[bk], expand, memo)
        if isinstance(r, Const):
            coef *= r.value
        elif isinstance(r, Prod):
            for g in r.factors:
                if isinstance(g, Const):
                    coef *= g.value
                else:
                    rest.append(g)
        else:
            rest.append(r)
    if coef == 0:
        return ZERO

    if expand and any(isinstance(f, Sum) for f in rest):
        return _distribute(coef, rest, expand, memo)
    rest.sort(key=lambda f: f.key)
    return _build_term(coef, tuple(rest))


def _distribute(coef: complex, factors: list[Expr], expand: bool, memo: dict[str, Expr]) -> Expr:
    products: list[list[Expr]] = [[Const(coef)]]
    for f in factors:
        if isinstance(f, Sum):
            if len(products) * len(f.terms) > EXPANSION_BUDGET:
                raise TermBudgetExceeded(EXPANSION_BUDGET, len(products) * len(f.terms))
            products = [p + [t] for p in products for t in f.terms]
        else:
            for p in products:
                p.append(f)
    terms = [_collect_product(_flatten(Prod, p), expand, memo) for p in products]
    return _collect_sum(_flatten(Sum, terms))


# -- traversal


def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def variables(e: Expr) -> set[str]:
    return {node.name for node in walk(e) if isinstance(node, Var)}


def substitute(e: Expr, mapping: Mapping[str, Expr | Number]) -> Expr:
    """Replace variables by expressions (not simplified)."""
    replacements = {name: as_expr(v) for name, v in mapping.items()}
    memo: dict[str, Expr] = {}

    def visit(node: Expr) -> Expr:
        k = node.key
        if k in memo:
            return memo[k]
        if isinstance(node, Var):
            out = replacements.get(node.name, node)
        elif node.children():
            out = node.rebuild([visit(c) for c in node.children()])
        else:
            out = node
        memo[k] = out
        return out

    return visit(e)


def count_terms(e: Expr) -> int:
    """Number of top-level summands."""
    if isinstance(e, Sum):
        return len(e.terms)
    return 0 if isinstance(e, Const) and e.is_zero else 1

"""Recursive-descent parser for the expression grammar.

Grammar::

    expr   = term { ("+" | "-") term } ;
    term   = unary { ("*" | "/") unary } ;
    unary  = ("-" | "+") unary | power ;
    power  = atom [ "^" unary ] ;
    atom   = number | name | name "(" args ")" | name "[" ints "]" | "(" expr ")" ;

Exponents must reduce to real constants, except that a positive
constant base raised to an expression becomes an exponential.
"""

from __future__ import annotations

import math
import re
from collections.abc import Collection, Iterator
from dataclasses import dataclass
from typing import NamedTuple

from ultralab.exceptions import ParameterError, ParseError, UnknownIdentifier
from ultralab.utils.text import didyoumean, format_index

from .expr import (
    FUNCTIONS,
    Const,
    Exp,
    Expr,
    GBump,
    Log,
    Pow,
    Prod,
    Sum,
    Var,
    negate,
)
from .multiindex import MultiIndex

__all__ = ["DerivativeMarker", "Parser", "parse"]

CONSTANTS = {"pi": math.pi, "e": math.e, "i": 1j}
AUXILIARY = "rho"
EXTRA_FUNCTIONS = ("sqrt", "gbump", "gbumpw")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),\[\]])
    """,
    re.VERBOSE,
)
_VARIABLE_RE = re.compile(r"x([1-9]\d*)")


class Token(NamedTuple):
    kind: str
    text: str
    pos: int


@dataclass(frozen=True, eq=False)
class DerivativeMarker(Expr):
    """Placeholder for ``D[α]`` / ``d[α]`` in operator text."""

    kind: str
    alpha: MultiIndex

    def _text(self) -> str:
        return f"{self.kind}[{format_index(self.alpha)}]"


def tokenize(text: str) -> Iterator[Token]:
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = match.lastgroup
        assert kind is not None
        if kind != "ws":
            yield Token(kind, match.group(), pos)
        pos = match.end()
    yield Token("end", "", len(text))


def _fold_power(base: Const, p: float) -> Const | None:
    v = base.value
    if float(p).is_integer() and not (v == 0 and p < 0):
        return Const(v ** int(p))
    if v.imag == 0 and v.real > 0:
        return Const(v.real**p)
    return None


class Parser:
    """Parser for one input string.

    ``dim`` bounds the admissible variables ``x1..x{dim}`` (any index
    when ``None``); ``markers`` enables derivative placeholders such as
    ``D[2,0]``.
    """

    def __init__(
        self, text: str, *, dim: int | None = None, markers: Collection[str] = ()
    ) -> None:
        self.text = text
        self.dim = dim
        self.markers = frozenset(markers)
        self.tokens = list(tokenize(text))
        self.index = 0
        self._grouped: dict[int, Expr] = {}

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def error(self, message: str, token: Token | None = None) -> ParseError:
        token = token or self.current
        return ParseError(message, self.text, token.pos)

    def expect(self, text: str) -> Token:
        token = self.current
        if token.text != text or token.kind == "end":
            found = "end of input" if token.kind == "end" else repr(token.text)
            raise self.error(f"expected {text!r}, found {found}")
        return self.advance()

    def parse(self) -> Expr:
        expr = self.expr()
        if self.current.kind != "end":
            raise self.error(f"unexpected {self.current.text!r}")
        return expr

    def _chain(self, kind: type[Sum] | type[Prod], items: list[Expr]) -> Expr:
        if len(items) == 1:
            return items[0]
        flat: list[Expr] = []
        for item in items:
            if isinstance(item, kind) and id(item) not in self._grouped:
                flat.extend(item.children())
            else:
                flat.append(item)
        if all(isinstance(f, Const) for f in flat):
            if kind is Sum:
                return Const(sum((f.value for f in flat), 0j))  # type: ignore[attr-defined]
            return Const(math.prod(f.value for f in flat))  # type: ignore[attr-defined]
        return kind(tuple(flat))

    def expr(self) -> Expr:
        items = [self.term()]
        while self.current.text in ("+", "-") and self.current.kind == "op":
            op = self.advance().text
            item = self.term()
            items.append(item if op == "+" else negate(item))
        return self._chain(Sum, items)

    def term(self) -> Expr:
        items = [self.unary()]
        while self.current.text in ("*", "/") and self.current.kind == "op":
            op = self.advance().text
            token = self.current
            item = self.unary()
            if op == "/":
                if isinstance(item, Const):
                    if item.value == 0:
                        raise self.error("division by zero", token)
                    item = Const(1 / item.value)
                else:
                    item = Pow(item, -1.0)
            items.append(item)
        return self._chain(Prod, items)

    def unary(self) -> Expr:
        if self.current.kind == "op" and self.current.text in ("-", "+"):
            op = self.advance().text
            operand = self.unary()
            return negate(operand) if op == "-" else operand
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if not (self.current.kind == "op" and self.current.text == "^"):
            return base
        self.advance()
        token = self.current
        exponent = self.unary()
        if not isinstance(exponent, Const):
            if isinstance(base, Const) and base.value.imag == 0 and base.value.real > 0:
                if base.value == math.e:
                    return Exp(exponent)
                return Exp(Prod((Log(base), exponent)))
            raise self.error("exponent must be a real constant", token)
        if exponent.value.imag != 0:
            raise self.error("exponent must be a real constant", token)
        p = exponent.value.real
        if isinstance(base, Const):
            folded = _fold_power(base, p)
            if folded is not None:
                return folded
        return Pow(base, p)

    def atom(self) -> Expr:
        token = self.current
        if token.kind == "num":
            self.advance()
            return Const(float(token.text))
        if token.kind == "name":
            self.advance()
            if self.current.text == "(" and self.current.kind == "op":
                return self.call(token)
            if self.current.text == "[" and self.current.kind == "op":
                return self.marker(token)
            return self.identifier(token)
        if token.kind == "op" and token.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            self._grouped[id(inner)] = inner
            return inner
        if token.kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {token.text!r}")

    def known_names(self) -> list[str]:
        names = list(CONSTANTS) + [AUXILIARY]
        if self.dim is not None:
            names += [f"x{k}" for k in range(1, self.dim + 1)]
        return names

    def identifier(self, token: Token) -> Expr:
        name = token.text
        if name in CONSTANTS:
            return Const(CONSTANTS[name])
        if name == AUXILIARY:
            return Var(name)
        match = _VARIABLE_RE.fullmatch(name)
        if match is not None:
            if self.dim is None or int(match.group(1)) <= self.dim:
                return Var(name)
            raise UnknownIdentifier(
                f"variable {name} exceeds dimension {self.dim}", self.text, token.pos
            )
        if name in FUNCTIONS or name in EXTRA_FUNCTIONS:
            raise self.error(f"function {name} needs an argument list", token)
        hint = didyoumean(self.known_names() + list(FUNCTIONS) + list(EXTRA_FUNCTIONS), name)
        raise UnknownIdentifier(
            f"unknown identifier {name!r}" + (f". {hint}" if hint else ""), self.text, token.pos
        )

    def arguments(self) -> list[tuple[Token, Expr]]:
        self.expect("(")
        args = [(self.current, self.expr())]
        while self.current.kind == "op" and self.current.text == ",":
            self.advance()
            args.append((self.current, self.expr()))
        self.expect(")")
        return args

    def _real_constant(self, token: Token, expr: Expr, what: str) -> float:
        if not isinstance(expr, Const) or expr.value.imag != 0:
            raise self.error(f"{what} must be a real constant", token)
        return expr.value.real

    def call(self, token: Token) -> Expr:
        name = token.text
        if name not in FUNCTIONS and name not in EXTRA_FUNCTIONS:
            hint = didyoumean(list(FUNCTIONS) + list(EXTRA_FUNCTIONS), name)
            raise UnknownIdentifier(
                f"unknown function {name!r}" + (f". {hint}" if hint else ""),
                self.text,
                token.pos,
            )
        args = self.arguments()
        if name in ("gbump", "gbumpw"):
            fixed = 1 if name == "gbump" else 2
            if len(args) <= fixed:
                raise self.error(f"{name} needs {fixed} constant(s) and a radial argument", token)
            sigma = self._real_constant(args[0][0], args[0][1], "bump order")
            power = self._real_constant(args[1][0], args[1][1], "bump power") if fixed == 2 else 0.0
            try:
                return GBump(sigma, power, tuple(e for _, e in args[fixed:]))
            except ParameterError as exc:
                raise self.error(str(exc), args[0][0]) from None
        if len(args) != 1:
            raise self.error(f"{name} takes exactly one argument", token)
        arg = args[0][1]
        if name == "sqrt":
            if isinstance(arg, Const):
                folded = _fold_power(arg, 0.5)
                if folded is not None:
                    return folded
            return Pow(arg, 0.5)
        node = FUNCTIONS[name](arg)
        if isinstance(arg, Const):
            value = node.fold(arg.value)
            if value is not None:
                return Const(value)
        return node

    def marker(self, token: Token) -> Expr:
        if token.text not in self.markers:
            raise UnknownIdentifier(f"unknown operator {token.text!r}", self.text, token.pos)
        self.expect("[")
        components = []
        while True:
            t = self.current
            if t.kind != "num" or not t.text.isdigit():
                raise self.error("expected a nonnegative integer", t)
            components.append(int(self.advance().text))
            if self.current.text == ",":
                self.advance()
                continue
            break
        self.expect("]")
        alpha = MultiIndex(components)
        if self.dim is not None and len(alpha) != self.dim:
            raise ParseError(
                f"multi-index has {len(alpha)} components, expected {self.dim}",
                self.text,
                token.pos,
            )
        return DerivativeMarker(token.text, alpha)


def parse(text: str, n: int | None = None) -> Expr:
    """Parse ``text`` into an expression over ``x1..xn`` and ``rho``."""
    return Parser(text, dim=n).parse()

"""
Closed-form radial profile expressions.

Grammar (whitespace ignored, columns are 1-based):

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := primary ("^" unary)?
    primary := NUMBER ["j"] | "r" | "j" | "pi" | FUNC "(" expr ")" | "(" expr ")"
    FUNC    := tan | sin | cos | exp | ln | sqrt

Expressions are evaluated in forward mode: every node returns the value and
its radial derivative, so a profile written as text carries an analytic
d/dr for the radial solver.

Example:
    >>> eps = Expression.parse("5*tan(pi/(5*r))")
    >>> eps(0.16), eps.derivative(0.16)
"""

import cmath
import logging
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, NamedTuple, Optional

from .errors import ExpressionError
from .media import RadialProfile

logger = logging.getLogger(__name__)


class Dual(NamedTuple):
    """Value and d/dr"""
    value: complex
    deriv: complex


# ---------------------------------------------------------------------------
# Dual-number arithmetic
# ---------------------------------------------------------------------------

def _add(a: Dual, b: Dual) -> Dual:
    return Dual(a.value + b.value, a.deriv + b.deriv)


def _sub(a: Dual, b: Dual) -> Dual:
    return Dual(a.value - b.value, a.deriv - b.deriv)


def _mul(a: Dual, b: Dual) -> Dual:
    return Dual(a.value * b.value, a.deriv * b.value + a.value * b.deriv)


def _div(a: Dual, b: Dual) -> Dual:
    if b.value == 0:
        raise ZeroDivisionError("division by zero")
    q = a.value / b.value
    return Dual(q, (a.deriv - q * b.deriv) / b.value)


def _neg(a: Dual) -> Dual:
    return Dual(-a.value, -a.deriv)


def _pow(a: Dual, b: Dual) -> Dual:
    if b.deriv == 0:
        if a.value == 0:
            if b.value == 0:
                return Dual(1 + 0j, 0j)
            if b.value == 1:
                return a
            if b.value.real > 1:
                return Dual(0j, 0j)
            raise ZeroDivisionError("zero raised to a power below one")
        v = a.value ** b.value
        return Dual(v, b.value * v / a.value * a.deriv)
    if a.value == 0:
        raise ValueError("zero base with a radius-dependent exponent")
    return _exp(_mul(b, _log(a)))


def _sin(a: Dual) -> Dual:
    return Dual(cmath.sin(a.value), cmath.cos(a.value) * a.deriv)


def _cos(a: Dual) -> Dual:
    return Dual(cmath.cos(a.value), -cmath.sin(a.value) * a.deriv)


def _tan(a: Dual) -> Dual:
    c = cmath.cos(a.value)
    if abs(c) < 1e-300:
        raise ZeroDivisionError("tan at a pole")
    return Dual(cmath.sin(a.value) / c, a.deriv / (c * c))


def _exp(a: Dual) -> Dual:
    v = cmath.exp(a.value)
    return Dual(v, v * a.deriv)


def _log(a: Dual) -> Dual:
    if a.value == 0 or (a.value.imag == 0 and a.value.real < 0):
        raise ValueError(f"ln of nonpositive value {a.value.real:.9g}")
    return Dual(cmath.log(a.value), a.deriv / a.value)


def _sqrt(a: Dual) -> Dual:
    if a.value == 0:
        if a.deriv == 0:
            return Dual(0j, 0j)
        raise ZeroDivisionError("sqrt derivative at zero")
    v = cmath.sqrt(a.value)
    return Dual(v, a.deriv / (2 * v))


FUNCTIONS: Dict[str, Callable[[Dual], Dual]] = {
    "tan": _tan,
    "sin": _sin,
    "cos": _cos,
    "exp": _exp,
    "ln": _log,
    "sqrt": _sqrt,
}
CONSTANTS = {"pi": Dual(complex(cmath.pi), 0j), "j": Dual(1j, 0j)}
BINARY = {"+": _add, "-": _sub, "*": _mul, "/": _div, "^": _pow}


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # number | name | op | end
    text: str
    column: int


_TOKEN = re.compile(
    r"(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?j?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        match = _TOKEN.match(text, pos)
        if match is None:
            raise ExpressionError(f"unexpected character '{text[pos]}'", column=pos + 1)
        kind = match.lastgroup
        tokens.append(Token(kind, match.group(kind), pos + 1))
        pos = match.end()
    tokens.append(Token("end", "", len(text) + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

Node = Callable[[float], Dual]


class _Parser:
    """Recursive descent over the token list, building evaluation closures"""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def fail(self, token: Token, expected: Optional[str] = None) -> ExpressionError:
        found = "end of expression" if token.kind == "end" else f"'{token.text}'"
        message = f"unexpected {found}"
        if expected:
            message += f", expected {expected}"
        return ExpressionError(message, column=token.column)

    def expect(self, text: str) -> Token:
        if self.current.text != text:
            raise self.fail(self.current, f"'{text}'")
        return self.advance()

    def parse(self) -> Node:
        if self.current.kind == "end":
            raise ExpressionError("empty expression", column=1)
        node = self.expr()
        if self.current.kind != "end":
            raise self.fail(self.current, "operator or end of expression")
        return node

    def _binary(self, operators: str, operand: Callable[[], Node]) -> Node:
        node = operand()
        while self.current.kind == "op" and self.current.text in operators:
            op = BINARY[self.advance().text]
            node = _combine(op, node, operand())
        return node

    def expr(self) -> Node:
        return self._binary("+-", self.term)

    def term(self) -> Node:
        return self._binary("*/", self.unary)

    def unary(self) -> Node:
        if self.current.kind == "op" and self.current.text in "+-":
            sign = self.advance().text
            operand = self.unary()
            if sign == "+":
                return operand
            return lambda r: _neg(operand(r))
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self.current.kind == "op" and self.current.text == "^":
            self.advance()
            return _combine(_pow, base, self.unary())
        return base

    def primary(self) -> Node:
        token = self.current
        if token.kind == "number":
            self.advance()
            literal = complex(token.text)
            value = Dual(literal, 0j)
            return lambda r: value
        if token.kind == "name":
            self.advance()
            name = token.text
            if name == "r":
                return lambda r: Dual(complex(r), 1 + 0j)
            if name in CONSTANTS:
                value = CONSTANTS[name]
                return lambda r: value
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                fn = FUNCTIONS[name]
                return lambda r: fn(arg(r))
            raise ExpressionError(
                f"unknown name '{name}' (allowed: r, j, pi, {', '.join(FUNCTIONS)})", column=token.column
            )
        if token.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise self.fail(token, "number, r, function or '('")


def _combine(op: Callable[[Dual, Dual], Dual], left: Node, right: Node) -> Node:
    return lambda r: op(left(r), right(r))


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Expression:
    """A parsed profile expression of the radius r (m)"""
    text: str
    node: Node

    @classmethod
    def parse(cls, text: str) -> "Expression":
        """
        Parse an expression string.

        Raises:
            ExpressionError: with the 1-based column of the offending token
        """
        return cls(text, _Parser(text).parse())

    def dual(self, r: float) -> Dual:
        """
        Value and derivative at r.

        Raises:
            ExpressionError: singular evaluation, reported with r
        """
        try:
            out = self.node(r)
        except (ZeroDivisionError, ValueError, OverflowError) as e:
            raise ExpressionError(f"cannot evaluate '{self.text}': {e}", r=r) from e
        if not (cmath.isfinite(out.value) and cmath.isfinite(out.deriv)):
            raise ExpressionError(f"'{self.text}' is not finite", r=r)
        return out

    def __call__(self, r: float) -> complex:
        return self.dual(r).value

    def derivative(self, r: float) -> complex:
        return self.dual(r).deriv


def expression_eval(text: str, r: float) -> complex:
    """Value of an expression string at radius r (m)"""
    return Expression.parse(text)(r)


def profile_from_expressions(
    eps_perp: str, eps_r: str, mu_perp: str = "1", mu_r: str = "1"
) -> RadialProfile:
    """
    Radial profile from four expression strings, with analytic transverse derivatives.

    Raises:
        ExpressionError: any of the strings fails to parse
    """
    ep, er, mp, mr = (Expression.parse(s) for s in (eps_perp, eps_r, mu_perp, mu_r))
    logger.debug("Profile expressions: eps_perp=%s eps_r=%s mu_perp=%s mu_r=%s", eps_perp, eps_r, mu_perp, mu_r)
    return RadialProfile(
        eps_perp=ep,
        eps_r=er,
        mu_perp=mp,
        mu_r=mr,
        d_eps_perp=ep.derivative,
        d_mu_perp=mp.derivative,
        label=f"{eps_perp} | {eps_r}",
    )

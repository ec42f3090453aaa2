"""
Text -> `Expr`.

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := primary ("^" ["-" | "+"] INTEGER)*
    primary := NUMBER | "i" | "z" INDEX | NAME "(" expr ")" | "(" expr ")"

Power is left-associative and binds tighter than unary minus, so -z1^2 is
-(z1^2).
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

from app.domain.exceptions import (
    ExpressionSyntaxError,
    NonHolomorphicPrimitive,
    NonIntegerExponent,
    UnknownIdentifier,
    VariableOutOfRange,
)
from app.domain.expr import IMAGINARY_UNIT, BinOp, Call, Const, Expr, Neg, Node, Pow, Var, scalar_functions

logger = logging.getLogger(__name__)

NON_HOLOMORPHIC = frozenset({"conj", "conjugate", "re", "im", "Re", "Im", "real", "imag", "abs", "arg"})

_TOKEN = re.compile(
    r"""
    (?P<space>\s+)
    | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
    | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
    | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)
_VARIABLE = re.compile(r"z([0-9]+)")
_PRIMARY_START = frozenset({"NUMBER", "i", "zK", "FUNCTION", "("})


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # number | name | op | end
    text: str
    position: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    position = 0
    while position < len(source):
        match = _TOKEN.match(source, position)
        if match is None:
            raise ExpressionSyntaxError(position, _PRIMARY_START | {"operator"}, source[position])
        kind = match.lastgroup
        assert kind is not None
        if kind != "space":
            tokens.append(Token(kind, match.group(), position))
        position = match.end()
    tokens.append(Token("end", "", position))
    return tokens


class _Parser:
    def __init__(self, source: str, n: int):
        self.tokens = tokenize(source)
        self.n = n
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def at(self, *ops: str) -> bool:
        return self.current.kind == "op" and self.current.text in ops

    def fail(self, expected) -> ExpressionSyntaxError:
        token = self.current
        return ExpressionSyntaxError(token.position, expected, token.text or "end of input")

    def expect(self, op: str) -> Token:
        if not self.at(op):
            raise self.fail({op})
        return self.advance()

    def parse(self) -> Expr:
        root = self.expr()
        if self.current.kind != "end":
            raise self.fail({"+", "-", "*", "/", "^", "end of input"})
        return Expr(root=root, arity=self.n)

    def expr(self) -> Node:
        node = self.term()
        while self.at("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())  # type: ignore[arg-type]
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.at("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.unary())  # type: ignore[arg-type]
        return node

    def unary(self) -> Node:
        if self.at("-"):
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        node = self.primary()
        while self.at("^"):
            self.advance()
            node = Pow(node, self.exponent())
        return node

    def exponent(self) -> int:
        sign = 1
        if self.at("-", "+"):
            sign = -1 if self.advance().text == "-" else 1
        token = self.current
        if token.kind != "number":
            if token.kind == "name" or self.at("("):
                raise NonIntegerExponent(f"exponent at position {token.position} must be an integer literal")
            raise self.fail({"INTEGER"})
        if not token.text.isdigit():
            raise NonIntegerExponent(f"exponent {token.text!r} at position {token.position} is not an integer")
        self.advance()
        return sign * int(token.text)

    def primary(self) -> Node:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Const(complex(float(token.text)))
        if self.at("("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if token.kind == "name":
            return self.identifier()
        raise self.fail(_PRIMARY_START)

    def identifier(self) -> Node:
        token = self.advance()
        name = token.text
        if name == "i":
            return IMAGINARY_UNIT
        if variable := _VARIABLE.fullmatch(name):
            k = int(variable.group(1))
            if not 1 <= k <= self.n:
                raise VariableOutOfRange(f"{name} at position {token.position} is outside z1..z{self.n}")
            return Var(k)
        if name in NON_HOLOMORPHIC:
            raise NonHolomorphicPrimitive(
                f"{name} at position {token.position} is not holomorphic; allowed functions: "
                + ", ".join(scalar_functions)
            )
        if name not in scalar_functions:
            raise UnknownIdentifier(f"unknown identifier {name!r} at position {token.position}")
        self.expect("(")
        arg = self.expr()
        self.expect(")")
        return Call(name, arg)


def parse(source: str, n: int) -> Expr:
    if n < 1:
        raise ValueError("arity must be at least 1")
    return _Parser(source, n).parse()


def parse_file(path: str | Path, n: int) -> Expr:
    text = Path(path).read_text(encoding="utf-8")
    logger.debug("read expression from %s", path)
    return parse(text, n)

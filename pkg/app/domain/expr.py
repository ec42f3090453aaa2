"""
Expression tree of a holomorphic function F(z1, ..., zn).

Only holomorphic node kinds exist, so anything that builds an `Expr` out of
these nodes describes a holomorphic function on the domain of its primitives.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Literal, Sequence, Union

from app.domain.exceptions import DomainError

BinaryOperator = Literal["+", "-", "*", "/"]


@dataclass(frozen=True, slots=True)
class Const:
    value: complex


@dataclass(frozen=True, slots=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True, slots=True)
class Neg:
    operand: Node


@dataclass(frozen=True, slots=True)
class BinOp:
    op: BinaryOperator
    left: Node
    right: Node


@dataclass(frozen=True, slots=True)
class Pow:
    base: Node
    exponent: int


@dataclass(frozen=True, slots=True)
class Call:
    func: str
    arg: Node


Node = Union[Const, Var, Neg, BinOp, Pow, Call]

IMAGINARY_UNIT = Const(1j)


def _branch_point(t: complex) -> bool:
    return t == 0


# Principal branches for log and sqrt.
scalar_functions: MappingProxyType[str, tuple[Callable[[complex], complex], Callable[[complex], bool] | None]] = (
    MappingProxyType(
        {
            "exp": (cmath.exp, None),
            "log": (cmath.log, _branch_point),
            "sin": (cmath.sin, None),
            "cos": (cmath.cos, None),
            "sinh": (cmath.sinh, None),
            "cosh": (cmath.cosh, None),
            "sqrt": (cmath.sqrt, _branch_point),
        }
    )
)


@dataclass(frozen=True, slots=True)
class Expr:
    root: Node
    arity: int

    def __str__(self) -> str:
        return to_text(self.root)

    def variables(self) -> set[int]:
        return _collect_variables(self.root)


def _collect_variables(node: Node) -> set[int]:
    match node:
        case Var(index=k):
            return {k}
        case Const():
            return set()
        case Neg(operand=a) | Pow(base=a) | Call(arg=a):
            return _collect_variables(a)
        case BinOp(left=a, right=b):
            return _collect_variables(a) | _collect_variables(b)
    raise TypeError(f"unknown node {node!r}")


def eval_complex(e: Expr, point: Sequence[complex]) -> complex:
    """
    Value of F at `point` by direct recursion over the tree.
    """
    z = tuple(complex(c) for c in point)
    if len(z) != e.arity:
        raise ValueError(f"expected a point with {e.arity} coordinates, got {len(z)}")
    return _eval(e.root, z)


def _eval(node: Node, z: tuple[complex, ...]) -> complex:
    try:
        value = _eval_node(node, z)
    except OverflowError:
        raise DomainError("value overflows", subexpression=to_text(node), point=z)
    if not cmath.isfinite(value):
        raise DomainError("value overflows", subexpression=to_text(node), point=z)
    return value


def _eval_node(node: Node, z: tuple[complex, ...]) -> complex:
    match node:
        case Const(value=c):
            return complex(c)
        case Var(index=k):
            return z[k - 1]
        case Neg(operand=a):
            return -_eval(a, z)
        case BinOp(op="+", left=a, right=b):
            return _eval(a, z) + _eval(b, z)
        case BinOp(op="-", left=a, right=b):
            return _eval(a, z) - _eval(b, z)
        case BinOp(op="*", left=a, right=b):
            return _eval(a, z) * _eval(b, z)
        case BinOp(op="/", left=a, right=b):
            denominator = _eval(b, z)
            if denominator == 0:
                raise DomainError("division by zero", subexpression=to_text(node), point=z)
            return _eval(a, z) / denominator
        case Pow(base=a, exponent=k):
            base = _eval(a, z)
            if base == 0 and k < 0:
                raise DomainError("negative power of zero", subexpression=to_text(node), point=z)
            return base**k
        case Call(func=name, arg=a):
            fn, singular = scalar_functions[name]
            t = _eval(a, z)
            if singular is not None and singular(t):
                raise DomainError(f"{name} evaluated at its branch point", subexpression=to_text(node), point=z)
            return fn(t)
    raise TypeError(f"unknown node {node!r}")


# Pretty printing. Binding strength of each node kind, weakest first.
_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5


def _strength(node: Node) -> int:
    match node:
        case BinOp(op="+" | "-"):
            return _ADD
        case BinOp():
            return _MUL
        case Neg():
            return _NEG
        case Pow():
            return _POW
        case Const(value=c) if not _is_plain_literal(c):
            return _ADD
    return _ATOM


def _is_plain_literal(c: complex) -> bool:
    return c == 1j or (c.imag == 0 and c.real >= 0)


def _wrap(node: Node, minimum: int) -> str:
    text = to_text(node)
    return text if _strength(node) >= minimum else f"({text})"


def to_text(node: Node | Expr) -> str:
    """
    Text that reparses to a structurally identical tree for every tree the parser produces.
    """
    if isinstance(node, Expr):
        node = node.root
    match node:
        case Const(value=c):
            c = complex(c)
            if c == 1j:
                return "i"
            if c.imag == 0:
                return repr(c.real)
            return f"{c.real!r} + {c.imag!r}*i"
        case Var(index=k):
            return f"z{k}"
        case Neg(operand=a):
            return "-" + _wrap(a, _NEG)
        case BinOp(op=op, left=a, right=b):
            level = _ADD if op in "+-" else _MUL
            return f"{_wrap(a, level)} {op} {_wrap(b, level + 1)}"
        case Pow(base=a, exponent=k):
            return f"{_wrap(a, _POW)}^{k}"
        case Call(func=name, arg=a):
            return f"{name}({to_text(a)})"
    raise TypeError(f"unknown node {node!r}")

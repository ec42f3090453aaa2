"""
Registry of the holomorphic unary primitives and their derivative chains.

A chain maps the inner value t to (f(t), f'(t), f''(t), f'''(t)); the jet
composition rule only ever needs these four numbers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

Chain = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]


@dataclass(frozen=True, slots=True)
class Primitive:
    name: str
    chain: Chain
    singular: Callable[[np.ndarray], np.ndarray] | None = None


primitive_registry: dict[str, Primitive] = {}


def register_primitive(name: str, *, singular: Callable[[np.ndarray], np.ndarray] | None = None):
    def wrapper(chain: Chain) -> Chain:
        primitive_registry[name] = Primitive(name=name, chain=chain, singular=singular)
        return chain

    return wrapper


def get_primitive(name: str) -> Primitive:
    if name not in primitive_registry:
        raise KeyError(f"no primitive named {name!r}")
    return primitive_registry[name]


def _at_zero(t: np.ndarray) -> np.ndarray:
    return t == 0


@register_primitive("exp")
def _exp(t):
    e = np.exp(t)
    return e, e, e, e


@register_primitive("log", singular=_at_zero)
def _log(t):
    r = 1 / t
    return np.log(t), r, -(r**2), 2 * r**3


@register_primitive("sin")
def _sin(t):
    s, c = np.sin(t), np.cos(t)
    return s, c, -s, -c


@register_primitive("cos")
def _cos(t):
    s, c = np.sin(t), np.cos(t)
    return c, -s, -c, s


@register_primitive("sinh")
def _sinh(t):
    s, c = np.sinh(t), np.cosh(t)
    return s, c, s, c


@register_primitive("cosh")
def _cosh(t):
    s, c = np.sinh(t), np.cosh(t)
    return c, s, c, s


@register_primitive("sqrt", singular=_at_zero)
def _sqrt(t):
    s = np.sqrt(t)
    return s, 1 / (2 * s), -1 / (4 * s**3), 3 / (8 * s**5)


def power_chain(t: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Derivative chain of t -> t**k for an integer k.
    Terms whose falling-factorial coefficient vanishes are exactly zero, so
    t = 0 is fine for k >= 0.
    """
    out = []
    coefficient = 1
    for order in range(4):
        if coefficient == 0:
            out.append(np.zeros_like(t))
        else:
            out.append(coefficient * t ** (k - order))
        coefficient *= k - order
    return out[0], out[1], out[2], out[3]

from __future__ import annotations

import numpy as np
from faker import Faker

from app.domain.expr import IMAGINARY_UNIT, BinOp, Call, Const, Expr, Neg, Node, Pow, Var

geo_faker = Faker()
geo_faker.seed_instance(3)

ENTIRE_FUNCTIONS = ("exp", "sin", "cos", "sinh", "cosh")
BRANCHED_FUNCTIONS = ("log", "sqrt")


def fake_point(n: int, radius: float = 0.5, faker: Faker = geo_faker) -> np.ndarray:
    return np.array(
        [complex(faker.random.uniform(-radius, radius), faker.random.uniform(-radius, radius)) for _ in range(n)]
    )


def _shifted_var(n: int, faker: Faker) -> Node:
    """z_k + 2, away from every pole and branch cut while Re z_k > -2."""
    return BinOp("+", Var(faker.random.randint(1, n)), Const(complex(2)))


def _leaf(n: int, faker: Faker) -> Node:
    match faker.random.randrange(5):
        case 0:
            return Var(faker.random.randint(1, n))
        case 1:
            return Const(complex(round(faker.random.uniform(0.1, 2.0), 3)))
        case 2:
            return BinOp("/", Const(complex(1)), _shifted_var(n, faker))
        case 3:
            return Call(faker.random.choice(BRANCHED_FUNCTIONS), _shifted_var(n, faker))
    return IMAGINARY_UNIT


def fake_node(n: int, depth: int, faker: Faker = geo_faker) -> Node:
    """
    Random tree of the shape the parser produces: nonnegative real constants,
    nonnegative exponents, entire functions, and quotients, logs and roots of
    z_k + 2 at the leaves, so it is defined wherever every Re z_k > -2.
    """
    if depth == 0 or faker.random.random() < 0.2:
        return _leaf(n, faker)
    kind = faker.random.choice(["+", "-", "*", "neg", "pow", "call"])
    match kind:
        case "neg":
            return Neg(fake_node(n, depth - 1, faker))
        case "pow":
            return Pow(fake_node(n, depth - 1, faker), faker.random.randint(0, 3))
        case "call":
            return Call(faker.random.choice(ENTIRE_FUNCTIONS), fake_node(n, depth - 1, faker))
    return BinOp(kind, fake_node(n, depth - 1, faker), fake_node(n, depth - 1, faker))


def fake_expr(n: int, depth: int = 3, faker: Faker = geo_faker) -> Expr:
    return Expr(root=fake_node(n, depth, faker), arity=n)

"""
Forward-mode complex differentiation through order three.

A `CJet` carries F, its gradient, Hessian and third-derivative tensor at one
point, or at a batch of points when the arrays have leading batch axes.
Propagation follows the sum, product and chain rules truncated at order three.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from app.domain.exceptions import DomainError
from app.domain.expr import BinOp, Call, Const, Expr, Neg, Node, Pow, Var, eval_complex, to_text
from app.domain.primitives import get_primitive, power_chain


@dataclass(frozen=True, eq=False)
class CJet:
    val: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    third: np.ndarray

    def __post_init__(self):
        for name in ("val", "grad", "hess", "third"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex))

    @property
    def n(self) -> int:
        return self.grad.shape[-1]

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.val.shape

    def at(self, index) -> CJet:
        """Single-point jet out of a batch."""
        return CJet(val=self.val[index], grad=self.grad[index], hess=self.hess[index], third=self.third[index])

    def finite(self) -> np.ndarray:
        """Batch-shaped mask of the points where every entry is finite."""
        batch = self.batch_shape
        ok = np.isfinite(self.val)
        for part in (self.grad, self.hess, self.third):
            ok &= np.all(np.isfinite(part.reshape(batch + (-1,))), axis=-1)
        return ok

    def scale(self) -> float:
        return float(max(np.max(np.abs(part)) for part in (self.val, self.grad, self.hess, self.third)))

    @classmethod
    def constant(cls, c: complex, n: int, batch_shape: tuple[int, ...] = ()) -> CJet:
        return cls(
            val=np.full(batch_shape, c, dtype=complex),
            grad=np.zeros(batch_shape + (n,), dtype=complex),
            hess=np.zeros(batch_shape + (n, n), dtype=complex),
            third=np.zeros(batch_shape + (n, n, n), dtype=complex),
        )

    @classmethod
    def variable(cls, values: np.ndarray, k: int, n: int) -> CJet:
        """Jet of the coordinate function z_k (1-based) evaluated at `values`."""
        batch_shape = values.shape
        grad = np.zeros(batch_shape + (n,), dtype=complex)
        grad[..., k - 1] = 1
        return cls(
            val=values.astype(complex),
            grad=grad,
            hess=np.zeros(batch_shape + (n, n), dtype=complex),
            third=np.zeros(batch_shape + (n, n, n), dtype=complex),
        )


# Jet arithmetic
def _sym3(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """h_ab g_c + h_ac g_b + h_bc g_a."""
    return (
        np.einsum("...ab,...c->...abc", h, g)
        + np.einsum("...ac,...b->...abc", h, g)
        + np.einsum("...bc,...a->...abc", h, g)
    )


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("...a,...b->...ab", a, b)


def _add(a: CJet, b: CJet) -> CJet:
    return CJet(a.val + b.val, a.grad + b.grad, a.hess + b.hess, a.third + b.third)


def _sub(a: CJet, b: CJet) -> CJet:
    return CJet(a.val - b.val, a.grad - b.grad, a.hess - b.hess, a.third - b.third)


def _neg(a: CJet) -> CJet:
    return CJet(-a.val, -a.grad, -a.hess, -a.third)


def _mul(a: CJet, b: CJet) -> CJet:
    fa, fb = a.val[..., None], b.val[..., None]
    fa2, fb2 = fa[..., None], fb[..., None]
    fa3, fb3 = fa2[..., None], fb2[..., None]
    return CJet(
        val=a.val * b.val,
        grad=fa * b.grad + fb * a.grad,
        hess=fa2 * b.hess + fb2 * a.hess + _outer(a.grad, b.grad) + _outer(b.grad, a.grad),
        third=fa3 * b.third + fb3 * a.third + _sym3(a.hess, b.grad) + _sym3(b.hess, a.grad),
    )


def _compose(a: CJet, d0: np.ndarray, d1: np.ndarray, d2: np.ndarray, d3: np.ndarray) -> CJet:
    """Jet of phi(a) given phi and its first three derivatives at a.val."""
    d0, d1, d2, d3 = (np.asarray(d, dtype=complex) for d in (d0, d1, d2, d3))
    g, h = a.grad, a.hess
    return CJet(
        val=d0,
        grad=d1[..., None] * g,
        hess=d2[..., None, None] * _outer(g, g) + d1[..., None, None] * h,
        third=d3[..., None, None, None] * np.einsum("...a,...b,...c->...abc", g, g, g)
        + d2[..., None, None, None] * _sym3(h, g)
        + d1[..., None, None, None] * a.third,
    )


def _reciprocal(a: CJet) -> CJet:
    r = 1 / a.val
    return _compose(a, r, -(r**2), 2 * r**3, -6 * r**4)


@lru_cache(maxsize=16)
def _canonical_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Flat indices mapping every entry of an n x n (n x n x n) tensor to its
    sorted-index representative.
    """
    pairs = np.array([np.ravel_multi_index(tuple(sorted(ix)), (n, n)) for ix in itertools.product(range(n), repeat=2)])
    triples = np.array(
        [np.ravel_multi_index(tuple(sorted(ix)), (n, n, n)) for ix in itertools.product(range(n), repeat=3)]
    )
    return pairs, triples


def _canonicalize(jet: CJet) -> CJet:
    n = jet.n
    pairs, triples = _canonical_indices(n)
    batch = jet.batch_shape
    hess = jet.hess.reshape(batch + (n * n,))[..., pairs].reshape(batch + (n, n))
    third = jet.third.reshape(batch + (n**3,))[..., triples].reshape(batch + (n, n, n))
    return CJet(val=jet.val, grad=jet.grad, hess=hess, third=third)


def _as_points(e: Expr, point) -> np.ndarray:
    z = np.asarray(point, dtype=complex)
    if z.ndim == 0 or z.shape[-1] != e.arity:
        raise ValueError(f"expected points with {e.arity} coordinates, got shape {z.shape}")
    return z


def _domain_failure(mask: np.ndarray, z: np.ndarray, node: Node, reason: str) -> DomainError:
    first = np.argwhere(np.atleast_1d(mask))[0]
    where = z if z.ndim == 1 else z[tuple(first)]
    return DomainError(reason, subexpression=to_text(node), point=tuple(complex(c) for c in where))


def jet_eval(e: Expr, point) -> CJet:
    """
    Derivatives of F through order three at `point`, shape (n,), or at a batch
    of points, shape (..., n).
    """
    z = _as_points(e, point)
    with np.errstate(over="ignore", invalid="ignore"):
        jet = _jet(e.root, z, e.arity)
    return _canonicalize(jet)


def _jet(node: Node, z: np.ndarray, n: int) -> CJet:
    jet = _node_jet(node, z, n)
    finite = jet.finite()
    if not np.all(finite):
        raise _domain_failure(~finite, z, node, "value overflows")
    return jet


def _node_jet(node: Node, z: np.ndarray, n: int) -> CJet:
    batch_shape = z.shape[:-1]
    match node:
        case Const(value=c):
            return CJet.constant(c, n, batch_shape)
        case Var(index=k):
            return CJet.variable(z[..., k - 1], k, n)
        case Neg(operand=a):
            return _neg(_jet(a, z, n))
        case BinOp(op="+", left=a, right=b):
            return _add(_jet(a, z, n), _jet(b, z, n))
        case BinOp(op="-", left=a, right=b):
            return _sub(_jet(a, z, n), _jet(b, z, n))
        case BinOp(op="*", left=a, right=b):
            return _mul(_jet(a, z, n), _jet(b, z, n))
        case BinOp(op="/", left=a, right=b):
            numerator, denominator = _jet(a, z, n), _jet(b, z, n)
            if np.any(denominator.val == 0):
                raise _domain_failure(denominator.val == 0, z, node, "division by zero")
            return _mul(numerator, _reciprocal(denominator))
        case Pow(base=a, exponent=k):
            base = _jet(a, z, n)
            if k < 0 and np.any(base.val == 0):
                raise _domain_failure(base.val == 0, z, node, "negative power of zero")
            return _compose(base, *power_chain(base.val, k))
        case Call(func=name, arg=a):
            inner = _jet(a, z, n)
            primitive = get_primitive(name)
            if primitive.singular is not None and np.any(primitive.singular(inner.val)):
                raise _domain_failure(primitive.singular(inner.val), z, node, f"{name} evaluated at its branch point")
            return _compose(inner, *primitive.chain(inner.val))
    raise TypeError(f"unknown node {node!r}")


def fd_oracle(e: Expr, point, h: float) -> CJet:
    """
    Central finite differences of F along the real coordinate directions.

    For holomorphic F the derivative along e_k equals dF/dz_k, so plain
    real-direction stencils recover the complex derivatives with O(h^2) error.
    Stencils reach 2h from the point.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    z0 = np.asarray(point, dtype=complex)
    n = e.arity
    if z0.shape != (n,):
        raise ValueError(f"expected a point with {n} coordinates, got shape {z0.shape}")
    cache: dict[tuple[int, ...], complex] = {}

    def value(steps: dict[int, int]) -> complex:
        # steps maps a coordinate to a multiple of h
        offset = tuple(steps.get(k, 0) for k in range(n))
        if offset not in cache:
            cache[offset] = eval_complex(e, z0 + h * np.asarray(offset, dtype=float))
        return cache[offset]

    val = value({})
    grad = np.zeros(n, dtype=complex)
    hess = np.zeros((n, n), dtype=complex)
    third = np.zeros((n, n, n), dtype=complex)
    for a in range(n):
        grad[a] = (value({a: 1}) - value({a: -1})) / (2 * h)
    for a, b in itertools.combinations_with_replacement(range(n), 2):
        if a == b:
            hess[a, a] = (value({a: 1}) - 2 * val + value({a: -1})) / h**2
        else:
            hess[a, b] = hess[b, a] = (
                value({a: 1, b: 1}) - value({a: 1, b: -1}) - value({a: -1, b: 1}) + value({a: -1, b: -1})
            ) / (4 * h**2)
    for a, b, c in itertools.combinations_with_replacement(range(n), 3):
        if a == b == c:
            d = (value({a: 2}) - 2 * value({a: 1}) + 2 * value({a: -1}) - value({a: -2})) / (2 * h**3)
        elif a == b or b == c:
            # two equal indices: second difference along `twice`, first difference along `once`
            twice, once = (a, c) if a == b else (b, a)

            def second(s: int) -> complex:
                return (value({twice: 1, once: s}) - 2 * value({once: s}) + value({twice: -1, once: s})) / h**2

            d = (second(1) - second(-1)) / (2 * h)
        else:
            d = sum(
                sa * sb * sc * value({a: sa, b: sb, c: sc}) for sa, sb, sc in itertools.product((1, -1), repeat=3)
            ) / (8 * h**3)
        for ix in set(itertools.permutations((a, b, c))):
            third[ix] = d
    return CJet(val=np.asarray(val), grad=grad, hess=hess, third=third)

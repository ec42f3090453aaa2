"""
Central-difference stencils over integer step offsets.

`fun` receives an offset tuple (multiples of h per coordinate) so callers can
memoize expensive evaluations such as Newton-resolved chart points.
With `extrapolate=True` the h and 2h stencils are combined so the O(h^2)
error term cancels; the 2h stencil reuses the even offsets of the same `fun`.
"""
import itertools
from typing import Callable

import numpy as np

Offset = tuple[int, ...]
Stencil = Callable[[Offset], np.ndarray]


def _offset(dim: int, steps: dict[int, int]) -> Offset:
    return tuple(steps.get(k, 0) for k in range(dim))


def _dilated(fun: Stencil, factor: int) -> Stencil:
    return lambda offset: fun(tuple(factor * k for k in offset))


def richardson(fine: np.ndarray, coarse: np.ndarray) -> np.ndarray:
    """Combine O(h^2) estimates at h and 2h into an O(h^4) one."""
    return (4 * fine - coarse) / 3


def central_gradient(fun: Stencil, dim: int, h: float, *, extrapolate: bool = False) -> np.ndarray:
    """Shape (dim,) + output shape."""
    fine = np.stack(
        [(np.asarray(fun(_offset(dim, {a: 1}))) - np.asarray(fun(_offset(dim, {a: -1})))) / (2 * h) for a in range(dim)]
    )
    if not extrapolate:
        return fine
    return richardson(fine, central_gradient(_dilated(fun, 2), dim, 2 * h))


def central_hessian(fun: Stencil, dim: int, h: float, *, extrapolate: bool = False) -> np.ndarray:
    """Shape (dim, dim) + output shape; symmetric in the first two axes."""
    center = np.asarray(fun(_offset(dim, {})))
    out = np.zeros((dim, dim) + center.shape, dtype=center.dtype)
    for a, b in itertools.combinations_with_replacement(range(dim), 2):
        if a == b:
            plus, minus = np.asarray(fun(_offset(dim, {a: 1}))), np.asarray(fun(_offset(dim, {a: -1})))
            out[a, a] = (plus - 2 * center + minus) / h**2
        else:
            out[a, b] = out[b, a] = (
                np.asarray(fun(_offset(dim, {a: 1, b: 1})))
                - np.asarray(fun(_offset(dim, {a: 1, b: -1})))
                - np.asarray(fun(_offset(dim, {a: -1, b: 1})))
                + np.asarray(fun(_offset(dim, {a: -1, b: -1})))
            ) / (4 * h**2)
    if not extrapolate:
        return out
    return richardson(out, central_hessian(_dilated(fun, 2), dim, 2 * h))

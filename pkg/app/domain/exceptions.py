from __future__ import annotations

from typing import Iterable


class HypersphereError(Exception):
    ...


class WrongArgumentsForCommand(HypersphereError):
    ...


class UsageError(HypersphereError):
    ...


# Expression
class ExpressionError(HypersphereError):
    ...


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, position: int, expected: Iterable[str], found: str = ""):
        self.position = position
        self.expected = frozenset(expected)
        self.found = found
        expected_txt = ", ".join(sorted(self.expected)) or "end of input"
        found_txt = f" but found {found!r}" if found else ""
        super().__init__(f"syntax error at position {position}: expected one of {{{expected_txt}}}{found_txt}")


class UnknownIdentifier(ExpressionError):
    ...


class NonHolomorphicPrimitive(UnknownIdentifier):
    ...


class VariableOutOfRange(ExpressionError):
    ...


class NonIntegerExponent(ExpressionError):
    ...


class DomainError(HypersphereError):
    def __init__(self, message: str, *, subexpression: str | None = None, point=None):
        self.subexpression = subexpression
        self.point = point
        detail = message
        if subexpression is not None:
            detail += f" in `{subexpression}`"
        if point is not None:
            detail += f" at z={point}"
        super().__init__(detail)


# Geometry
class GeometryError(HypersphereError):
    ...


class DegenerateMetric(GeometryError):
    ...


class AsymmetryError(GeometryError):
    ...


class NewtonDivergence(GeometryError):
    ...


# Verification
class VerificationError(HypersphereError):
    ...


class AllPointsDegenerate(VerificationError):
    ...


# Export
class ExportError(HypersphereError):
    ...


class ArityError(ExportError):
    ...


class ExportIOError(ExportError):
    ...

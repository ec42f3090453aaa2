from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .base import Message, register_command


class OutputFormat(str, Enum):
    JSON = "json"
    TEXT = "text"


class ExpressionCommand(Message):
    """
    Shared checks for commands carrying an expression, given inline or as a
    UTF-8 file path (exactly one of the two), and its arity.
    """

    n: int
    expression: str | None
    expression_file: str | None

    def __post_init__(self):
        Message.__post_init__(self)
        if self.n < 1:
            raise ValueError("arity must be at least 1")
        if (self.expression is None) == (self.expression_file is None):
            raise ValueError("give the expression inline or as a file, not both or neither")


class WindowCommand(ExpressionCommand):
    """`bounds` lists re_lo re_hi im_lo im_hi for z1, then for z2 and so on."""

    bounds: tuple[float, ...]
    grid: tuple[int, ...]

    def __post_init__(self):
        ExpressionCommand.__post_init__(self)
        if len(self.bounds) != 4 * self.n:
            raise ValueError(f"window needs {4 * self.n} bounds for {self.n} variables")

    @property
    def lo(self) -> tuple[float, ...]:
        re = tuple(self.bounds[4 * k] for k in range(self.n))
        im = tuple(self.bounds[4 * k + 2] for k in range(self.n))
        return re + im

    @property
    def hi(self) -> tuple[float, ...]:
        re = tuple(self.bounds[4 * k + 1] for k in range(self.n))
        im = tuple(self.bounds[4 * k + 3] for k in range(self.n))
        return re + im


@register_command
@dataclass(eq=False, slots=True)
class EvalPoint(ExpressionCommand):
    n: int
    at: tuple[float, ...]  # re1 im1 re2 im2 ...
    expression: str | None = None
    expression_file: str | None = None
    metric: bool = False
    output_format: OutputFormat = OutputFormat.JSON
    # Meta
    signature: str = field(init=False)

    def __post_init__(self):
        ExpressionCommand.__post_init__(self)
        if len(self.at) != 2 * self.n:
            raise ValueError(f"point needs {2 * self.n} coordinates for {self.n} variables")

    @property
    def z(self) -> tuple[complex, ...]:
        return tuple(complex(self.at[2 * k], self.at[2 * k + 1]) for k in range(self.n))


@register_command
@dataclass(eq=False, slots=True)
class CheckSuite(WindowCommand):
    n: int
    bounds: tuple[float, ...]
    expression: str | None = None
    expression_file: str | None = None
    grid: tuple[int, ...] = (11,)
    strategy: str = "grid"
    samples: int = 121
    seed: int = 0
    tol: float | None = None
    oracle_tol: float | None = None
    step: float | None = None
    oracle_points: int | None = None
    jet_oracle: bool = False
    threads: int | None = None
    output: str | None = None
    output_format: OutputFormat = OutputFormat.JSON
    # Meta
    signature: str = field(init=False)


@register_command
@dataclass(eq=False, slots=True)
class ExportMesh(WindowCommand):
    n: int
    bounds: tuple[float, ...]
    output: str
    expression: str | None = None
    expression_file: str | None = None
    grid: tuple[int, ...] = (64,)
    # Meta
    signature: str = field(init=False)


@register_command
@dataclass(eq=False, slots=True)
class ExportCsv(WindowCommand):
    n: int
    bounds: tuple[float, ...]
    output: str
    expression: str | None = None
    expression_file: str | None = None
    grid: tuple[int, ...] = (11,)
    strategy: str = "grid"
    samples: int = 121
    seed: int = 0
    # Meta
    signature: str = field(init=False)


class CommandType(str, Enum):
    EVAL_POINT = EvalPoint.__name__
    CHECK_SUITE = CheckSuite.__name__
    EXPORT_MESH = ExportMesh.__name__
    EXPORT_CSV = ExportCsv.__name__

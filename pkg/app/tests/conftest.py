from __future__ import annotations

from dataclasses import dataclass

import pytest

from app.adapters.expr_parser import parse
from app.domain.expr import Expr
from app.domain.verify import ChartWindow, Strategy


@dataclass(frozen=True)
class CorpusCase:
    name: str
    source: str
    n: int
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    grid: tuple[int, ...] = (11,)
    strategy: Strategy = Strategy.GRID
    samples: int = 121

    @property
    def expr(self) -> Expr:
        return parse(self.source, self.n)

    @property
    def window(self) -> ChartWindow:
        return ChartWindow(
            n=self.n, lo=self.lo, hi=self.hi, grid=self.grid, strategy=self.strategy, samples=self.samples
        )


# Nondegenerate on their windows; together they cover n = 1, 2, 3, exp, log and
# quotients, non-commuting Re tau / Im tau and an indefinite Im tau.
CORPUS = (
    CorpusCase("paraboloid", "i*z1^2/2", 1, (-1, -1), (1, 1)),
    CorpusCase("cubic", "z1^3/6", 1, (-1, 0.2), (1, 1)),
    CorpusCase("exponential", "i*z1^2 + exp(z1)", 1, (-1, -1), (0.5, 1)),
    CorpusCase("quotient", "i*z1^2/2 + 1/(z1 + 3)", 1, (-1, -1), (1, 1)),
    CorpusCase("coupled", "i*(z1^2 + z2^2)/2 + z1*z2", 2, (-1,) * 4, (1,) * 4, grid=(4,)),
    CorpusCase(
        "noncommuting", "i*z1^2/2 + i*z2^2 + z1*z2 + z1^3/10", 2, (-0.5,) * 4, (0.5,) * 4, grid=(4,)
    ),
    CorpusCase("indefinite", "i*z1*z2 + log(z1 + 2)", 2, (-0.5,) * 4, (0.5,) * 4, grid=(4,)),
    CorpusCase(
        "triple",
        "i*(z1^2 + z2^2 + z3^2)/2 + z1*z2*z3/4",
        3,
        (-0.5,) * 6,
        (0.5,) * 6,
        strategy=Strategy.QUASI,
        samples=100,
    ),
)


@pytest.fixture(params=CORPUS, ids=[case.name for case in CORPUS])
def corpus_case(request) -> CorpusCase:
    return request.param


@pytest.fixture
def paraboloid() -> Expr:
    return parse("i*z1^2/2", 1)


@pytest.fixture
def cubic() -> Expr:
    return parse("z1^3/6", 1)

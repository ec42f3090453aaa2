"""
Sampling over a chart window and the certification suite.

Every sample passes the nondegeneracy gate and then the algebraic identity
checks; an evenly spaced subsample of the points clear of the degenerate locus
additionally runs the Newton-based finite-difference oracles. A stencil that
cannot be resolved leaves its point out of the oracle checks and is listed in
the report. Per-point results are keyed by sample index, so the report does
not depend on the thread count.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.stats import qmc

from app.config import GEOMETRY_SETTINGS, VERIFICATION_SETTINGS, GeometrySettings, VerificationSettings
from app.domain import skgeom
from app.domain.cjet import fd_oracle, jet_eval
from app.domain.exceptions import AllPointsDegenerate, DomainError, NewtonDivergence
from app.domain.expr import Expr
from app.domain.skgeom import PointData
from app.utils import linalg

logger = logging.getLogger(__name__)


class Strategy(str, Enum):
    GRID = "grid"
    QUASI = "quasi"


class ChartWindow(BaseModel):
    """
    Box in (Re z1..Re zn, Im z1..Im zn). `grid` holds one count for every axis
    or one count per axis; an axis with a single sample sits at its midpoint.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    grid: tuple[int, ...] = (11,)
    strategy: Strategy = Strategy.GRID
    samples: int = Field(default=121, ge=1)
    seed: int = VERIFICATION_SETTINGS.QUASI_RANDOM_SEED

    @model_validator(mode="after")
    def _check_bounds(self) -> ChartWindow:
        dim = 2 * self.n
        if len(self.lo) != dim or len(self.hi) != dim:
            raise ValueError(f"window needs {dim} lower and {dim} upper bounds")
        if not all(math.isfinite(b) for b in self.lo + self.hi):
            raise ValueError("window bounds must be finite")
        if any(lo >= hi for lo, hi in zip(self.lo, self.hi)):
            raise ValueError("window needs lo < hi on every axis")
        if len(self.grid) not in (1, dim):
            raise ValueError(f"grid takes 1 or {dim} counts")
        if any(c < 1 for c in self.grid):
            raise ValueError("grid counts must be positive")
        return self

    @property
    def counts(self) -> tuple[int, ...]:
        return self.grid * (2 * self.n) if len(self.grid) == 1 else self.grid

    @property
    def n_samples(self) -> int:
        return math.prod(self.counts) if self.strategy is Strategy.GRID else self.samples


class Tolerances(BaseModel):
    model_config = ConfigDict(frozen=True)

    algebraic: float = Field(default=VERIFICATION_SETTINGS.ALGEBRAIC_TOLERANCE, ge=0)
    oracle: float = Field(default=VERIFICATION_SETTINGS.ORACLE_TOLERANCE, ge=0)


class CheckSummary(BaseModel):
    max_residual: float
    mean_residual: float
    worst_point: list[list[float]]  # [re, im] per coordinate
    tolerance: float
    n_evaluated: int
    passed: bool


class VerificationReport(BaseModel):
    expr_text: str
    window: ChartWindow
    n_points: int
    n_degenerate: int
    n_near_locus: int  # nondegenerate, but too close to the locus for the oracle stencils
    oracle_unresolved: list[list[list[float]]]  # oracle points whose stencil had no chart preimage
    checks: dict[str, CheckSummary]
    tolerances: Tolerances
    conventions: dict[str, str]
    settings: dict[str, float | int | bool]
    passed: bool = Field(serialization_alias="pass")


ALGEBRAIC_CHECKS = (
    "metric_equality",
    "lemma_identities",
    "inverse_consistency",
    "kahler_form",
    "monge_ampere",
    "j_compatibility",
    "nabla_j_symmetry",
    "signature_evenness",
)
ORACLE_CHECKS = ("gauss_weingarten", "hessian_oracle", "gradient_oracle")
JET_ORACLE_CHECK = "jet_oracle"

CONVENTIONS = {
    "omega": skgeom.OMEGA_CONVENTION,
    "frames": "chart (x, u) with z = x + i u; affine (x, y) with y = Re F_z",
    "orientation": "|det g_xy| is compared with 4^n; signature is reported separately",
    "normalization": "metric identities and oracles / (1 + |g|), lemma / (1 + |(Im tau)^-1|), "
    "monge_ampere / 4^n, nabla_j_symmetry / (1 + |dJ|), jet_oracle / (1 + jet scale)",
}


@dataclass
class _Accumulator:
    tolerance: float
    values: list[float] = field(default_factory=list)
    worst_value: float = -1.0
    worst_z: np.ndarray | None = None

    def add(self, residual: float, z: np.ndarray) -> None:
        if math.isnan(residual):
            residual = math.inf
        self.values.append(residual)
        if residual > self.worst_value:
            self.worst_value, self.worst_z = residual, z

    def summary(self) -> CheckSummary:
        if not self.values:
            return CheckSummary(
                max_residual=0.0,
                mean_residual=0.0,
                worst_point=[],
                tolerance=self.tolerance,
                n_evaluated=0,
                passed=True,
            )
        maximum = max(self.values)
        assert self.worst_z is not None
        return CheckSummary(
            max_residual=maximum,
            mean_residual=math.fsum(self.values) / len(self.values),
            worst_point=[[float(c.real), float(c.imag)] for c in self.worst_z],
            tolerance=self.tolerance,
            n_evaluated=len(self.values),
            passed=maximum <= self.tolerance,
        )


def sample(w: ChartWindow) -> np.ndarray:
    """Sample points, shape (m, n), complex; deterministic for a given window."""
    n = w.n
    lo, hi = np.asarray(w.lo, dtype=float), np.asarray(w.hi, dtype=float)
    match w.strategy:
        case Strategy.GRID:
            axes = [
                np.array([(a + b) / 2]) if count == 1 else np.linspace(a, b, count)
                for a, b, count in zip(lo, hi, w.counts)
            ]
            flat = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=-1)
        case Strategy.QUASI:
            sampler = qmc.Halton(d=2 * n, scramble=True, seed=w.seed)
            flat = qmc.scale(sampler.random(w.samples), lo, hi)
    return flat[:, :n] + 1j * flat[:, n:]


def oracle_indices(n_candidates: int, limit: int) -> list[int]:
    """Up to `limit` evenly spaced positions out of `n_candidates`."""
    if n_candidates == 0 or limit <= 0:
        return []
    if limit >= n_candidates:
        return list(range(n_candidates))
    return sorted({int(k) for k in np.round(np.linspace(0, n_candidates - 1, limit))})


def _metric_scale(p: PointData) -> float:
    return 1 + linalg.max_abs(skgeom.metric_affine(p))


def algebraic_residuals(p: PointData, *, settings: GeometrySettings = GEOMETRY_SETTINGS) -> dict[str, float] | None:
    """Normalized residuals of every algebraic identity at p; None when p is degenerate."""
    gate = skgeom.nondegeneracy(p.tau, settings=settings)
    if not gate.ok:
        return None
    n = p.n
    blocks = skgeom.affine_blocks(p)
    g = skgeom.metric_affine(p)
    gv = skgeom.graph_hessian(p, settings=settings)
    g_scale = 1 + linalg.max_abs(g)
    d_j = skgeom.complex_structure_derivative(p)
    sig_a, sig_b = gate.sig_imtau
    return {
        "metric_equality": linalg.max_abs(g - gv) / g_scale,
        "lemma_identities": skgeom.lemma_residuals(p).max() / (1 + linalg.max_abs(blocks.im_tau_inv)),
        "inverse_consistency": linalg.max_abs(skgeom.inverse_metric(p) @ gv - np.eye(2 * n)) / g_scale,
        "kahler_form": linalg.max_abs(skgeom.kahler_form(p) - 2 * linalg.standard_symplectic(n)) / g_scale,
        "monge_ampere": skgeom.volume_check(p).residual / 4.0**n,
        "j_compatibility": skgeom.compatibility_residual(p) / g_scale,
        "nabla_j_symmetry": skgeom.nabla_j_symmetry_residual(p) / (1 + linalg.max_abs(d_j)),
        "signature_evenness": 0.0 if linalg.signature(g) == (2 * sig_a, 2 * sig_b) else 1.0,
    }


def clears_locus(p: PointData, h: float, clearance: float) -> bool:
    """
    Whether a stencil of reach 2h in y stays clear of the degenerate locus.

    With s the smallest singular value of Im tau, the stencil moves u by about
    2h / s and Im tau by about |sigma| 2h / s; that drift must stay below
    2s / clearance.
    """
    s = linalg.min_singular_value(p.tau.imag)
    return s * s >= clearance * h * linalg.max_abs(p.sigma)


def oracle_residuals(
    e: Expr, p: PointData, h: float, *, settings: GeometrySettings = GEOMETRY_SETTINGS
) -> dict[str, float]:
    """
    Finite-difference residuals at p over one shared Newton-resolved stencil;
    the h and 2h stencils are extrapolated together.
    """
    stencil = skgeom.AffineStencil(e, p, h, settings=settings)
    scale = _metric_scale(p)
    return {
        "gauss_weingarten": skgeom.gauss_weingarten_residual(e, p, h, stencil=stencil, extrapolate=True) / scale,
        "hessian_oracle": linalg.max_abs(
            skgeom.fd_graph_hessian(e, p, h, stencil=stencil, extrapolate=True) - skgeom.graph_hessian(p)
        )
        / scale,
        "gradient_oracle": linalg.max_abs(
            skgeom.fd_graph_gradient(e, p, h, stencil=stencil, extrapolate=True) - skgeom.graph_gradient(p)
        )
        / scale,
    }


def jet_oracle_residual(e: Expr, z: np.ndarray, h: float) -> float:
    jet = jet_eval(e, z)
    approx = fd_oracle(e, z, h)
    deviation = max(
        linalg.max_abs(jet.grad - approx.grad),
        linalg.max_abs(jet.hess - approx.hess),
        linalg.max_abs(jet.third - approx.third),
    )
    return deviation / (1 + jet.scale())


def _in_order(fn: Callable, items: list, threads: int | None) -> list:
    if threads == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(fn, items))


def run_suite(
    e: Expr,
    w: ChartWindow,
    tolerances: Tolerances | None = None,
    oracle_steps: float | None = None,
    *,
    oracle_points: int | None = None,
    jet_oracle: bool = False,
    threads: int | None = None,
    verification_settings: VerificationSettings = VERIFICATION_SETTINGS,
    geometry_settings: GeometrySettings = GEOMETRY_SETTINGS,
) -> VerificationReport:
    if e.arity != w.n:
        raise ValueError(f"expression takes {e.arity} variables but the window has {w.n}")
    tolerances = tolerances or Tolerances(
        algebraic=verification_settings.ALGEBRAIC_TOLERANCE, oracle=verification_settings.ORACLE_TOLERANCE
    )
    h = verification_settings.ORACLE_STEP if oracle_steps is None else oracle_steps
    if h <= 0:
        raise ValueError("oracle step must be positive")
    limit = verification_settings.ORACLE_SUBSAMPLE if oracle_points is None else oracle_points

    zs = sample(w)
    logger.info("checking %s on %d samples", e, zs.shape[0])
    points = skgeom.eval_points(e, zs)
    algebraic = _in_order(lambda p: algebraic_residuals(p, settings=geometry_settings), points, threads)

    nondegenerate = [k for k, residuals in enumerate(algebraic) if residuals is not None]
    n_degenerate = len(points) - len(nondegenerate)
    for k, residuals in enumerate(algebraic):
        if residuals is None:
            logger.debug("excluding degenerate sample %d at z=%s", k, tuple(points[k].z))
    if not nondegenerate:
        raise AllPointsDegenerate(f"Im d^2F is singular at all {len(points)} samples of the window")

    accumulators = {name: _Accumulator(tolerances.algebraic) for name in ALGEBRAIC_CHECKS}
    for name in ORACLE_CHECKS:
        accumulators[name] = _Accumulator(tolerances.oracle)
    if jet_oracle:
        accumulators[JET_ORACLE_CHECK] = _Accumulator(tolerances.oracle)

    for k in nondegenerate:
        for name, value in algebraic[k].items():
            accumulators[name].add(value, points[k].z)

    clearance = verification_settings.ORACLE_CLEARANCE
    candidates = [k for k in nondegenerate if clears_locus(points[k], h, clearance)]
    n_near_locus = len(nondegenerate) - len(candidates)
    if n_near_locus:
        logger.info("%d samples are too close to the degenerate locus for the oracles", n_near_locus)
    chosen = [candidates[i] for i in oracle_indices(len(candidates), limit)]

    def stencil_oracles(k: int) -> dict[str, float] | None:
        try:
            return oracle_residuals(e, points[k], h, settings=geometry_settings)
        except (NewtonDivergence, DomainError) as error:
            logger.warning("oracle stencil at sample %d left out: %s", k, error)
            return None

    def jet_oracle_at(k: int) -> float | None:
        try:
            return jet_oracle_residual(e, points[k].z, h)
        except DomainError as error:
            logger.warning("jet oracle at sample %d left out: %s", k, error)
            return None

    failed: set[int] = set()
    for k, residuals in zip(chosen, _in_order(stencil_oracles, chosen, threads)):
        if residuals is None:
            failed.add(k)
            continue
        for name, value in residuals.items():
            accumulators[name].add(value, points[k].z)
    if jet_oracle:
        for k, value in zip(chosen, _in_order(jet_oracle_at, chosen, threads)):
            if value is None:
                failed.add(k)
                continue
            accumulators[JET_ORACLE_CHECK].add(value, points[k].z)

    checks = {name: acc.summary() for name, acc in accumulators.items()}
    passed = all(check.passed for check in checks.values())
    logger.info(
        "suite finished: pass=%s, %d degenerate samples excluded, %d oracle stencils unresolved",
        passed,
        n_degenerate,
        len(failed),
    )
    return VerificationReport(
        expr_text=str(e),
        window=w,
        n_points=len(points),
        n_degenerate=n_degenerate,
        n_near_locus=n_near_locus,
        oracle_unresolved=[[[float(c.real), float(c.imag)] for c in points[k].z] for k in sorted(failed)],
        checks=checks,
        tolerances=tolerances,
        conventions=CONVENTIONS,
        settings={
            "oracle_step": h,
            "oracle_points": len(chosen),
            "oracle_extrapolated": True,
            "oracle_clearance": clearance,
            "jet_oracle": jet_oracle,
            **geometry_settings.model_dump(),
        },
        passed=passed,
    )

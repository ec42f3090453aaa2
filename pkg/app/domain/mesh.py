"""
Triangulated surface of phi_F for one complex variable.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from app.domain import skgeom
from app.domain.exceptions import AllPointsDegenerate, ArityError
from app.domain.expr import Expr
from app.domain.verify import ChartWindow, Strategy, sample

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class MeshData:
    vertices: np.ndarray  # (m, 3): (x, y, f)
    faces: list[tuple[int, int, int]] = field(default_factory=list)  # 0-based
    det_residual: np.ndarray = field(default_factory=lambda: np.zeros(0))
    min_sv: np.ndarray = field(default_factory=lambda: np.zeros(0))
    signature_flag: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))  # +1, -1, 0 if degenerate
    n_dropped: int = 0

    @classmethod
    def empty(cls) -> MeshData:
        return cls(vertices=np.zeros((0, 3)))


def build_mesh(e: Expr, w: ChartWindow) -> MeshData:
    """
    Vertex k = i * n_u + j is phi_F at the grid point (x_i, u_j). Each grid cell
    becomes triangles (v00, v10, v11) and (v00, v11, v01); cells touching a
    degenerate vertex are dropped.
    """
    if e.arity != 1 or w.n != 1:
        raise ArityError(f"meshes need one complex variable, got {e.arity}")
    if w.strategy is not Strategy.GRID:
        raise ValueError("meshes need a grid window")
    n_x, n_u = w.counts
    points = skgeom.eval_points(e, sample(w))

    det_residual = np.full(len(points), np.nan)
    min_sv = np.zeros(len(points))
    flag = np.zeros(len(points), dtype=int)
    for k, p in enumerate(points):
        gate = skgeom.nondegeneracy(p.tau)
        min_sv[k] = gate.min_sv
        if gate.ok:
            det_residual[k] = skgeom.volume_check(p).residual
            flag[k] = 1 if gate.sig_imtau == (1, 0) else -1
    if not flag.any():
        raise AllPointsDegenerate(f"Im d^2F vanishes at all {len(points)} mesh vertices")

    faces: list[tuple[int, int, int]] = []
    dropped = 0
    for i in range(n_x - 1):
        for j in range(n_u - 1):
            v00, v01 = i * n_u + j, i * n_u + j + 1
            v10, v11 = v00 + n_u, v01 + n_u
            if not all(flag[[v00, v01, v10, v11]]):
                dropped += 1
                continue
            faces.append((v00, v10, v11))
            faces.append((v00, v11, v01))
    if dropped:
        logger.info("dropped %d cells touching degenerate vertices", dropped)
    return MeshData(
        vertices=np.stack([p.imm for p in points]),
        faces=faces,
        det_residual=det_residual,
        min_sv=min_sv,
        signature_flag=flag,
        n_dropped=dropped,
    )

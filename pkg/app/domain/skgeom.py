"""
Per-point geometry of the immersion

    phi_F = (Re z, Re F_z, 2 Im F - 2 (Re F_z) . Im z)

built from a holomorphic F, together with residuals for every identity the
construction has to satisfy.

Frames: the chart frame (x, u) with z = x + i u, and the affine frame (x, y)
with y = Re F_z. The affine frame is a coordinate system exactly where Im tau,
tau = d^2 F, is invertible.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from app.config import GEOMETRY_SETTINGS, GeometrySettings
from app.domain.cjet import CJet, jet_eval
from app.domain.exceptions import AsymmetryError, DegenerateMetric, NewtonDivergence
from app.domain.expr import Expr
from app.utils import linalg
from app.utils.finite_difference import Offset, central_gradient, central_hessian

logger = logging.getLogger(__name__)

# Sign convention of the Kahler form; with it omega = 2 sum dx^i ^ dy_i.
OMEGA_CONVENTION = "omega(X, Y) = g(X, J Y)"


@dataclass(frozen=True, eq=False)
class PointData:
    z: np.ndarray
    w: np.ndarray
    x: np.ndarray
    u: np.ndarray
    y: np.ndarray
    v: np.ndarray
    value: complex
    tau: np.ndarray
    sigma: np.ndarray
    f: float
    imm: np.ndarray

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @classmethod
    def from_jet(cls, z: np.ndarray, jet: CJet) -> PointData:
        z = np.asarray(z, dtype=complex)
        w = np.array(jet.grad, dtype=complex)
        x, u, y, v = z.real.copy(), z.imag.copy(), w.real.copy(), w.imag.copy()
        value = complex(jet.val)
        f = 2 * value.imag - 2 * float(np.dot(y, u))
        return cls(
            z=z.copy(),
            w=w,
            x=x,
            u=u,
            y=y,
            v=v,
            value=value,
            tau=np.array(jet.hess),
            sigma=np.array(jet.third),
            f=f,
            imm=np.concatenate([x, y, [f]]),
        )


@dataclass(frozen=True, slots=True)
class Nondegeneracy:
    ok: bool
    min_sv: float
    sig_imtau: tuple[int, int]


@dataclass(frozen=True, eq=False)
class MetricBundle:
    g_xu: np.ndarray
    g_xy: np.ndarray
    gv_xy: np.ndarray
    ginv_xy: np.ndarray
    omega_xy: np.ndarray
    jac: np.ndarray
    sig: tuple[int, int]

    def dict(self) -> dict:
        res = {}
        for k in self.__dataclass_fields__.keys():
            item = getattr(self, k)
            res[k] = item.tolist() if isinstance(item, np.ndarray) else list(item)
        return res


@dataclass(frozen=True, slots=True)
class LemmaResiduals:
    r1: float
    r2: float
    r3: float
    r4: float
    r5: float
    r6: float

    def as_tuple(self) -> tuple[float, ...]:
        return (self.r1, self.r2, self.r3, self.r4, self.r5, self.r6)

    def max(self) -> float:
        return max(self.as_tuple())


@dataclass(frozen=True, slots=True)
class VolumeCheck:
    det_gxy: float
    residual: float


@dataclass(frozen=True, eq=False)
class AffineBlocks:
    re_tau: np.ndarray
    im_tau: np.ndarray
    im_tau_inv: np.ndarray


# Points
def eval_point(e: Expr, z) -> PointData:
    z = np.asarray(z, dtype=complex)
    return PointData.from_jet(z, jet_eval(e, z))


def eval_points(e: Expr, zs) -> list[PointData]:
    """Point data for a batch of shape (m, n) from a single batched jet."""
    zs = np.asarray(zs, dtype=complex)
    jet = jet_eval(e, zs)
    return [PointData.from_jet(zs[k], jet.at(k)) for k in range(zs.shape[0])]


def immersion(e: Expr, zs) -> np.ndarray:
    """phi_F for a batch of shape (..., n); result has shape (..., 2n + 1)."""
    zs = np.asarray(zs, dtype=complex)
    jet = jet_eval(e, zs)
    x, u, y = zs.real, zs.imag, jet.grad.real
    f = 2 * jet.val.imag - 2 * np.sum(y * u, axis=-1)
    return np.concatenate([x, y, f[..., None]], axis=-1)


# Nondegeneracy
def nondegeneracy(tau: np.ndarray, *, settings: GeometrySettings = GEOMETRY_SETTINGS) -> Nondegeneracy:
    tau = np.asarray(tau, dtype=complex)
    threshold = settings.NONDEGENERACY_RTOL * float(np.linalg.norm(tau, 2))
    im_tau = tau.imag
    min_sv = linalg.min_singular_value(im_tau)
    return Nondegeneracy(ok=min_sv > threshold, min_sv=min_sv, sig_imtau=linalg.signature(im_tau, threshold))


def _require_nondegenerate(p: PointData, settings: GeometrySettings = GEOMETRY_SETTINGS) -> Nondegeneracy:
    check = nondegeneracy(p.tau, settings=settings)
    if not check.ok:
        raise DegenerateMetric(f"Im d^2F is singular at z={tuple(p.z)} (min singular value {check.min_sv:.3e})")
    return check


def affine_blocks(p: PointData) -> AffineBlocks:
    _require_nondegenerate(p)
    re_tau, im_tau = p.tau.real.copy(), p.tau.imag.copy()
    return AffineBlocks(re_tau=re_tau, im_tau=im_tau, im_tau_inv=np.linalg.inv(im_tau))


# Frames and metric
def chart_jacobian(p: PointData) -> np.ndarray:
    """d(x, y) / d(x, u) = [[I, 0], [Re tau, -Im tau]]."""
    n = p.n
    return linalg.block(np.eye(n), np.zeros((n, n)), p.tau.real, -p.tau.imag)


def metric_g(p: PointData) -> np.ndarray:
    """
    g = Re(2 zeta_1^T (Im tau) conj(zeta_2)) on chart vectors zeta = a + i b,
    i.e. 2 diag(Im tau, Im tau) in the (x, u) frame.
    """
    blocks = affine_blocks(p)
    zero = np.zeros_like(blocks.im_tau)
    return 2 * linalg.block(blocks.im_tau, zero, zero, blocks.im_tau)


def frame_change_to_affine(p: PointData, m: np.ndarray) -> np.ndarray:
    """Congruence m -> jac^{-T} m jac^{-1} taking a (x, u) bilinear form to (x, y)."""
    _require_nondegenerate(p)
    jac_inv = np.linalg.inv(chart_jacobian(p))
    return jac_inv.T @ np.asarray(m, dtype=float) @ jac_inv


def metric_affine(p: PointData) -> np.ndarray:
    return linalg.symmetrize(frame_change_to_affine(p, metric_g(p)))


def uv_partials(p: PointData) -> np.ndarray:
    """
    Rows: (u^1..u^n, v_1..v_n); columns: derivatives along (x^1..x^n, y_1..y_n).

    From dy = Re tau dx - Im tau du and dv = Im tau dx + Re tau du.
    """
    b = affine_blocks(p)
    u_x = b.im_tau_inv @ b.re_tau
    u_y = -b.im_tau_inv
    v_x = b.im_tau + b.re_tau @ u_x
    v_y = -b.re_tau @ b.im_tau_inv
    return linalg.block(u_x, u_y, v_x, v_y)


def _split(m: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    return m[:n, :n], m[:n, n:], m[n:, :n], m[n:, n:]


def lemma_residuals(p: PointData) -> LemmaResiduals:
    """
    Max-abs deviations of the six identity families satisfied by the partials
    of u and v in affine coordinates (real and imaginary parts of the pulled
    back complex symplectic form).
    """
    u_x, u_y, v_x, v_y = _split(uv_partials(p), p.n)
    eye = np.eye(p.n)
    cross_xx = u_x.T @ v_x
    cross_yy = u_y.T @ v_y
    return LemmaResiduals(
        r1=linalg.max_abs(u_x.T @ v_y - v_x.T @ u_y - eye),
        r2=linalg.asymmetry(cross_xx),
        r3=linalg.asymmetry(cross_yy),
        r4=linalg.max_abs(u_x + v_y.T),
        r5=linalg.asymmetry(u_y),
        r6=linalg.asymmetry(v_x),
    )


def graph_hessian(p: PointData, *, settings: GeometrySettings = GEOMETRY_SETTINGS) -> np.ndarray:
    """
    Hessian of the graph height f in affine coordinates from the closed forms
    f_xx = 2 v_x, f_xy = -2 u_x^T, f_yy = -2 u_y.

    The yx block is assembled independently as 2 v_y^T; it agrees with the
    transposed xy block exactly when u_x = -v_y^T holds.
    """
    u_x, u_y, v_x, v_y = _split(uv_partials(p), p.n)
    gv = linalg.block(2 * v_x, -2 * u_x.T, 2 * v_y.T, -2 * u_y)
    defect = linalg.asymmetry(gv)
    if defect > settings.SYMMETRY_TOL * (1 + linalg.max_abs(gv)):
        raise AsymmetryError(f"graph Hessian is not symmetric (defect {defect:.3e}) at z={tuple(p.z)}")
    return linalg.symmetrize(gv)


def inverse_metric(p: PointData) -> np.ndarray:
    """
    g^{-1} on the (dx, dy) coframe:
    (dx, dx) = -u_y / 2, (dx, dy) = u_x / 2, (dy, dy) = v_x / 2.
    """
    u_x, u_y, v_x, _ = _split(uv_partials(p), p.n)
    return linalg.symmetrize(0.5 * linalg.block(-u_y, u_x, u_x.T, v_x))


def graph_gradient(p: PointData) -> np.ndarray:
    """(df/dx, df/dy) = (2 v, -2 u)."""
    return np.concatenate([2 * p.v, -2 * p.u])


# Complex structure and Kahler form
def complex_structure(p: PointData) -> np.ndarray:
    """Multiplication by i in the z-chart, written in the (x, y) frame."""
    _require_nondegenerate(p)
    jac = chart_jacobian(p)
    return jac @ -linalg.standard_symplectic(p.n) @ np.linalg.inv(jac)


def kahler_form(p: PointData) -> np.ndarray:
    return metric_affine(p) @ complex_structure(p)


def compatibility_residual(p: PointData) -> float:
    """J^2 = -1 and J is g-orthogonal (equivalently skew with respect to g)."""
    j = complex_structure(p)
    g = metric_affine(p)
    return max(linalg.max_abs(j @ j + np.eye(2 * p.n)), linalg.max_abs(j.T @ g @ j - g))


def complex_structure_derivative(p: PointData) -> np.ndarray:
    """
    d_a J^c_b over the affine coordinates, indexed [a, c, b].

    J depends on the point only through tau, and d tau / d(x, y) is sigma
    contracted with dz / d(x, y) = [I + i u_x, i u_y].
    """
    n = p.n
    u_x, u_y, _, _ = _split(uv_partials(p), n)
    dz = np.hstack([np.eye(n) + 1j * u_x, 1j * u_y])
    d_tau = np.einsum("ijk,ka->aij", p.sigma, dz)
    jac_inv = np.linalg.inv(chart_jacobian(p))
    j_xu = -linalg.standard_symplectic(n)
    j = complex_structure(p)
    zero = np.zeros((n, n))
    out = np.empty((2 * n, 2 * n, 2 * n))
    for a in range(2 * n):
        d_jac = linalg.block(zero, zero, d_tau[a].real, -d_tau[a].imag)
        out[a] = (d_jac @ j_xu - j @ d_jac) @ jac_inv
    return out


def nabla_j_symmetry_residual(p: PointData) -> float:
    """
    Coordinate fields of (x, y) are parallel, so (nabla_a J)^c_b = d_a J^c_b;
    the residual is max |d_a J^c_b - d_b J^c_a|.
    """
    d_j = complex_structure_derivative(p)
    return linalg.max_abs(d_j - d_j.transpose(2, 1, 0))


def volume_check(p: PointData) -> VolumeCheck:
    det = float(np.linalg.det(metric_affine(p)))
    return VolumeCheck(det_gxy=det, residual=abs(abs(det) - 4.0**p.n))


def metric_bundle(p: PointData) -> MetricBundle:
    g_xy = metric_affine(p)
    return MetricBundle(
        g_xu=metric_g(p),
        g_xy=g_xy,
        gv_xy=graph_hessian(p),
        ginv_xy=inverse_metric(p),
        omega_xy=g_xy @ complex_structure(p),
        jac=chart_jacobian(p),
        sig=linalg.signature(g_xy),
    )


# Chart inversion and finite-difference oracles
def resolve_affine_point(
    e: Expr,
    p: PointData,
    x_target: np.ndarray,
    y_target: np.ndarray,
    *,
    settings: GeometrySettings = GEOMETRY_SETTINGS,
) -> PointData:
    """
    The chart point with Re z = x_target and Re F_z = y_target.

    Re z is pinned, so only u = Im z is solved for, by Newton iteration on
    Re F_z(x_target + i u) = y_target (Jacobian -Im tau) seeded at p.u.
    """
    x_target = np.asarray(x_target, dtype=float)
    y_target = np.asarray(y_target, dtype=float)
    u = p.u.copy()
    for iteration in range(settings.NEWTON_MAX_ITER):
        q = eval_point(e, x_target + 1j * u)
        try:
            step = np.linalg.solve(q.tau.imag, q.y - y_target)
        except np.linalg.LinAlgError:
            raise NewtonDivergence(f"singular Newton system at z={tuple(q.z)}")
        u = u + step
        if not np.all(np.isfinite(u)):
            break
        if linalg.max_abs(step) <= settings.NEWTON_TOL * (1 + linalg.max_abs(u)):
            logger.debug("affine chart resolved in %d iterations", iteration + 1)
            return eval_point(e, x_target + 1j * u)
    raise NewtonDivergence(
        f"no chart point for x={x_target.tolist()}, y={y_target.tolist()} within "
        f"{settings.NEWTON_MAX_ITER} iterations (seed z={tuple(p.z)})"
    )


class AffineStencil:
    """
    Newton-resolved chart points on a central-difference stencil of step h
    around p in affine coordinates; offsets are integer multiples of h along
    (x^1..x^n, y_1..y_n). Resolutions are memoized across oracles.
    """

    def __init__(self, e: Expr, p: PointData, h: float, *, settings: GeometrySettings = GEOMETRY_SETTINGS):
        if h <= 0:
            raise ValueError("step must be positive")
        self.e = e
        self.p = p
        self.h = h
        self.settings = settings
        self.dim = 2 * p.n
        self._points: dict[Offset, PointData] = {}

    def point(self, offset: Offset) -> PointData:
        if offset not in self._points:
            if not any(offset):
                self._points[offset] = self.p
            else:
                delta = self.h * np.asarray(offset, dtype=float)
                n = self.p.n
                self._points[offset] = resolve_affine_point(
                    self.e, self.p, self.p.x + delta[:n], self.p.y + delta[n:], settings=self.settings
                )
        return self._points[offset]

    def immersion(self, offset: Offset) -> np.ndarray:
        return self.point(offset).imm

    def graph_height(self, offset: Offset) -> float:
        return self.point(offset).f


def _stencil(e: Expr, p: PointData, h: float, stencil: AffineStencil | None) -> AffineStencil:
    if stencil is None:
        return AffineStencil(e, p, h)
    if stencil.p is not p or stencil.h != h:
        raise ValueError("stencil was built for another point or step")
    return stencil


def fd_graph_hessian(
    e: Expr, p: PointData, h: float, *, stencil: AffineStencil | None = None, extrapolate: bool = False
) -> np.ndarray:
    s = _stencil(e, p, h, stencil)
    return central_hessian(s.graph_height, s.dim, h, extrapolate=extrapolate)


def fd_graph_gradient(
    e: Expr, p: PointData, h: float, *, stencil: AffineStencil | None = None, extrapolate: bool = False
) -> np.ndarray:
    s = _stencil(e, p, h, stencil)
    return central_gradient(s.graph_height, s.dim, h, extrapolate=extrapolate)


def gauss_weingarten_residual(
    e: Expr, p: PointData, h: float, *, stencil: AffineStencil | None = None, extrapolate: bool = False
) -> float:
    """
    Second derivatives of phi_F over (x, y): the first 2n components must not
    bend (coordinate fields are parallel, S = 0, theta = 0) and the last one
    must have Hessian g, the coefficient of the normal d_{2n+1}.
    """
    s = _stencil(e, p, h, stencil)
    second = central_hessian(s.immersion, s.dim, h, extrapolate=extrapolate)
    tangential, normal = second[..., : s.dim], second[..., s.dim]
    return max(linalg.max_abs(tangential), linalg.max_abs(normal - metric_affine(p)))

import numpy as np
import pytest

from app.adapters.expr_parser import parse
from app.domain import skgeom
from app.domain.exceptions import DegenerateMetric, NewtonDivergence
from app.domain.verify import sample
from app.tests.fakes import geo_faker
from app.utils import linalg
from app.utils.finite_difference import central_gradient


def test_eval_point_paraboloid(paraboloid):
    p = skgeom.eval_point(paraboloid, [1 + 2j])
    assert p.x[0] == 1 and p.u[0] == 2
    assert p.w[0] == pytest.approx(-2 + 1j)
    assert (p.y[0], p.v[0]) == pytest.approx((-2, 1))
    assert p.f == pytest.approx(5, abs=1e-14)
    assert p.imm == pytest.approx([1, -2, 5], abs=1e-14)


def test_eval_point_origin(paraboloid):
    p = skgeom.eval_point(paraboloid, [0])
    assert np.array_equal(p.imm, np.zeros(3))


def test_eval_point_cubic_at_i(cubic):
    p = skgeom.eval_point(cubic, [1j])
    assert p.w[0] == pytest.approx(-0.5)
    assert (p.y[0], p.v[0]) == pytest.approx((-0.5, 0))
    assert p.tau[0, 0] == pytest.approx(1j)
    # F(i) = -i/6, so f = 2 Im F - 2 y u = -1/3 + 1
    assert p.f == pytest.approx(2 / 3)


def test_point_data_invariants(corpus_case):
    e = corpus_case.expr
    for z in sample(corpus_case.window)[:10]:
        p = skgeom.eval_point(e, z)
        assert np.array_equal(p.x + 1j * p.u, p.z)
        assert np.array_equal(p.y + 1j * p.v, p.w)
        assert np.array_equal(p.imm[: p.n], p.x) and np.array_equal(p.imm[p.n : 2 * p.n], p.y)
        assert p.imm[-1] == p.f == 2 * p.value.imag - 2 * float(np.dot(p.y, p.u))


def test_immersion_batch_matches_points(corpus_case):
    zs = sample(corpus_case.window)[:8]
    batch = skgeom.immersion(corpus_case.expr, zs)
    for z, row in zip(zs, batch):
        assert np.allclose(row, skgeom.eval_point(corpus_case.expr, z).imm, rtol=1e-14, atol=1e-14)


def test_nondegeneracy_cases():
    real = skgeom.nondegeneracy(np.array([[1.0 + 0j]]))
    assert not real.ok and real.min_sv == 0
    unit = skgeom.nondegeneracy(np.array([[1j]]))
    assert unit.ok and unit.sig_imtau == (1, 0)
    # z^3/6 at a real point: tau = x
    assert not skgeom.nondegeneracy(np.array([[0.7 + 0j]])).ok
    assert not skgeom.nondegeneracy(np.zeros((2, 2), dtype=complex)).ok


def test_degenerate_point_refuses_geometry():
    p = skgeom.eval_point(parse("z1^2/2", 1), [0.3 + 0.4j])
    for operation in (
        skgeom.metric_g,
        skgeom.uv_partials,
        skgeom.lemma_residuals,
        skgeom.graph_hessian,
        skgeom.inverse_metric,
        skgeom.kahler_form,
        skgeom.volume_check,
        skgeom.complex_structure,
        skgeom.metric_bundle,
    ):
        with pytest.raises(DegenerateMetric):
            operation(p)
    with pytest.raises(DegenerateMetric):
        skgeom.frame_change_to_affine(p, np.eye(2))


def test_paraboloid_bundle(paraboloid):
    p = skgeom.eval_point(paraboloid, [0.3 - 0.8j])
    bundle = skgeom.metric_bundle(p)
    assert np.allclose(bundle.g_xu, 2 * np.eye(2))
    assert np.allclose(bundle.g_xy, 2 * np.eye(2))
    assert np.allclose(bundle.gv_xy, 2 * np.eye(2))
    assert np.allclose(bundle.ginv_xy, 0.5 * np.eye(2))
    assert np.allclose(bundle.jac, [[1, 0], [0, -1]])
    assert np.allclose(bundle.omega_xy, [[0, 2], [-2, 0]])
    assert bundle.sig == (2, 0)
    assert np.allclose(skgeom.uv_partials(p), [[0, -1], [1, 0]])
    assert skgeom.volume_check(p).det_gxy == pytest.approx(4)
    assert skgeom.lemma_residuals(p).max() < 1e-13


def test_cubic_metric_flips_with_im_z(cubic):
    upper = skgeom.eval_point(cubic, [0.4 + 0.5j])
    lower = skgeom.eval_point(cubic, [0.4 - 0.5j])
    assert np.allclose(skgeom.metric_g(upper), np.eye(2))
    assert np.allclose(skgeom.metric_g(lower), -np.eye(2))
    assert skgeom.metric_bundle(upper).sig == (2, 0)
    assert skgeom.metric_bundle(lower).sig == (0, 2)


def test_metric_matches_pullback_of_complex_form():
    # Re(2 zeta1^T Im(tau) conj(zeta2)) for chart vectors zeta = a + i b written as (a, b)
    e = parse("i*z1^2/2 + i*z2^2 + z1*z2 + z1^3/10", 2)
    p = skgeom.eval_point(e, [0.2 - 0.1j, 0.3 + 0.2j])
    g = skgeom.metric_g(p)
    for _ in range(5):
        a1, b1, a2, b2 = (np.array([geo_faker.random.uniform(-1, 1) for _ in range(2)]) for _ in range(4))
        zeta1, zeta2 = a1 + 1j * b1, a2 + 1j * b2
        direct = (2 * zeta1 @ p.tau.imag @ np.conj(zeta2)).real
        assert np.concatenate([a1, b1]) @ g @ np.concatenate([a2, b2]) == pytest.approx(direct, abs=1e-13)


def test_frame_change_inverts_the_jacobian_congruence():
    e = parse("i*z1^2/2 + i*z2^2 + z1*z2 + z1^3/10", 2)
    p = skgeom.eval_point(e, [0.1 + 0.3j, -0.2 + 0.1j])
    jac = skgeom.chart_jacobian(p)
    assert np.allclose(skgeom.frame_change_to_affine(p, jac.T @ jac), np.eye(4), atol=1e-12)
    m = np.arange(16.0).reshape(4, 4)
    back = jac.T @ skgeom.frame_change_to_affine(p, m) @ jac
    assert np.allclose(back, m, atol=1e-12)


def test_uv_partials_match_finite_differences_of_the_chart_inverse():
    e = parse("i*z1^2/2 + i*z2^2 + z1*z2 + z1^3/10", 2)
    p = skgeom.eval_point(e, [0.1 + 0.3j, -0.2 + 0.1j])
    stencil = skgeom.AffineStencil(e, p, 1e-4)
    fd = central_gradient(lambda o: np.concatenate([stencil.point(o).u, stencil.point(o).v]), 4, 1e-4)
    # fd[a] holds d(u, v)/d xi_a; rows of uv_partials are (u, v)
    assert np.allclose(fd.T, skgeom.uv_partials(p), atol=1e-7)


def test_lemma_and_metric_identities_on_corpus(corpus_case):
    e = corpus_case.expr
    for p in skgeom.eval_points(e, sample(corpus_case.window)):
        blocks = skgeom.affine_blocks(p)
        lemma = skgeom.lemma_residuals(p)
        assert all(r >= 0 for r in lemma.as_tuple())
        assert lemma.max() <= 1e-11 * (1 + linalg.max_abs(blocks.im_tau_inv))
        g = skgeom.frame_change_to_affine(p, skgeom.metric_g(p))
        gv = skgeom.graph_hessian(p)
        assert linalg.max_abs(g - gv) <= 1e-10 * (1 + linalg.max_abs(g))
        assert linalg.asymmetry(g) <= 1e-13 * (1 + linalg.max_abs(g))
        assert np.allclose(skgeom.inverse_metric(p) @ gv, np.eye(2 * p.n), atol=1e-10)
        assert np.allclose(skgeom.kahler_form(p), 2 * linalg.standard_symplectic(p.n), atol=1e-11)
        assert abs(skgeom.volume_check(p).residual) <= 1e-9 * 4**p.n
        assert skgeom.compatibility_residual(p) <= 1e-10 * (1 + linalg.max_abs(g))


def test_signature_evenness_on_corpus(corpus_case):
    for p in skgeom.eval_points(corpus_case.expr, sample(corpus_case.window)[:20]):
        a, b = skgeom.nondegeneracy(p.tau).sig_imtau
        assert skgeom.metric_bundle(p).sig == (2 * a, 2 * b)


def test_indefinite_signature():
    e = parse("i*z1*z2 + log(z1 + 2)", 2)
    p = skgeom.eval_point(e, [0.1 + 0.2j, -0.3 + 0.1j])
    assert skgeom.nondegeneracy(p.tau).sig_imtau == (1, 1)
    assert skgeom.metric_bundle(p).sig == (2, 2)
    assert skgeom.volume_check(p).det_gxy == pytest.approx(16, rel=1e-12)


def test_two_variable_paraboloid_volume():
    p = skgeom.eval_point(parse("i*(z1^2 + z2^2)/2", 2), [0.5 + 0.1j, -0.2 - 0.7j])
    assert skgeom.volume_check(p).det_gxy == pytest.approx(16)


def test_cubic_volume_at_sample_point(cubic):
    p = skgeom.eval_point(cubic, [0.3 + 0.7j])
    assert abs(skgeom.volume_check(p).det_gxy) == pytest.approx(4, abs=1e-10)
    assert skgeom.lemma_residuals(p).max() <= 1e-12


def test_yx_block_of_graph_hessian_needs_lemma_identity():
    # u_x is not symmetric once Re tau and Im tau do not commute, g^v still is
    p = skgeom.eval_point(parse("i*z1^2/2 + i*z2^2 + z1*z2", 2), [0.1j, 0.2j])
    u_x = skgeom.uv_partials(p)[:2, :2]
    assert linalg.asymmetry(u_x) > 0.1
    assert linalg.asymmetry(skgeom.graph_hessian(p)) == 0


def test_graph_gradient_matches_finite_differences():
    e = parse("z1^3/6", 1)
    p = skgeom.eval_point(e, [0.3 + 0.7j])
    assert np.allclose(skgeom.fd_graph_gradient(e, p, 1e-4), skgeom.graph_gradient(p), atol=1e-7)


def test_fd_graph_hessian_paraboloid(paraboloid):
    p = skgeom.eval_point(paraboloid, [0.4 - 0.3j])
    assert linalg.max_abs(skgeom.fd_graph_hessian(paraboloid, p, 1e-3) - skgeom.graph_hessian(p)) <= 1e-6


def test_fd_graph_hessian_cubic(cubic):
    p = skgeom.eval_point(cubic, [0.3 + 0.7j])
    assert linalg.max_abs(skgeom.fd_graph_hessian(cubic, p, 1e-4) - skgeom.graph_hessian(p)) <= 1e-6


def test_fd_graph_hessian_converges_at_second_order(cubic):
    p = skgeom.eval_point(cubic, [0.3 + 0.7j])
    exact = skgeom.graph_hessian(p)
    coarse = linalg.max_abs(skgeom.fd_graph_hessian(cubic, p, 1e-2) - exact)
    fine = linalg.max_abs(skgeom.fd_graph_hessian(cubic, p, 1e-3) - exact)
    assert 50 < coarse / fine < 200


def test_extrapolation_beats_plain_stencil(cubic):
    p = skgeom.eval_point(cubic, [-1 + 0.2j])
    exact = skgeom.graph_hessian(p)
    plain = linalg.max_abs(skgeom.fd_graph_hessian(cubic, p, 1e-3) - exact)
    extrapolated = linalg.max_abs(skgeom.fd_graph_hessian(cubic, p, 1e-3, extrapolate=True) - exact)
    assert extrapolated < plain / 10


def test_affine_terms_do_not_change_the_hessian():
    # adding i*a*z1 to F adds 2*a*x to f
    plain, shifted = parse("z1^3/6", 1), parse("z1^3/6 + i*0.7*z1", 1)
    p, q = skgeom.eval_point(plain, [0.3 + 0.7j]), skgeom.eval_point(shifted, [0.3 + 0.7j])
    assert q.f == pytest.approx(p.f + 1.4 * 0.3)
    assert np.allclose(skgeom.fd_graph_hessian(plain, p, 1e-3), skgeom.fd_graph_hessian(shifted, q, 1e-3), atol=1e-7)


def test_gauss_weingarten_paraboloid(paraboloid):
    p = skgeom.eval_point(paraboloid, [0.2 + 0.9j])
    assert skgeom.gauss_weingarten_residual(paraboloid, p, 1e-3) <= 1e-6


def test_gauss_weingarten_cubic(cubic):
    p = skgeom.eval_point(cubic, [0.3 + 0.7j])
    assert skgeom.gauss_weingarten_residual(cubic, p, 1e-3) <= 1e-5


def test_gauss_weingarten_two_variables():
    e = parse("i*z1*z2 + log(z1 + 2)", 2)
    p = skgeom.eval_point(e, [0.1 + 0.2j, -0.3 + 0.1j])
    assert skgeom.gauss_weingarten_residual(e, p, 1e-3, extrapolate=True) <= 1e-6


def test_stencil_points_land_on_targets():
    e = parse("i*z1^2/2 + i*z2^2 + z1*z2 + z1^3/10", 2)
    p = skgeom.eval_point(e, [0.1 + 0.3j, -0.2 + 0.1j])
    stencil = skgeom.AffineStencil(e, p, 1e-3)
    q = stencil.point((1, 0, -1, 2))
    assert np.array_equal(q.x, p.x + 1e-3 * np.array([1.0, 0.0]))
    assert np.allclose(q.y, p.y + 1e-3 * np.array([-1.0, 2.0]), atol=1e-14)
    assert stencil.point((1, 0, -1, 2)) is q
    assert stencil.point((0, 0, 0, 0)) is p


def test_stencil_must_match_point_and_step(paraboloid):
    p = skgeom.eval_point(paraboloid, [0.5j])
    stencil = skgeom.AffineStencil(paraboloid, p, 1e-3)
    with pytest.raises(ValueError):
        skgeom.fd_graph_hessian(paraboloid, p, 1e-4, stencil=stencil)
    with pytest.raises(ValueError):
        skgeom.AffineStencil(paraboloid, p, 0)


def test_newton_divergence_off_the_chart(cubic):
    # y = (x^2 - u^2)/2 has no solution with y above x^2/2
    p = skgeom.eval_point(cubic, [0.5j])
    with pytest.raises(NewtonDivergence):
        skgeom.resolve_affine_point(cubic, p, np.array([0.0]), np.array([1.0]))


def test_complex_structure_is_an_almost_complex_structure(corpus_case):
    for p in skgeom.eval_points(corpus_case.expr, sample(corpus_case.window)[:10]):
        j = skgeom.complex_structure(p)
        assert np.allclose(j @ j, -np.eye(2 * p.n), atol=1e-10)


def test_nabla_j_is_symmetric_on_corpus(corpus_case):
    for p in skgeom.eval_points(corpus_case.expr, sample(corpus_case.window)[:10]):
        d_j = skgeom.complex_structure_derivative(p)
        assert skgeom.nabla_j_symmetry_residual(p) <= 1e-10 * (1 + linalg.max_abs(d_j))


def test_complex_structure_derivative_matches_finite_differences():
    e = parse("i*z1^2/2 + i*z2^2 + z1*z2 + z1^3/10", 2)
    p = skgeom.eval_point(e, [0.1 + 0.3j, -0.2 + 0.1j])
    stencil = skgeom.AffineStencil(e, p, 1e-4)
    fd = central_gradient(lambda o: skgeom.complex_structure(stencil.point(o)), 4, 1e-4)
    assert np.allclose(fd, skgeom.complex_structure_derivative(p), atol=1e-6)


def test_kahler_form_is_antisymmetric():
    e = parse("i*z1*z2 + log(z1 + 2)", 2)
    omega = skgeom.kahler_form(skgeom.eval_point(e, [0.2 + 0.1j, 0.3 - 0.4j]))
    for _ in range(5):
        x = np.array([geo_faker.random.uniform(-1, 1) for _ in range(4)])
        assert x @ omega @ x == pytest.approx(0, abs=1e-12)


def test_metric_bundle_dict_is_plain_data(paraboloid):
    data = skgeom.metric_bundle(skgeom.eval_point(paraboloid, [0.5j])).dict()
    assert set(data) == {"g_xu", "g_xy", "gv_xy", "ginv_xy", "omega_xy", "jac", "sig"}
    assert data["sig"] == [2, 0]

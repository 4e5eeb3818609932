import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasilap.grid import cr_residual
from quasilap.oracles import torus_logdet_exact, torus_logdet_extension
from quasilap.potential import (
    ClosedTwoForm,
    ConeChart,
    QuadratureError,
    Rect,
    adaptive_gl,
    cone_potential,
    extension_density,
    extension_split,
    extension_structure_check,
    kahler_potential_check,
    log_potential,
    mixed_derivative,
    mixed_hessian_check,
    path_potential,
    polynomial_uniqueness,
    tilde_q,
    wp_genus1,
)

V = Rect(-0.5, 0.5, 0.7, 1.3)
W = V.conjugate()


@pytest.fixture(scope="module")
def omega():
    return ClosedTwoForm.build(extension_density, V, W)


def test_form_certificate(omega):
    assert omega.closedness_certificate < 1e-6
    bad = ClosedTwoForm.build(lambda z, w: np.conj(z) * w, V, W)
    assert bad.closedness_certificate > 0.1


def test_adaptive_gl():
    v, e, trace = adaptive_gl(np.exp, 0, 1)
    assert abs(v - (np.e - 1)) < 1e-14 and e < 1e-12 and len(trace) >= 1
    v, e, trace = adaptive_gl(lambda t: np.sqrt(t), 0, 1, max_depth=40)
    assert abs(v - 2 / 3) < 1e-10 and len(trace) > 1


def test_cone_matches_closed_form(omega):
    chart = ConeChart(1j, -1j)
    q = log_potential(1j, -1j)
    for z, w in [(0.3 + 0.8j, -0.2 - 1.1j), (-0.4 + 1.25j, 0.45 - 0.75j)]:
        assert abs(cone_potential(omega, chart, z, w) - q(z, w)) < 1e-11


def test_cone_vanishes_on_axes(omega):
    chart = ConeChart(1j, -1j)
    assert cone_potential(omega, chart, 1j, -0.3 - 0.9j) == 0
    assert cone_potential(omega, chart, 0.2 + 0.9j, -1j) == 0


def test_cone_polynomial_form():
    form = ClosedTwoForm.build(lambda z, w: z**2 * w**3, V, W)
    z0, w0 = 0.1 + 1j, -0.2 - 0.9j
    z, w = 0.4 + 1.2j, 0.3 - 0.8j
    exact = (z**3 - z0**3) * (w**4 - w0**4) / 12
    assert abs(cone_potential(form, ConeChart(z0, w0), z, w) - exact) < 1e-13


@settings(max_examples=8)
@given(st.floats(-0.45, 0.45), st.floats(0.75, 1.25), st.floats(-0.45, 0.45), st.floats(-1.25, -0.75))
def test_mixed_hessian(omega, a, b, c, d):
    chart = ConeChart(1j, -1j)
    assert mixed_hessian_check(omega, chart, complex(a, b), complex(c, d), h=1e-3, order=4) < 1e-8


def test_mixed_hessian_second_order_rate(omega):
    chart = ConeChart(1j, -1j)
    e1 = mixed_hessian_check(omega, chart, 0.2 + 1j, -0.1 - 1j, h=2e-3)
    e2 = mixed_hessian_check(omega, chart, 0.2 + 1j, -0.1 - 1j, h=1e-3)
    assert 3 < e1 / e2 < 5


def test_chart_independence(omega):
    # two potentials differ by f(z) + g(w): the mixed difference vanishes
    qa = lambda z, w: cone_potential(omega, ConeChart(1j, -1j), z, w)  # noqa: E731
    qb = lambda z, w: cone_potential(omega, ConeChart(0.3 + 0.8j, -0.2 - 1.2j), z, w)  # noqa: E731
    diff = lambda z, w: qa(z, w) - qb(z, w)  # noqa: E731
    assert abs(mixed_derivative(diff, 0.1 + 1.1j, 0.1 - 0.9j, 1e-2, 4)) < 1e-9


def test_path_potential_stokes(omega):
    # curved paths with the same endpoints as the cone segments give the same rectangle sum
    z0, z1, w0, w1 = 1j, 0.4 + 0.8j, -1j, -0.3 - 1.2j
    g = lambda s: z0 + s * (z1 - z0) + 0.1j * np.sin(np.pi * s)  # noqa: E731
    dg = lambda s: (z1 - z0) + 0.1j * np.pi * np.cos(np.pi * s)  # noqa: E731
    d = lambda t: w0 + t * (w1 - w0) - 0.1 * t * (1 - t)  # noqa: E731
    dd = lambda t: (w1 - w0) - 0.1 * (1 - 2 * t)  # noqa: E731
    val = path_potential(omega, (g, dg), (d, dd))
    assert abs(val - log_potential(z0, w0)(z1, w1)) < 1e-11


def test_chart_and_domain_checks(omega):
    with pytest.raises(ValueError):
        ConeChart(5j, -1j).check(omega)
    with pytest.raises(ValueError):
        cone_potential(omega, ConeChart(1j, -1j), 3j, -1j)
    with pytest.raises(ValueError):
        Rect(1, 0, 0, 1)


def test_quadrature_failure_reports_trace():
    R = Rect(-1, 1, -1, 1)
    sing = ClosedTwoForm(lambda z, w: 1 / (z - w) ** 2, R, R, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"), pytest.raises(QuadratureError) as info:
        cone_potential(sing, ConeChart(-0.5, 0.5), 0.5 + 0.0j, -0.5 + 0.0j)
    assert info.value.trace


def test_genus1_examples():
    assert abs(wp_genus1(1j) - 0.25j) < 1e-16
    with pytest.raises(ValueError):
        wp_genus1(-1j)
    for z in (1j, 0.3 + 0.7j, -1 + 2j):
        assert kahler_potential_check(z, 1e-3) < 1e-5


def test_tilde_q_real_on_diagonal():
    q = log_potential(1j, -1j)
    for z in (0.2 + 0.9j, -0.3 + 1.2j):
        assert abs(tilde_q(q, z, np.conj(z), (V, W)).imag) < 1e-14
    # q itself is not real on the diagonal for off-axis centers
    q2 = log_potential(0.3 + 1j, -1j)
    assert abs(q2(0.2 + 0.9j, 0.2 - 0.9j).imag) > 1e-3
    assert abs(tilde_q(q2, 0.2 + 0.9j, 0.2 - 0.9j).imag) < 1e-14
    with pytest.raises(ValueError):
        tilde_q(q, 0.2 + 0.9j, 3 - 1j, (V, W))


def test_extension_is_holomorphic_and_split():
    z, w = 0.2 + 1.1j, -0.1 - 0.9j
    assert cr_residual(lambda s: torus_logdet_extension(s, w), z, 1e-4) < 1e-7
    assert cr_residual(lambda s: torus_logdet_extension(z, s), w, 1e-4) < 1e-7
    assert abs(torus_logdet_extension(z, np.conj(z)) - torus_logdet_exact(z)) < 1e-14
    assert extension_structure_check(z, w) < 1e-9
    # the unsplit extension keeps the (1/2) (z - w)^-2 mixed derivative
    assert abs(mixed_derivative(lambda a, b: extension_split(a, b) + 0.5 * np.log((a - b) / 2j), z, w, 1e-3, 4)) > 0.1


def test_polynomial_uniqueness():
    r = polynomial_uniqueness(4, 30)
    assert r["unknowns"] == 25 and r["sigma_min_rel"] > 1e-8
    assert r["max_coefficient_zero_data"] == 0
    assert r["recovery_error"] < 1e-6
    with pytest.raises(ValueError):
        polynomial_uniqueness(4, 10)

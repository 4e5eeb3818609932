import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quasilap.beltrami import BeltramiCoefficient
from quasilap.determinant import (
    CutError,
    InadmissibleError,
    KernelError,
    det_holomorphy_check,
    diagonal_holomorphy_residual,
    discretize,
    eigen_spectrum,
    heat_trace,
    hermiticity_defect,
    log_det,
    log_det_branch,
    variation_check,
    zeta_logdet_torus,
)
from quasilap.grid import SampledField, make_torus_grid
from quasilap.operators import apply, delta_mn
from quasilap.oracles import dedekind_eta, torus_eigenvalues, torus_logdet_exact
from quasilap.presets import sample

from conftest import band_limited

Z_VALUES = [1j, 2j, 0.5 + 1j, 1 / 3 + 2j, 0.5j]


def tmu(text, z=1j, N=16):
    return BeltramiCoefficient.from_field(sample(text, make_torus_grid(z, N)))


@pytest.mark.parametrize("z", Z_VALUES)
def test_zeta_matches_eta(z):
    assert abs(zeta_logdet_torus(z).log_det - torus_logdet_exact(z)) < 1e-10
    lap = zeta_logdet_torus(z, "laplacian").log_det.real
    assert abs(lap - math.log(z.imag**2 * abs(dedekind_eta(z).value) ** 4)) < 1e-10


@given(st.floats(-0.5, 0.5), st.floats(0.8, 2.0))
def test_zeta_modular(re, im):
    z = complex(re, im)
    a = zeta_logdet_torus(z).log_det
    assert abs(zeta_logdet_torus(z + 1).log_det - a) < 1e-10
    assert abs(zeta_logdet_torus(-1 / z).log_det - a) < 1e-10


def test_zeta_rejects():
    with pytest.raises(ValueError):
        zeta_logdet_torus(20j)
    with pytest.raises(ValueError):
        zeta_logdet_torus(1j, "other")


@pytest.mark.parametrize("t", [0.01, 0.1, 1.0])
def test_heat_trace_poisson_duality(t):
    z = 0.3 + 1.2j
    assert abs(heat_trace(z, t) - heat_trace(z, t, method="poisson")) < 1e-12 * heat_trace(z, t)


def test_discretize_matches_apply(rng):
    g = make_torus_grid(0.2 + 1.1j, 16)
    L = delta_mn(tmu("fourier:1,0,0.2", g.modulus), tmu("fourier:1,1,0.1", g.modulus))
    A = discretize(L)
    u = band_limited(g, rng, modes=3)
    lhs = A @ np.fft.fft2(u).ravel()
    rhs = np.fft.fft2(apply(L, SampledField(g, u)).values).ravel()
    assert np.max(np.abs(lhs - rhs)) < 1e-9 * np.max(np.abs(rhs))


def test_flat_spectrum_matches_oracle():
    z = 0.5 + 1j
    A = discretize(delta_mn(tmu("constant:0", z), tmu("constant:0", z)))
    S = eigen_spectrum(A)
    exact = torus_eigenvalues(z, 200)
    lam = np.sort(S.eigenvalues.real)[: exact.size]
    assert np.max(np.abs(lam - exact)) < 1e-9 * exact.max()
    assert hermiticity_defect(A) < 1e-14
    assert S.kernel_dim == 1 and S.residual_bound < 1e-12


def test_constant_mu_hermitian():
    A = discretize(delta_mn(tmu("constant:0.3+0.1j"), tmu("constant:0.3+0.1j")))
    assert hermiticity_defect(A) < 1e-12


def test_discretize_cap():
    with pytest.raises(ValueError):
        discretize(delta_mn(tmu("constant:0"), tmu("constant:0")), cap=100)


def test_log_det_branch_diagonal():
    S = eigen_spectrum(np.diag([0.0, 1, 2, 3]), rho=0.5)
    r = log_det_branch(S)
    assert abs(r.log_det - math.log(6)) < 1e-14 and r.branch_index == 0


@given(st.lists(st.complex_numbers(min_magnitude=0.5, max_magnitude=5, allow_nan=False), min_size=1, max_size=6))
def test_branches_differ_by_2pi_i(vals):
    A = np.diag([0.0] + vals)
    base = None
    for theta in (math.pi, 0.05, -0.05, 2.0):
        try:
            r = log_det(A, theta=theta, rho=0.25)
        except CutError:
            continue
        if base is None:
            base = r.log_det
        k = (r.log_det - base).imag / (2 * math.pi)
        assert abs((r.log_det - base).real) < 1e-12
        assert abs(k - round(k)) < 1e-9


def test_cut_and_kernel_errors():
    with pytest.raises(CutError):
        eigen_spectrum(np.diag([0.0, 1, -2]), theta=math.pi, rho=0.5)
    with pytest.raises(KernelError):
        eigen_spectrum(np.diag([1.0, 2, 3]), rho=0.5)
    with pytest.raises(KernelError):
        eigen_spectrum(np.diag([0.0, 0, 3]), rho=0.5)
    S = eigen_spectrum(np.diag([0.0, 0, 3]), rho=0.5, kernel_dim=2)
    assert S.kernel_dim == 2


def test_variation_on_matrix_families():
    assert variation_check(lambda s: np.diag([1 + s, 2, 3]), h=1e-3, kernel_dim=0) < 1e-10
    rng = np.random.default_rng(1)
    B = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    C = rng.normal(size=(6, 6))
    base = B @ B.conj().T + np.eye(6)
    # nonnormal family with a one-dimensional kernel kept fixed by a projector
    P = np.eye(6) - np.outer(np.ones(6), np.ones(6)) / 6
    fam = lambda s: P @ (base + s * C) @ P  # noqa: E731
    assert variation_check(fam, h=1e-3, kernel_dim=1) < 1e-8
    with pytest.raises(ValueError):
        variation_check(fam, order=3)


def test_variation_on_operator_family():
    mu = tmu("fourier:1,0,0.1", 1j, 8)
    m1 = tmu("fourier:0,1,0.1", 1j, 8)

    def fam(s):
        m = BeltramiCoefficient.from_field(SampledField(mu.grid, mu.values + s * m1.values))
        return delta_mn(m, mu)

    assert variation_check(fam, h=1e-3) < 1e-6


def test_holomorphy_constant():
    mu = tmu("constant:0.1", 1j, 8)
    m1 = tmu("constant:0.05", 1j, 8)
    rs, rt = det_holomorphy_check(mu, mu, m1, m1, h=1e-3)
    assert rs < 1e-5 and rt < 1e-5
    assert diagonal_holomorphy_residual(mu, m1, h=1e-3) > 10 * max(rs, rt)


def test_holomorphy_inadmissible():
    mu = tmu("constant:0.1", 1j, 8)
    nu = tmu("constant:0.5j", 1j, 8)
    m1 = tmu("constant:0.05", 1j, 8)
    with pytest.raises(InadmissibleError, match="symbol sector"):
        det_holomorphy_check(mu, nu, m1, m1, theta0=0.01)


def test_branch_bookkeeping_near_quarter_turn():
    # theta = pi/2 + 0.1: arg in (theta - 2 pi, theta); i keeps pi/2, -1 moves to -pi
    S = eigen_spectrum(np.diag([0, 1j, -1j, -1]), theta=math.pi / 2 + 0.1, rho=0.5)
    r = log_det_branch(S)
    assert abs(r.log_det - (-1j * math.pi)) < 1e-14
    assert r.branch_index == -1


def test_constants_column_vanishes():
    A = discretize(delta_mn(tmu("fourier:1,0,0.2"), tmu("fourier:0,1,0.1")))
    # column 0 is the constant Fourier mode
    assert np.max(np.abs(A[:, 0])) < 1e-12 * np.max(np.abs(A))


def test_diagonal_constant_spectrum_positive():
    S = eigen_spectrum(discretize(delta_mn(tmu("constant:0.3+0.1j"), tmu("constant:0.3+0.1j"))))
    lam = S.eigenvalues[1:]
    assert np.max(np.abs(lam.imag)) < 1e-9 and np.min(lam.real) > 0


def test_variation_constant_family_and_zero_directions():
    A = discretize(delta_mn(tmu("constant:0.1"), tmu("constant:0.1")))
    assert variation_check(lambda s: A, h=1e-3) < 1e-9
    mu = tmu("constant:0.1", 1j, 8)
    zero = tmu("constant:0", 1j, 8)
    assert det_holomorphy_check(mu, mu, zero, zero) == (0.0, 0.0)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from quasilap.beltrami import (
    BeltramiCoefficient,
    PlaneSolverConfig,
    _PlaneOps,
    fmn_pair,
    holder_exponent,
    inverse_map,
    lp_norm,
    min_abs_partial,
    reflected_coefficient,
    smooth_cutoff,
    solve_plane,
    solve_torus,
    solve_wmu,
    solve_wmusigma,
    stability_gap,
)
from quasilap.grid import SampledField, cr_residual, make_rect_grid, make_torus_grid
from quasilap.presets import bump_profile, sample


def torus_mu(text, z=1j, N=32):
    return BeltramiCoefficient.from_field(sample(text, make_torus_grid(z, N)))


def plane_mu(text, half=2.0, h=1 / 16):
    return BeltramiCoefficient.from_field(sample(text, make_rect_grid(half, h)))


@given(st.complex_numbers(max_magnitude=0.6, allow_nan=False), st.sampled_from([1j, 0.5 + 1j, 0.2 + 1.4j]))
@settings(max_examples=10)
def test_constant_mu_is_affine(c, z):
    w = solve_torus(torus_mu(f"constant:{c.real}{c.imag:+}j", z, 16))
    p = w.grid.points
    assert np.max(np.abs(w.map_values.values - (p + c * np.conj(p)) / (1 + c))) < 1e-12
    assert abs(w.normalization["z_prime"] - (z + c * np.conj(z)) / (1 + c)) < 1e-12


def test_fourier_solve_residual_and_offgrid_check():
    mu = torus_mu("fourier:1,0,0.3", 1j, 64)
    w = solve_torus(mu)
    assert w.residual <= 1e-10
    # off-grid central differences against the analytic coefficient
    p = np.array([0.123 + 0.456j, 0.77 + 0.31j])
    h = 1e-5
    fx = (w.evaluate(p + h) - w.evaluate(p - h)) / (2 * h)
    fy = (w.evaluate(p + 1j * h) - w.evaluate(p - 1j * h)) / (2 * h)
    d, db = 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)
    m = 0.3 * np.exp(2j * np.pi * p.real)
    assert np.max(np.abs(db - m * d)) < 1e-8


def test_torus_map_is_quasiperiodic():
    w = solve_torus(torus_mu("sum:fourier:1,0,0.2|fourier:0,1,0.1j", 0.3 + 1.1j, 32))
    zp = w.normalization["z_prime"]
    p = np.array([0.1 + 0.2j, 0.4 + 0.7j])
    assert np.max(np.abs(w.evaluate(p + 1) - w.evaluate(p) - 1)) < 1e-12
    assert np.max(np.abs(w.evaluate(p + 0.3 + 1.1j) - w.evaluate(p) - zp)) < 1e-12
    assert min_abs_partial(w) > 0


@pytest.mark.parametrize("c", [0.3, 0.25 - 0.1j])
def test_inverse_map_of_constant(c):
    mu = torus_mu(f"constant:{c}", 1j, 16)
    inv = inverse_map(solve_torus(mu), mu)
    # inverse of (z + c zbar)/(1 + c); equals -c for real c
    expected = -c * (1 + np.conj(c)) / (1 + c)
    assert np.max(np.abs(inv.values - expected)) < 1e-12


def test_inverse_composes_to_identity():
    # w^{inv mu} o w^mu is conformal on the torus, hence affine and equal to the identity up to lattice scaling
    mu = torus_mu("fourier:1,1,0.2", 1j, 32)
    w = solve_torus(mu)
    inv = inverse_map(w, mu)
    w2 = solve_torus(inv)
    assert abs(w2.normalization["z_prime"] - 1j) < 1e-9
    vals = w2.evaluate(w.map_values.values)
    assert np.max(np.abs(vals - w.grid.points)) < 1e-9


def test_stability_gap_bounded():
    a = torus_mu("fourier:1,0,0.2", 1j, 32)
    gaps = []
    for eps in (1e-2, 1e-3):
        b = torus_mu(f"sum:fourier:1,0,0.2|fourier:0,1,{eps}", 1j, 32)
        gaps.append(stability_gap(a, b))
    assert 0 < gaps[1] < 10 and abs(gaps[0] - gaps[1]) < 0.1 * gaps[1]
    assert stability_gap(a, a) == 0


def _radial_cauchy(v, r):
    # for radial v the Cauchy transform is (2/z) int_0^|z| v(s) s ds
    return lambda z: 2 / z * quad(lambda s: v(s) * s, 0, abs(z), epsabs=1e-14, limit=200)[0]


def test_cauchy_transform_against_radial_quadrature():
    g = make_rect_grid(2.0, 1 / 32)
    R = 1.0
    v = lambda s: bump_profile(np.asarray(s) ** 2 / R**2)  # noqa: E731
    vals = v(np.abs(g.points)) + 0j
    Cv = _PlaneOps(g).cauchy(vals)
    ref = _radial_cauchy(v, R)
    for z in (0.25 + 0.125j, -0.5j, 1.5 + 0.25j, 0.75 - 0.5j):
        assert abs(Cv[g.index_of(z)] - ref(z)) < 1e-6


def test_plane_constant_disk_coefficient():
    # smooth radial mu: w is normalized with dbar w = mu d w, residual small
    g = make_rect_grid(2.0, 1 / 16)
    mu = BeltramiCoefficient.from_field(SampledField(g, 0.4 * bump_profile(np.abs(g.points) ** 2) + 0j))
    w = solve_plane(mu)
    assert w.residual < 1e-10
    assert w.map_values.values[g.index_of(0j)] == 0
    assert abs(w.map_values.values[g.index_of(1 + 0j)] - 1) < 1e-15
    alpha, _ = holder_exponent(w, 1.5)
    assert 0.9 < alpha < 1.1


def test_inhomogeneous_solution():
    g = make_rect_grid(2.0, 1 / 16)
    bump = bump_profile(np.abs(g.points) ** 2) + 0j
    mu = BeltramiCoefficient.from_field(SampledField(g, 0.3 * bump))
    sigma = SampledField(g, 0.5j * bump)
    w = solve_wmusigma(mu, sigma)
    assert w.residual < 1e-10
    assert np.max(np.abs(w.dbar_values.values - mu.values * w.d_values.values - sigma.values)) < 1e-10
    assert w.map_values.values[g.index_of(0j)] == 0
    assert lp_norm(w.d_values.values, g.h**2, 3) < np.inf


def test_smooth_cutoff():
    r = np.linspace(0, 5, 101)
    c = smooth_cutoff(r, 2, 4)
    assert np.all(c[r <= 2] == 1) and np.all(c[r >= 4] == 0)
    assert np.all(np.diff(c) <= 0)


def test_reflected_coefficient_layout():
    g = make_rect_grid(1.0, 0.25)
    mu = np.full(g.shape, 0.1 + 0j)
    nu = np.full(g.shape, 0.2j)
    out = reflected_coefficient(mu, nu, g)
    y = g.points.imag
    assert np.all(out[y > 0] == 0.1)
    assert np.allclose(out[y < 0], -0.2j)
    assert np.allclose(out[y == 0], 0.05 - 0.1j)


def _bump_pair(rng, grid):
    cx, cy = rng.uniform(-0.5, 0.5), rng.uniform(0.9, 1.3)
    a, b = rng.uniform(0.1, 0.5) * np.exp(2j * np.pi * rng.uniform()), rng.uniform(0.1, 0.5) * np.exp(2j * np.pi * rng.uniform())
    mu = sample(f"bump:{cx},{cy},0.6,{a}", grid)
    nu = sample(f"bump:{-cx},{cy},0.5,{b}", grid)
    return BeltramiCoefficient.from_field(mu, "window"), BeltramiCoefficient.from_field(nu, "window")


@pytest.mark.slow
def test_reflection_identity():
    cfg = PlaneSolverConfig()
    grid = cfg.grid()
    rng = np.random.default_rng(3)
    mu, nu = _bump_pair(rng, grid)
    fmn, fnm = fmn_pair(mu, nu, config=cfg)
    # f_{nu,mu}(z) = conj(f_{mu,nu}(conj z))
    refl = np.conj(fmn.map_values.values[:, ::-1])
    assert np.max(np.abs(fnm.map_values.values - refl)) < 1e-9


def test_solve_wmu_dispatch():
    with pytest.raises(ValueError):
        solve_wmu(BeltramiCoefficient.from_field(sample("constant:0", make_rect_grid(1, 0.25)), "window"))


@pytest.mark.parametrize("k", [1.0, 1.5])
def test_rejects_large_coefficients(k):
    with pytest.raises(ValueError):
        torus_mu(f"constant:{k}", 1j, 8)


def test_plane_rejects_noncompact():
    with pytest.raises(ValueError):
        solve_plane(plane_mu("constant:0.1"))


def test_torus_map_holomorphic_in_mu():
    g = make_torus_grid(1j, 16)
    m = sample("fourier:1,0,0.2", g).values
    m1 = sample("fourier:0,1,1", g).values
    idx = (5, 9)

    def val(s):
        w = solve_torus(BeltramiCoefficient.from_field(SampledField(g, m + s * m1)), 1e-14)
        return w.map_values.values[idx]

    def dval(s):
        w = solve_torus(BeltramiCoefficient.from_field(SampledField(g, m + s * m1)), 1e-14)
        return w.d_values.values[idx]

    # central differences: O(h^2) truncation, ~0.2 h^2 here
    assert cr_residual(val, 0, 1e-5) < 1e-9
    assert cr_residual(dval, 0, 1e-5) < 1e-9


@pytest.mark.slow
def test_fmn_holomorphic_in_mu_antiholomorphic_in_nu():
    cfg = PlaneSolverConfig()
    grid = cfg.grid()
    m = sample("bump:0.1,1,0.6,0.2", grid).values
    n = sample("bump:-0.2,0.9,0.5,0.15j", grid).values
    m1 = sample("bump:0,1.1,0.5,1", grid).values
    idx = grid.index_of(0.25 + 1j)
    from quasilap.beltrami import solve_fmn

    def f(mv, nv):
        mu = BeltramiCoefficient.from_field(SampledField(grid, mv), "window")
        nu = BeltramiCoefficient.from_field(SampledField(grid, nv), "window")
        return solve_fmn(mu, nu, 1e-14, cfg).map_values.values[idx]

    assert cr_residual(lambda s: f(m + s * m1, n), 0, 1e-4) < 1e-8
    assert cr_residual(lambda t: f(m, n + np.conj(t) * m1), 0, 1e-4) < 1e-8

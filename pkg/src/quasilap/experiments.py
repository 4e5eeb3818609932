"""Experiment pipelines shared by the command line and the acceptance suite.

Each function returns an ``Outcome``: a JSON-ready payload, a list of
``Check`` rows (value, tolerance, comparison, pass flag) and optional table
rows for CSV output.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .beltrami import BeltramiCoefficient, c2_norm, solve_torus
from .determinant import (
    default_rho,
    det_holomorphy_check,
    diagonal_holomorphy_residual,
    discretize,
    eigen_spectrum,
    log_det_branch,
    zeta_logdet_torus,
)
from .grid import SampledField, make_torus_grid
from .operators import delta_mn, symbol_report
from .oracles import dedekind_eta, torus_eigenvalues, torus_logdet_exact
from .potential import (
    ClosedTwoForm,
    ConeChart,
    Rect,
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
from .presets import sample

__all__ = [
    "Check",
    "Outcome",
    "torus_det",
    "beltrami_solve",
    "symbol_angle",
    "det_sweep",
    "potential_verify",
    "holomorphy_check",
    "linear_fit",
    "first_modes",
]


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    op: str = "<="
    criterion: Optional[str] = None
    passed: bool = field(init=False)

    def __post_init__(self):
        v = float(self.value)
        self.value = v
        if self.op == "<=":
            self.passed = bool(v <= self.tolerance)
        elif self.op == ">=":
            self.passed = bool(v >= self.tolerance)
        else:
            raise ValueError(f"unknown comparison {self.op!r}")

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name}: {self.value:.3e} {self.op} {self.tolerance:.1e}"


@dataclass
class Outcome:
    payload: dict
    checks: list
    table: list = field(default_factory=list)
    columns: tuple = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"result": self.payload, "checks": [asdict(c) for c in self.checks], "pass": self.passed}


def _coef(preset: str, grid) -> BeltramiCoefficient:
    return BeltramiCoefficient.from_field(sample(preset, grid))


def linear_fit(x, y) -> tuple[float, float, float]:
    """Least-squares ``y = a + b x``; returns ``(a, b, R^2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    b, a = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (a + b * x)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(a), float(b), r2


def first_modes(eigs: np.ndarray, count: int) -> np.ndarray:
    """The ``count`` smallest nonzero real parts, sorted."""
    lam = np.sort(np.asarray(eigs).real)
    return lam[1 : count + 1]


# --------------------------------------------------------------------------


def torus_det(z: complex, N: int = 64, modes: int = 20) -> Outcome:
    t0 = time.perf_counter()
    z = complex(z)
    zeta = zeta_logdet_torus(z).log_det.real
    exact = torus_logdet_exact(z)
    rel = abs(zeta - exact) / abs(exact)
    eta = dedekind_eta(z)
    elapsed = time.perf_counter() - t0
    payload = {
        "z": [z.real, z.imag],
        "zeta_logdet": zeta,
        "zeta_logdet_laplacian": zeta_logdet_torus(z, "laplacian").log_det.real,
        "oracle": exact,
        "relative_delta": rel,
        "eta_terms": eta.truncation_terms,
        "eta_tail_bound": eta.tail_bound,
        "seconds": elapsed,
    }
    checks = [Check("zeta vs eta oracle (relative)", rel, 1e-8, criterion="1")]
    if N * N <= 4096:
        g = make_torus_grid(z, N)
        zero = _coef("constant:0", g)
        S = eigen_spectrum(discretize(delta_mn(zero, zero)))
        got = first_modes(S.eigenvalues, modes)
        ref = torus_eigenvalues(z, 1.5 * got[-1] + 1)[1 : modes + 1]
        dev = float(np.max(np.abs(got - ref) / ref))
        payload["N"] = N
        payload["spectrum_relative_delta"] = dev
        checks.append(Check(f"flat spectrum, first {modes} modes", dev, 1e-6))
    return Outcome(payload, checks)


def beltrami_solve(preset: str, N: int = 128, z: complex = 1j, tol: float = 1e-12) -> Outcome:
    g = make_torus_grid(z, N)
    mu = _coef(preset, g)
    w = solve_torus(mu, tol)
    cert = w.certificate()
    payload = {
        "preset": preset,
        "N": N,
        "modulus": [g.modulus.real, g.modulus.imag],
        "k": mu.k,
        "residual": w.residual,
        "iterations": w.iterations,
        "z_prime": [w.normalization["z_prime"].real, w.normalization["z_prime"].imag],
        "certificate": {k: v for k, v in cert.items() if isinstance(v, (int, float, str))},
    }
    out = Outcome(payload, [Check("Beltrami residual certificate", w.residual, 1e-10, criterion="3")])
    out.map = w
    return out


def symbol_angle(mu: str, nu: str, N: int = 64, z: complex = 1j, fractions=(0.25, 0.5, 1.0)) -> Outcome:
    """``max |arg sigma|`` along ``nu_t = mu + t (nu - mu)``."""
    g = make_torus_grid(z, N)
    m = _coef(mu, g)
    n = _coef(nu, g)
    diag = symbol_report(delta_mn(m, m)).max_abs_arg
    rows = []
    for t in fractions:
        nt = BeltramiCoefficient.from_field(SampledField(g, m.values + t * (n.values - m.values)))
        rep = symbol_report(delta_mn(m, nt))
        eps = c2_norm(SampledField(g, nt.values - m.values))
        rows.append([t, eps, rep.max_abs_arg, *rep.per_factor_args])
    eps = [r[1] for r in rows]
    ang = [r[2] for r in rows]
    a, b, r2 = linear_fit(eps, ang)
    payload = {"mu": mu, "nu": nu, "N": N, "diagonal_max_abs_arg": diag, "intercept": a, "slope": b, "r2": r2}
    checks = [
        Check("diagonal symbol angle", diag, 1e-10, criterion="5"),
        Check("linear fit R^2", r2, 0.99, ">=", criterion="5"),
        Check("max angle below pi/2", max(ang), math.pi / 2, criterion="5"),
    ]
    cols = ("t", "eps", "max_abs_arg", "arg_prefactor", "arg_one_minus_mu_nubar", "arg_df", "arg_quadratic")
    return Outcome(payload, checks, rows, cols)


def _sweep_point(args):
    z, N, mu, direction, mu1, nu1, eps, h, theta, rho, tol = args
    g = make_torus_grid(z, N)
    m = _coef(mu, g)
    d = sample(direction, g).values
    n = BeltramiCoefficient.from_field(SampledField(g, m.values + eps * d))
    S = eigen_spectrum(discretize(delta_mn(m, n, tol)), theta, rho, certify=False)
    lam = S.eigenvalues[np.abs(S.eigenvalues) >= S.rho]
    ld = log_det_branch(S).log_det
    res_s, res_t = det_holomorphy_check(m, n, _coef(mu1, g), _coef(nu1, g), h, theta, rho, tol=tol)
    return [eps, float(np.min(np.abs(lam))), ld.real, ld.imag, res_s, res_t, N, theta]


def det_sweep(
    mu: str,
    direction: str,
    eps_values,
    N: int = 32,
    z: complex = 1j,
    mu1: str = "constant:0.05",
    nu1: str = "constant:0.05",
    h: float = 1e-3,
    theta: float = math.pi,
    rho: Optional[float] = None,
    tol: float = 1e-13,
    jobs: int = 1,
) -> Outcome:
    """Gap, log-determinant and holomorphy residuals along ``nu = mu + eps * direction``."""
    g = make_torus_grid(z, N)
    m = _coef(mu, g)
    S0 = eigen_spectrum(discretize(delta_mn(m, m, tol)), theta, certify=False)
    gap0 = float(np.abs(S0.eigenvalues[1]))
    if rho is None:
        rho = default_rho(m, tol)
    tasks = [(z, N, mu, direction, mu1, nu1, float(e), h, theta, rho, tol) for e in sorted(eps_values)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    rows.sort(key=lambda r: r[0])
    eps = np.array([r[0] for r in rows])
    dev = np.array([abs(r[1] - gap0) for r in rows])
    nz = eps > 0
    C = float(np.max(dev[nz] / eps[nz])) if np.any(nz) else 0.0
    _, slope, _ = linear_fit(np.r_[0.0, eps], np.r_[0.0, dev]) if len(eps) else (0, 0, 0)
    payload = {
        "mu": mu,
        "direction": direction,
        "N": N,
        "theta": theta,
        "rho": rho,
        "diagonal_gap": gap0,
        "gap_constant_C": C,
        "gap_slope": slope,
        "min_gap": float(min(r[1] for r in rows)),
    }
    checks = [
        Check("min nonzero |lambda| / rho", payload["min_gap"] / rho, 1.0, ">=", criterion="6"),
        Check("gap deviation / eps (fitted C)", C, 10 * gap0 + 1.0, criterion="6"),
        Check("holomorphy residual res_s", max(r[4] for r in rows), 1e-5, criterion="7"),
        Check("holomorphy residual res_t", max(r[5] for r in rows), 1e-5, criterion="7"),
    ]
    cols = ("eps", "min_gap", "log_det_re", "log_det_im", "res_s", "res_t", "N", "theta")
    return Outcome(payload, checks, rows, cols)


def holomorphy_check(mu: str, nu: str, mu1: str, nu1: str, N: int = 32, z: complex = 1j, h: float = 1e-3, theta: float = math.pi, rho=None, tol: float = 1e-13) -> Outcome:
    g = make_torus_grid(z, N)
    m, n, m1, n1 = (_coef(p, g) for p in (mu, nu, mu1, nu1))
    if rho is None:
        rho = default_rho(m, tol)
    res_s, res_t = det_holomorphy_check(m, n, m1, n1, h, theta, rho, tol=tol)
    contrast = diagonal_holomorphy_residual(m, m1, h, theta, rho, tol)
    ratio = contrast / max(res_s, 1e-300)
    payload = {"res_s": res_s, "res_t": res_t, "diagonal_residual": contrast, "ratio": ratio, "h": h, "N": N, "rho": rho}
    checks = [
        Check("CR residual in s", res_s, 1e-5, criterion="7"),
        Check("CR residual in t", res_t, 1e-5, criterion="7"),
        Check("diagonal contrast ratio", ratio, 10.0, ">=", criterion="7"),
    ]
    return Outcome(payload, checks)


# --------------------------------------------------------------------------


def _poly_form(rng, V, W, degree=3):
    c = rng.normal(size=(degree + 1, degree + 1)) + 1j * rng.normal(size=(degree + 1, degree + 1))

    def om(z, w):
        z = np.asarray(z)
        w = np.asarray(w)
        return sum(c[a, b] * z**a * w**b for a in range(degree + 1) for b in range(degree + 1))

    return ClosedTwoForm.build(om, V, W)


def potential_verify(seed: int = 0, polys: int = 3) -> Outcome:
    V = Rect(-1.0, 1.0, 0.5, 2.0)
    W = V.conjugate()
    chart = ConeChart(0.2 + 1.0j, 0.2 - 1.0j)
    omega = ClosedTwoForm.build(extension_density, V, W)
    q_exact = log_potential(chart.z0, chart.w0)
    rows = []

    def add(name, defect, tol):
        rows.append(Check(name, defect, tol, criterion="9"))

    zero = ClosedTwoForm.build(lambda z, w: np.zeros(np.broadcast(np.asarray(z), np.asarray(w)).shape, dtype=complex), V, W)
    add("zero form", abs(cone_potential(zero, chart, 0.5 + 1.5j, -0.3 - 1.2j)), 1e-15)
    one = ClosedTwoForm.build(lambda z, w: np.ones(np.broadcast(np.asarray(z), np.asarray(w)).shape, dtype=complex), V, W)
    pz, pw = 0.5 + 1.5j, -0.3 - 1.2j
    add("constant form", abs(cone_potential(one, chart, pz, pw) - (pz - chart.z0) * (pw - chart.w0)), 1e-12)
    worst = 0.0
    for z, w in [(0.5 + 1.5j, -0.3 - 1.2j), (1j, -1.2j), (-0.8 + 0.6j, 0.9 - 1.9j)]:
        worst = max(worst, abs(cone_potential(omega, chart, z, w) - q_exact(z, w)))
    add("closed-form log potential", worst, 1e-10)
    add("mixed Hessian, (z-w)^-2 at (i, -1.2i)", mixed_hessian_check(omega, chart, 1j, -1.2j, 1e-3), 1e-6)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(polys):
        P = _poly_form(rng, V, W)
        worst = max(worst, mixed_hessian_check(P, chart, 0.3 + 1.2j, -0.1 - 0.8j, 0.1, order=4) / max(1.0, abs(P(0.3 + 1.2j, -0.1 - 0.8j))))
    add("mixed Hessian, random cubic polynomials", worst, 1e-8)

    # Stokes: a bent path with the same endpoints
    z, w = 0.6 + 1.7j, -0.4 - 0.7j
    a, b = 0.15, -0.1j

    def bent(p0, p1, amp):
        return (lambda s: p0 + s * (p1 - p0) + amp * np.sin(np.pi * s), lambda s: (p1 - p0) + amp * np.pi * np.cos(np.pi * s))

    stokes = abs(path_potential(omega, bent(chart.z0, z, a), bent(chart.w0, w, b)) - cone_potential(omega, chart, z, w))
    add("Stokes: bent path vs radial", stokes, 1e-10)

    chart2 = ConeChart(-0.5 + 1.6j, 0.4 - 0.6j)
    diff = lambda s, t: cone_potential(omega, chart, s, t) - cone_potential(omega, chart2, s, t)  # noqa: E731
    add("chart independence (mixed derivative of difference)", abs(mixed_derivative(diff, 0.1 + 1.3j, -0.2 - 1.1j, 1e-2, order=4)), 1e-6)

    add("omega_WP density at i", abs(wp_genus1(1j) - 0.25j), 1e-15)
    zz = 0.3 + 1.4j
    add("restriction of (z-w)^-2 to w = conj z is i omega_WP", abs(extension_density(zz, zz.conjugate()) - 1j * wp_genus1(zz)), 1e-15)
    add("Kahler potential log(z - zbar)", kahler_potential_check(0.3 + 1.2j, 1e-3), 1e-6)
    worst = 0.0
    for x in np.linspace(-0.8, 0.8, 5):
        for y in np.linspace(0.6, 1.9, 5):
            worst = max(worst, abs(tilde_q(q_exact, complex(x, y), complex(x, -y), (V, W)).imag))
    add("tilde q real on the diagonal", worst, 1e-12)

    def qt_diag(x, y):
        p = complex(x, y)
        return tilde_q(q_exact, p, p.conjugate()).real

    hh = 1e-3
    x0, y0 = 0.1, 1.3
    lap = (qt_diag(x0 + hh, y0) + qt_diag(x0 - hh, y0) + qt_diag(x0, y0 + hh) + qt_diag(x0, y0 - hh) - 4 * qt_diag(x0, y0)) / hh**2
    p0 = complex(x0, y0)
    add("d dbar tilde q = i omega_WP", abs(0.25 * lap - 1j * wp_genus1(p0)), 1e-5)
    add("extension splits (mixed derivative of F)", extension_structure_check(1j, -1.3j, 1e-3), 1e-7)
    zs = [complex(x, y) for x in (0.1, 0.4, 0.8) for y in (0.7, 1.2, 1.8)]
    var = [extension_split(p, -1.1j) - extension_split(p, 0.3 - 0.9j) for p in zs]
    add("F(z,w) - F(z,w') independent of z", max(abs(v - var[0]) for v in var), 1e-10)
    uq = polynomial_uniqueness(4, 30, seed=seed)
    add("diagonal determines polynomial (zero data)", uq["max_coefficient_zero_data"], 1e-10)
    add("diagonal determines polynomial (recovery)", uq["recovery_error"], 1e-10)

    payload = {"examples": [{"example": c.name, "defect": c.value, "tolerance": c.tolerance, "pass": c.passed} for c in rows], "uniqueness": uq}
    return Outcome(payload, rows)
